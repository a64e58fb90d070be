"""Heat kernels of the Heisenberg groups H^{2d+1} in cylindrical coordinates.

    h_{t,d}(r, z) = (4 pi)^{-(d+1)} int_R e^{i lam z/2} (lam / sinh(lam t))^d
                    exp(-r^2 lam coth(lam t) / 4) d lam

The lam < 0 half is folded onto lam > 0; the imaginary part of the folded
integral vanishes analytically and is reported as a residual.  Derivatives are taken under the integral sign.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import log, pi

import numpy as np

from .faa_di_bruno import composite_derivs
from .quadrature import gk21

__all__ = ["HeisenbergParams", "KernelValue", "h_kernel", "h_derivs", "h_derivs_block", "lambda_cutoff"]

MAX_ORDER = 8


@dataclass(frozen=True)
class HeisenbergParams:
    d: int = 1
    t: float = 1.0

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if not self.t > 0:
            raise ValueError("t must be positive")


@dataclass
class KernelValue:
    """A kernel (or derivative) value with its quadrature diagnostics."""

    value: float
    err_estimate: float
    imag_residual: float = 0.0
    extra: dict | None = None

    def __float__(self):
        return float(self.value)


def _u_over_sinh(u):
    small = np.abs(u) < 1e-3
    safe = np.where(small, 1.0, u)
    u2 = u * u
    return np.where(small, 1.0 - u2 / 6.0 + 7.0 * u2 * u2 / 360.0, safe / np.sinh(safe))


def _u_coth(u):
    small = np.abs(u) < 1e-3
    safe = np.where(small, 1.0, u)
    u2 = u * u
    return np.where(small, 1.0 + u2 / 3.0 - u2 * u2 / 45.0, safe / np.tanh(safe))


def lambda_cutoff(params: HeisenbergParams, r: float, order: int, rel: float = 1e-17) -> float:
    """Point beyond which the integrand envelope is below ``rel`` of its size at 0.

    For large lam the integrand is at most (2 lam)^{d+order} t^{-d}
    exp(-(d t + r^2/4) lam) up to a polynomial in r.
    """
    kappa = params.d * params.t + r * r / 4.0
    p = params.d + order
    lam = 40.0 / kappa
    for _ in range(50):
        lam_new = (-log(rel) + p * log(max(2.0 * lam, 1.0))) / kappa
        if abs(lam_new - lam) < 1e-9 * lam:
            break
        lam = lam_new
    return lam


def _integrand_block(params, r, z, nr, nz):
    d, t = params.d, params.t
    c0 = 1.0 / (4.0 * pi) ** (d + 1)

    def f(lam):
        # lam -> -lam folded in so the imaginary part is a genuine residual
        lam = np.concatenate([lam, -lam])
        u = lam * t
        amp = (_u_over_sinh(u) / t) ** d
        c = _u_coth(u) / t  # lam coth(lam t)
        g = amp * np.exp(-r * r * c / 4.0)
        ones = [np.ones_like(lam)] * (nr + 1)
        inner = [-r * c / 2.0, -c / 2.0] + [np.zeros_like(lam)] * max(nr - 2, 0)
        rd = composite_derivs(ones, inner[:nr], nr)
        phase = np.exp(0.5j * lam * z)
        zf = [(0.5j * lam) ** m for m in range(nz + 1)]
        out = np.empty((lam.size, nr + 1, nz + 1), dtype=complex)
        for i in range(nr + 1):
            base = c0 * g * np.asarray(rd[i]) * phase
            for m in range(nz + 1):
                out[:, i, m] = base * zf[m]
        n = out.shape[0] // 2
        return out[:n] + out[n:]

    return f


def h_derivs_block(
    params: HeisenbergParams,
    r: float,
    z: float,
    nr: int,
    nz: int,
    rel_tol: float = 1e-12,
    abs_tol: float = 1e-300,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """All d^i/dr^i d^m/dz^m h_{t,d}(r, z) for i <= nr, m <= nz.

    Returns (values, error estimates, imaginary residuals), each of shape
    (nr+1, nz+1).
    """
    if nr > MAX_ORDER or nz > MAX_ORDER:
        raise ValueError(f"derivative orders are capped at {MAX_ORDER}")
    if r < 0:
        raise ValueError("r must be non-negative")
    lam_max = lambda_cutoff(params, r, nr + nz)
    f = _integrand_block(params, r, z, nr, nz)
    breaks = [0.0, min(1.0 / params.t, lam_max / 2), lam_max]
    res = gk21(f, sorted(set(breaks)), rel_tol=rel_tol, abs_tol=abs_tol, max_panels=4000)
    val = res.value
    scale = np.maximum(np.abs(val.real), res.l1 * 1e-16)
    imag = np.abs(val.imag) / np.where(scale > 0, scale, 1.0)
    return val.real, res.error, imag


def h_kernel(params: HeisenbergParams, r: float, z: float) -> float:
    """h_{t,d}(r, z)."""
    vals, _, _ = h_derivs_block(params, r, z, 0, 0)
    return float(vals[0, 0])


def h_derivs(params: HeisenbergParams, r: float, z: float, n_r: int, n_z: int) -> KernelValue:
    """d^{n_r}/dr^{n_r} d^{n_z}/dz^{n_z} h_{t,d}(r, z) with diagnostics."""
    vals, err, imag = h_derivs_block(params, r, z, n_r, n_z)
    return KernelValue(float(vals[n_r, n_z]), float(err[n_r, n_z]), float(imag[n_r, n_z]))
