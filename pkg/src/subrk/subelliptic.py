"""Subelliptic heat kernels on SU(2) and S^{2d+1} as transforms of q_t.

For r in [0, pi/2) and z in [-pi, pi]

    p_t(r, z) = (4 pi t)^{-1/2} int_R exp(-(lam + i z)^2 / 4t) q_t(cos r cosh lam) d lam
              = e^{z^2/4t} (4 pi t)^{-1/2} 2 Re int_0^inf e^{-lam^2/4t} e^{-i lam z/2t}
                q_t(cos r cosh lam) d lam,

and p_{t,d} is the same transform of q_{t,d}.  The factor e^{-lam^2/4t} is
fused with the exp(-A/4t) scale of q_t into one non-positive exponent, so
nothing overflows on the hyperbolic branch.  r- and z-derivatives are taken
under the integral sign; a whole block of them is integrated at once.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import log, pi, sqrt

import numpy as np

from .faa_di_bruno import composite_derivs
from .heisenberg import KernelValue
from .quadrature import gk21
from .riemannian import log_prefactor, q_su2_parts, sphere_log_constant
from .special_functions import DomainError, fused_exponent

__all__ = [
    "QuadratureConfig",
    "SubellipticPoint",
    "KernelBlock",
    "p_block",
    "p_su2",
    "p_sphere",
    "p_derivs",
    "split_lambda",
    "p_profile",
]

MAX_ORDER = 8
_LAM_CAP = 60.0


@dataclass(frozen=True)
class QuadratureConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-14
    max_panels: int = 2000
    gaussian_substitution_t_switch: float = 0.02
    substitution: bool | None = None  # None: use it below the switch
    tail_rel: float = 1e-18
    kmax: int = 10

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if not 0 < self.gaussian_substitution_t_switch <= 0.1:
            raise ValueError("t_switch must lie in (0, 0.1]")

    def use_substitution(self, t: float) -> bool:
        if self.substitution is None:
            return t <= self.gaussian_substitution_t_switch
        return self.substitution


@dataclass(frozen=True)
class SubellipticPoint:
    r: float
    z: float
    t: float
    d: int = 1

    def __post_init__(self):
        if not 0 <= self.r < pi / 2:
            raise DomainError("r must lie in [0, pi/2)")
        if not -pi <= self.z <= pi:
            raise DomainError("z must lie in [-pi, pi]")
        if not self.t > 0:
            raise DomainError("t must be positive")
        if self.d < 1:
            raise DomainError("d must be >= 1")


@dataclass
class KernelBlock:
    values: np.ndarray
    err_estimate: np.ndarray
    imag_residual: np.ndarray
    branch_split_lambda: float
    lambda_max: float
    n_evals: int
    converged: bool
    info: dict = field(default_factory=dict)

    def resolved(self, rel: float = 1e-6) -> bool:
        """Whether the kernel value itself rises above its error estimate.

        At large |z|/t the folded integral cancels down to the round-off
        floor of its L1 norm; the estimate then exceeds ``rel * |p|``.
        """
        return bool(self.err_estimate[0, 0] <= rel * abs(self.values[0, 0]))


def split_lambda(r: float) -> float:
    """lam* = arccosh(1 / cos r), where cos r cosh lam crosses 1."""
    return float(np.arccosh(1.0 / np.cos(r))) if r > 0 else 0.0


def _make_integrand(point: SubellipticPoint, nr: int, nz: int, sphere: bool, component: str, kmax: int):
    r, z, t, d = point.r, point.z, point.t, point.d
    shift = d - 1 if sphere else 0
    log_c = log_prefactor(t) + (sphere_log_constant(t, d) if sphere else 0.0)
    cos_derivs = [np.cos(r), -np.sin(r), -np.cos(r), np.sin(r)]
    phi2 = 1.0 / (2.0 * t)

    def f(lam):
        lam = np.asarray(lam, dtype=float)
        E, v = fused_exponent(r, lam, t)
        parts = q_su2_parts(t, n_max=shift + nr, v=v, kmax=kmax, remainder=component != "leading")
        if component == "leading":
            mant = parts.leading
        elif component == "remainder":
            mant = parts.remainder
        else:
            mant = parts.leading + parts.remainder
        ch = np.cosh(lam)
        outer = [mant[shift + i] for i in range(nr + 1)]
        inner = [ch * cos_derivs[j % 4] for j in range(1, nr + 1)]
        rd = composite_derivs(outer, inner, nr)
        weight = np.exp(log_c + E)
        phi1 = (z - 1j * lam) / (2.0 * t)
        zin = [phi1, np.full_like(lam, phi2, dtype=complex)] + [np.zeros_like(lam, dtype=complex)] * max(nz - 2, 0)
        zd = composite_derivs([np.ones_like(lam, dtype=complex)] * (nz + 1), zin[:nz], nz)
        osc = np.exp(-1j * lam * z / (2.0 * t)) * weight
        out = np.empty((lam.size, nr + 1, nz + 1), dtype=complex)
        for i in range(nr + 1):
            base = np.asarray(rd[i]) * osc
            for m in range(nz + 1):
                out[:, i, m] = base * zd[m]
        return out

    return f


def _tail_point(f, lam_star: float, t: float, rel: float) -> tuple[float, float]:
    # probe the envelope on a geometric grid beyond lam*; returns (lam_max, peak location)
    offs = np.geomspace(1e-8, _LAM_CAP, 240)
    grid = np.concatenate([np.linspace(0.0, lam_star, 40, endpoint=False), lam_star + offs])
    grid = grid[grid <= _LAM_CAP]
    vals = np.abs(f(grid)).reshape(grid.size, -1).max(axis=1)
    peak = float(vals.max())
    if peak == 0.0:
        return max(lam_star, 1e-3), 0.0
    above = np.nonzero(vals > rel * peak)[0]
    last = above[-1]
    lam_max = float(grid[min(last + 1, grid.size - 1)])
    return max(lam_max, lam_star + 1e-12), float(grid[int(np.argmax(vals))])


def p_block(
    point: SubellipticPoint,
    cfg: QuadratureConfig = QuadratureConfig(),
    nr: int = 0,
    nz: int = 0,
    *,
    sphere: bool = False,
    component: str = "full",
) -> KernelBlock:
    """d^i/dr^i d^m/dz^m of p_t (or p_{t,d} with ``sphere=True``) for i <= nr, m <= nz.

    ``component`` selects the contribution of the leading part of q_t, of
    its remainder series, or of both ("full").
    """
    if nr > MAX_ORDER or nz > MAX_ORDER:
        raise ValueError(f"derivative orders are capped at {MAX_ORDER} per variable")
    if component not in ("full", "leading", "remainder"):
        raise ValueError(f"unknown component {component!r}")
    t = point.t
    half = _make_integrand(point, nr, nz, sphere, component, cfg.kmax)

    def f(lam):
        # integrate over the full line folded onto [0, inf): the imaginary
        # part of the sum cancels analytically and is kept as a diagnostic
        both = half(np.concatenate([lam, -lam]))
        return both[: lam.size] + both[lam.size :]

    lam_star = split_lambda(point.r)
    probe = half if component != "remainder" else _make_integrand(point, nr, nz, sphere, "full", cfg.kmax)
    lam_max, lam_peak = _tail_point(probe, lam_star, t, cfg.tail_rel)
    breaks = sorted({0.0, lam_star, lam_max} | ({lam_peak} if 0 < lam_peak < lam_max else set()))
    if cfg.use_substitution(t):
        s = sqrt(4.0 * t)

        def g(u):
            return s * f(s * u)

        res = gk21(g, [b / s for b in breaks], cfg.rel_tol, cfg.abs_tol, cfg.max_panels)
    else:
        res = gk21(f, breaks, cfg.rel_tol, cfg.abs_tol, cfg.max_panels)
    pre = 1.0 / sqrt(4.0 * pi * t)
    log_gauss = point.z**2 / (4.0 * t)
    val = res.value
    re = val.real
    with np.errstate(over="ignore", divide="ignore"):
        mag = np.where(re != 0, np.exp(np.log(np.abs(re) + 1e-320) + log_gauss), 0.0)
    values = pre * np.sign(re) * mag
    err = pre * res.error * np.exp(log_gauss)
    scale = np.maximum(np.abs(re), 1e-16 * res.l1)
    imag = np.abs(val.imag) / np.where(scale > 0, scale, 1.0)
    return KernelBlock(
        values=values,
        err_estimate=err,
        imag_residual=imag,
        branch_split_lambda=lam_star,
        lambda_max=lam_max,
        n_evals=res.n_evals,
        converged=res.converged,
        info={"l1": pre * res.l1 * np.exp(log_gauss)},
    )


def p_su2(point: SubellipticPoint, cfg: QuadratureConfig = QuadratureConfig()) -> KernelValue:
    blk = p_block(point, cfg)
    return KernelValue(
        float(blk.values[0, 0]),
        float(blk.err_estimate[0, 0]),
        float(blk.imag_residual[0, 0]),
        {"branch_split_lambda": blk.branch_split_lambda, "lambda_max": blk.lambda_max},
    )


def p_sphere(point: SubellipticPoint, cfg: QuadratureConfig = QuadratureConfig()) -> KernelValue:
    blk = p_block(point, cfg, sphere=True)
    return KernelValue(
        float(blk.values[0, 0]),
        float(blk.err_estimate[0, 0]),
        float(blk.imag_residual[0, 0]),
        {"branch_split_lambda": blk.branch_split_lambda, "lambda_max": blk.lambda_max},
    )


def p_derivs(
    point: SubellipticPoint,
    cfg: QuadratureConfig = QuadratureConfig(),
    n_r: int = 0,
    n_z: int = 0,
    *,
    sphere: bool = False,
) -> KernelValue:
    blk = p_block(point, cfg, n_r, n_z, sphere=sphere)
    return KernelValue(
        float(blk.values[n_r, n_z]),
        float(blk.err_estimate[n_r, n_z]),
        float(blk.imag_residual[n_r, n_z]),
        {"branch_split_lambda": blk.branch_split_lambda, "lambda_max": blk.lambda_max},
    )


def p_profile(
    r: float,
    zs,
    t: float,
    cfg: QuadratureConfig = QuadratureConfig(),
    *,
    d: int = 1,
    sphere: bool = False,
) -> np.ndarray:
    """p_t(r, z) (or p_{t,d}) for a whole vector of z values in one quadrature."""
    zs = np.asarray(zs, dtype=float)
    SubellipticPoint(r, 0.0, t, d)
    if np.any(np.abs(zs) > pi):
        raise DomainError("z must lie in [-pi, pi]")
    shift = d - 1 if sphere else 0
    log_c = log_prefactor(t) + (sphere_log_constant(t, d) if sphere else 0.0)
    lam_star = split_lambda(r)

    def f(lam):
        E, v = fused_exponent(r, lam, t)
        parts = q_su2_parts(t, n_max=shift, v=v, kmax=cfg.kmax)
        base = (parts.leading[shift] + parts.remainder[shift]) * np.exp(log_c + E)
        return 2.0 * base[:, None] * np.cos(np.outer(lam, zs) / (2.0 * t))

    def probe(lam):
        return f(lam)[:, :1]

    lam_max, lam_peak = _tail_point(probe, lam_star, t, cfg.tail_rel)
    breaks = sorted({0.0, lam_star, lam_max} | ({lam_peak} if 0 < lam_peak < lam_max else set()))
    res = gk21(f, breaks, cfg.rel_tol, cfg.abs_tol, cfg.max_panels)
    return res.value * np.exp(zs**2 / (4.0 * t)) / sqrt(4.0 * pi * t)
