"""Riemannian heat kernels on SU(2) ~ S^3 and on the spheres S^{2d+1}.

With A(x) = arccos^2 x (continued as -arccosh^2 x for x > 1) the SU(2)
kernel against normalised Haar measure is

    q_t(x) = P(t) * Q(x) * (1 + R(x)),   P(t) = sqrt(pi) e^t / (4 t^{3/2}),
    Q      = 2t d/dx exp(-A/4t),
    R      = 2 sum_{k>=1} e^{-pi^2 k^2/t} [cosh(K sqrt A) - 2 pi k sinh(K sqrt A)/sqrt A],

K = pi k / t.  This single expression covers both the trigonometric
(x <= 1) and hyperbolic (x >= 1) branches.  Values are carried as
exp(log_scale) * mantissa, with log_scale = log P - A/4t, so that the
exp(arccosh^2 x / 4t) growth never materialises.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb, log, pi

import numpy as np

from .faa_di_bruno import composite_derivs
from .special_functions import DomainError, a_derivs, phi_derivs

__all__ = [
    "LogScaled",
    "KernelParts",
    "log_prefactor",
    "q_su2_parts",
    "q_su2",
    "q_su2_derivs",
    "remainder_derivs",
    "q_sphere",
    "sphere_log_constant",
    "q_su2_theta",
    "q_sphere_theta",
    "MAX_ORDER",
]

MAX_ORDER = 16
_LOG_TINY = -745.0


@dataclass
class LogScaled:
    """Array of derivatives stored as exp(log_scale) * mantissa[k]."""

    log_scale: np.ndarray
    mantissa: np.ndarray

    @property
    def values(self) -> np.ndarray:
        return self.mantissa * np.exp(self.log_scale)

    def __getitem__(self, k):
        return self.mantissa[k] * np.exp(self.log_scale)

    def __len__(self):
        return len(self.mantissa)


@dataclass
class KernelParts:
    """Mantissas of the leading (Q) and remainder (Q*R) parts."""

    log_scale: np.ndarray
    leading: np.ndarray
    remainder: np.ndarray

    @property
    def total(self) -> LogScaled:
        return LogScaled(self.log_scale, self.leading + self.remainder)


def log_prefactor(t: float) -> float:
    return 0.5 * log(pi) + t - log(4.0) - 1.5 * log(t)


def _r_derivs_in_a(t: float, A: np.ndarray, n: int, kmax: int) -> np.ndarray:
    # d^m R / dA^m, m = 0..n
    out = np.zeros((n + 1,) + A.shape)
    for k in range(1, kmax + 1):
        K = pi * k / t
        base = -(pi * k) ** 2 / t
        # cheap upper bound on the log size of this term
        z_max = K * np.sqrt(max(float(np.max(A)), 0.0))
        if base + z_max + (2 * n + 2) * log(max(K, 1.0)) + log(4 * pi * k + 2) < _LOG_TINY:
            break
        vc, sc = phi_derivs("c", K, A, n)
        vs, ss = phi_derivs("s", K, A, n)
        # same scale for both kinds: sqrt(max(K^2 A, 0))
        w = np.exp(base + sc)
        out += 2.0 * w * (vc - 2.0 * pi * k * vs)
    return out


def q_su2_parts(
    t: float,
    x=None,
    n_max: int = 0,
    *,
    v=None,
    kmax: int = 10,
    remainder: bool = True,
) -> KernelParts:
    """Derivatives 0..n_max of q_t split into leading and remainder parts.

    ``v = x - 1`` may be passed instead of ``x`` for full precision near 1.
    """
    if t <= 0:
        raise DomainError("t must be positive")
    if n_max > MAX_ORDER:
        raise ValueError(f"derivative order {n_max} exceeds the cap {MAX_ORDER}")
    A = a_derivs(x, n_max + 1, v=v)
    A = [np.asarray(a, dtype=float) for a in A]
    a0 = A[0]
    if np.any(a0 > pi * pi + 1e-12):
        raise DomainError("x must be >= -1")
    c = -1.0 / (4.0 * t)
    outer = [np.full_like(a0, c**k) for k in range(n_max + 2)]
    Y = composite_derivs(outer, A[1:], n_max + 1)
    lead = np.array([2.0 * t * Y[j + 1] for j in range(n_max + 1)])
    rem = np.zeros_like(lead)
    if remainder:
        RA = _r_derivs_in_a(t, a0, n_max, kmax)
        if np.any(RA):
            Rx = composite_derivs(list(RA), A[1:], n_max)
            for n in range(n_max + 1):
                acc = 0.0
                for j in range(n + 1):
                    acc = acc + comb(n, j) * lead[j] * Rx[n - j]
                rem[n] = acc
    log_scale = log_prefactor(t) + c * a0
    return KernelParts(log_scale, lead, rem)


def remainder_derivs(t: float, x=None, n_max: int = 0, *, v=None, kmax: int = 10) -> np.ndarray:
    """d^k/dx^k R(t, x), k = 0..n_max, for the remainder factor of q_t."""
    if t <= 0:
        raise DomainError("t must be positive")
    A = [np.asarray(a, dtype=float) for a in a_derivs(x, n_max, v=v)]
    RA = _r_derivs_in_a(t, A[0], n_max, kmax)
    return np.array(composite_derivs(list(RA), A[1:], n_max))


def q_su2_derivs(t: float, x=None, n_max: int = 0, *, v=None, kmax: int = 10) -> LogScaled:
    """d^k/dx^k q_t(x), k = 0..n_max, in log-scaled form."""
    return q_su2_parts(t, x, n_max, v=v, kmax=kmax).total


def q_su2(t: float, x, kmax: int = 10):
    """q_t(x) against normalised Haar measure."""
    vals = q_su2_derivs(t, x, 0, kmax=kmax)[0]
    return float(vals) if np.ndim(vals) == 0 else vals


def sphere_log_constant(t: float, d: int) -> float:
    """log of (1/pi^2) (1/2pi)^{d-1} e^{(d^2-1)t}."""
    if d < 1:
        raise DomainError("d must be >= 1")
    return -2.0 * log(pi) - (d - 1) * log(2.0 * pi) + (d * d - 1) * t


def q_sphere(t: float, d: int, x=None, n_max: int = 0, *, v=None, kmax: int = 10) -> LogScaled:
    """d^k/dx^k q_{t,d}(x) for k = 0..n_max (log-scaled)."""
    if d < 1:
        raise DomainError("d must be >= 1")
    base = q_su2_derivs(t, x, d - 1 + n_max, v=v, kmax=kmax)
    return LogScaled(base.log_scale + sphere_log_constant(t, d), base.mantissa[d - 1 :])


# ---------------------------------------------------------------------------
# Independent oracles: direct Poisson (theta) sums


def q_su2_theta(t: float, x, kmax: int = 12, log_shift=0.0):
    """exp(-log_shift) * q_t(x) from the unpaired image sum.

    Complex arithmetic past x = 1; ``log_shift`` (e.g. lam^2/4t) keeps the
    exp(arccosh^2 x / 4t) growth inside double range.
    """
    x = np.asarray(x, dtype=complex)
    delta = np.arccos(x)
    s = np.sin(delta)
    total = 0.0
    for k in range(-kmax, kmax + 1):
        dk = delta + 2 * pi * k
        total = total + dk * np.exp(-dk * dk / (4 * t) - log_shift)
    with np.errstate(invalid="ignore", divide="ignore"):
        val = np.exp(log_prefactor(t)) * total / s
    return np.real(val)


def q_sphere_theta(t: float, d: int, delta: float, kmax: int = 12) -> float:
    """q_{t,d}(cos delta) by e^{d^2 t} (-1/(2 pi sin delta) d/d delta)^d V(t, delta).

    V(t, delta) = sum_k exp(-(delta + 2k pi)^2 / 4t) / sqrt(4 pi t).  The
    derivatives in delta are taken symbolically (sympy), so this is an
    oracle independent of the x-derivative machinery.  The overall
    constant is matched to q_{t,1} = q_t / pi^2 at d = 1.
    """
    import sympy as sp

    dl = sp.Symbol("delta")
    V = sum(sp.exp(-(dl + 2 * k * sp.pi) ** 2 / (4 * t)) for k in range(-kmax, kmax + 1))
    V = V / sp.sqrt(4 * sp.pi * t)
    expr = V
    for _ in range(d):
        expr = -sp.diff(expr, dl) / (2 * sp.pi * sp.sin(dl))
    val = float(sp.N(expr.subs(dl, delta), 30)) * np.exp(d * d * t)
    # normalisation: q_{t,1} = q_t/pi^2 fixes the constant c with
    # q_{t,d} = c * e^{d^2 t} (...)^d V for all d
    return val * _theta_constant()


def _theta_constant() -> float:
    # d = 1: e^t (-1/(2 pi sin delta)) V' against q_t/pi^2 differ by
    # [sqrt(pi)/(4 pi^2)] / [1/(4 pi sqrt(4 pi))] = 2
    return 2.0
