"""Derivative families built on arccos^2 and arccosh^2.

Everything here is organised around the single analytic function

    A(x) = arccos(x)^2,   with   A(x) = -arccosh(x)^2  for x >= 1,

which is entire in a neighbourhood of x = 1 (its Taylor series in v = x - 1
has radius 2).  The trigonometric/hyperbolic families are analytic functions
of A as well:

    cosh(K arccos x) = cos(K arccosh x)             = cosh(K sqrt(A))
    sinh(K arccos x)/arccos x = sin(K arccosh x)/arccosh x = sinh(K sqrt(A))/sqrt(A)

so their x-derivatives follow from Faa di Bruno over A, without any
endpoint cancellation.  The classical recurrence representations
M_n / (1 - x^2)^{(2n-1)/2} are kept both as an evaluation route away from
x = 1 and as exact polynomial tables.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial, pi

import numpy as np
from scipy.special import ive, spherical_jn

from .faa_di_bruno import composite_derivs

__all__ = [
    "DomainError",
    "DerivFamily",
    "RecurrencePolys",
    "acos_sq_series_coeffs",
    "a_derivs",
    "acos_sq_derivs",
    "acosh_sq_derivs",
    "sinhc_derivs",
    "phi_derivs",
    "trig_hyp_derivs",
    "trig_hyp_derivs_recurrence",
    "fused_exponent",
    "combined_exponent",
    "acos_sq_limit",
    "cos_acosh_limit",
    "LEMMA_BOUND_CONSTANTS",
    "lemma_bound",
]

DEFAULT_THRESHOLD = 0.5
_SERIES_EXTRA = 70


class DomainError(ValueError):
    """Argument outside the domain of the requested function."""


# ---------------------------------------------------------------------------
# Series of A(1 + v)


@lru_cache(maxsize=None)
def acos_sq_series_coeffs(n_terms: int) -> tuple[Fraction, ...]:
    """c_0..c_N with arccos^2(1 - u) = sum_n c_n u^n (c_0 = 0).

    c_n = 2 ((n-1)!)^2 / ((2n-1)!! n!) = 2^{n+1} / (n^2 binom(2n, n)).
    """
    out = [Fraction(0)]
    for n in range(1, n_terms + 1):
        out.append(Fraction(2 ** (n + 1), n * n * comb(2 * n, n)))
    return tuple(out)


@lru_cache(maxsize=None)
def _series_deriv_coeffs(k: int, n_terms: int) -> np.ndarray:
    # d^k/dv^k of sum_n c_n (-v)^n, as polynomial coefficients in v,
    # highest degree first for np.polyval
    c = acos_sq_series_coeffs(n_terms)
    coefs = []
    for n in range(k, n_terms + 1):
        val = c[n] * (-1) ** n * Fraction(factorial(n), factorial(n - k))
        coefs.append(float(val))
    return np.array(coefs[::-1])


def _a_from_v(v: np.ndarray) -> np.ndarray:
    # A(1 + v) without cancellation on either side of v = 0
    out = np.empty_like(v)
    neg = v <= 0
    vn = v[neg]
    a = 2.0 * np.arcsin(np.sqrt(np.minimum(-vn / 2.0, 1.0)))
    out[neg] = a * a
    vp = v[~neg]
    b = np.log1p(vp + np.sqrt(vp * (vp + 2.0)))
    out[~neg] = -b * b
    return out


# ---------------------------------------------------------------------------
# Exact recurrence polynomials


def _pdiff(p: list[int]) -> list[int]:
    return [i * c for i, c in enumerate(p)][1:] or [0]


def _padd(*ps: list[int]) -> list[int]:
    n = max(len(p) for p in ps)
    out = [0] * n
    for p in ps:
        for i, c in enumerate(p):
            out[i] += c
    while len(out) > 1 and out[-1] == 0:
        out.pop()
    return out


def _pmul(p: list[int], q: list[int]) -> list[int]:
    out = [0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                out[i + j] += a * b
    return out


def _pscale(p: list[int], c: int) -> list[int]:
    return [c * a for a in p]


def _bdiff_x(p: dict) -> dict:
    return {(k, j - 1): j * c for (k, j), c in p.items() if j}


def _badd(*ps: dict) -> dict:
    out: dict = {}
    for p in ps:
        for key, c in p.items():
            out[key] = out.get(key, 0) + c
    return {key: c for key, c in out.items() if c}


def _bmul_xpoly(p: dict, q: list[int]) -> dict:
    out: dict = {}
    for (k, j), c in p.items():
        for i, b in enumerate(q):
            if b:
                out[(k, j + i)] = out.get((k, j + i), 0) + c * b
    return {key: c for key, c in out.items() if c}


def _bshift_k(p: dict, c: int = 1) -> dict:
    return {(k + 1, j): c * v for (k, j), v in p.items()}


@dataclass(frozen=True)
class RecurrencePolys:
    """Integer coefficient tables for the M_n / N_n representations.

    For ``kind`` in {"acos", "acosh"}:  d^n/dx^n arccos^2 x (resp. arccosh^2 x)
    equals (p_n(x) s + q_n(x) a) / s^{2n-1}, where s = sqrt(1 - x^2) and
    a = arccos x (resp. s = sqrt(x^2 - 1), a = arccosh x).  ``p[n]`` and
    ``q[n]`` are coefficient lists, lowest degree first.

    For ``kind`` in {"cosh_K_acos", "cos_K_acosh"} the n-th derivative is
    (g_c s C + g_s S) / s^{2n-1} with C, S = cosh, sinh (resp. cos, sin) of
    K a, and ``p[n]``/``q[n]`` hold g_{n,c}/g_{n,s} as dicts
    {(power of K, power of x): int}.
    """

    kind: str
    max_order: int
    p: tuple = field(repr=False)
    q: tuple = field(repr=False)

    @classmethod
    @lru_cache(maxsize=None)
    def build(cls, kind: str, max_order: int = 16) -> "RecurrencePolys":
        if kind in ("acos", "acosh"):
            # sigma = +1 for (1 - x^2), -1 for (x^2 - 1)
            sig = 1 if kind == "acos" else -1
            w = [sig, 0, -sig]
            p = [None, [0]]
            q = [None, [-2 * sig]]
            for n in range(1, max_order):
                pn, qn = p[n], q[n]
                p.append(
                    _padd(
                        _pmul(w, _pdiff(pn)),
                        _pscale(_pmul([0, 1], pn), sig * (2 * n - 2)),
                        _pscale(qn, -sig),
                    )
                )
                q.append(_padd(_pmul(w, _pdiff(qn)), _pscale(_pmul([0, 1], qn), sig * (2 * n - 1))))
            return cls(kind, max_order, tuple(p), tuple(q))
        if kind in ("cosh_K_acos", "cos_K_acosh"):
            sig = 1 if kind == "cosh_K_acos" else -1
            w = [sig, 0, -sig]
            gc = [None, {}]
            gs = [None, {(1, 0): -1}]
            for n in range(1, max_order):
                c, s = gc[n], gs[n]
                gc.append(
                    _badd(
                        _bmul_xpoly(_bdiff_x(c), w),
                        _bmul_xpoly(c, [0, sig * (2 * n - 2)]),
                        _bshift_k(s, -sig),
                    )
                )
                gs.append(
                    _badd(
                        _bshift_k(_bmul_xpoly(c, w), -1),
                        _bmul_xpoly(_bdiff_x(s), w),
                        _bmul_xpoly(s, [0, sig * (2 * n - 1)]),
                    )
                )
            return cls(kind, max_order, tuple(gc), tuple(gs))
        raise ValueError(f"unknown recurrence kind {kind!r}")

    def evaluate(self, n: int, x, K: float = 1.0):
        """n-th derivative by the recurrence representation (n >= 1)."""
        if not 1 <= n <= self.max_order:
            raise ValueError(f"order {n} outside 1..{self.max_order}")
        x = np.asarray(x, dtype=float)
        if self.kind in ("acos", "acosh"):
            return _eval_acos_family(self.kind, self.p[n], self.q[n], n, x)
        return _eval_trig_family(self.kind, self.p[n], self.q[n], n, x, K)


def _polyval(coefs: list[int], x):
    return np.polyval([float(c) for c in coefs[::-1]], x)


def _eval_acos_family(kind, pn, qn, n, x):
    if kind == "acos":
        u = 1.0 - x * x
        s = np.sqrt(u)
        a = np.arccos(x)
        return (_polyval(pn, x) * s + _polyval(qn, x) * a) / u ** (n - 0.5)
    # x >= 1: evaluate in powers of 1/x so that large x neither overflows
    # nor loses the x^{-n} decay
    y = 1.0 / x
    b = np.arccosh(x)
    one_m = 1.0 - y * y
    # p_n(x)/x^{2n-2} and q_n(x)/x^{2n-1} as polynomials in y
    pr = np.zeros(2 * n - 1)
    for j, c in enumerate(pn):
        if c:
            pr[2 * n - 2 - j] += c
    qr = np.zeros(2 * n)
    for j, c in enumerate(qn):
        if c:
            qr[2 * n - 1 - j] += c
    pv = np.polyval(pr[::-1], y)
    qv = np.polyval(qr[::-1], y)
    return pv / one_m ** (n - 1) + qv * b / one_m ** (n - 0.5)


def _beval(p: dict, K, x):
    out = 0.0
    for (k, j), c in p.items():
        out = out + c * K**k * x**j
    return out


def _eval_trig_family(kind, gc, gs, n, x, K):
    if kind == "cosh_K_acos":
        u = 1.0 - x * x
        s = np.sqrt(u)
        a = np.arccos(x)
        C, S = np.cosh(K * a), np.sinh(K * a)
    else:
        u = x * x - 1.0
        s = np.sqrt(u)
        a = np.arccosh(x)
        C, S = np.cos(K * a), np.sin(K * a)
    return (_beval(gc, K, x) * s * C + _beval(gs, K, x) * S) / u ** (n - 0.5)


# ---------------------------------------------------------------------------
# Derivatives of A


def _series_terms(n_max: int) -> int:
    return n_max + _SERIES_EXTRA


def a_derivs(x=None, n_max: int = 0, *, v=None, threshold: float = DEFAULT_THRESHOLD) -> list:
    """A^{(k)} for k = 0..n_max, where A = arccos^2 (and -arccosh^2 past 1).

    Either ``x`` or ``v = x - 1`` may be supplied; passing ``v`` keeps full
    relative precision for arguments very close to 1.
    """
    if v is None:
        if x is None:
            raise TypeError("need x or v")
        xa = np.asarray(x, dtype=float)
        v = xa - 1.0
    else:
        v = np.asarray(v, dtype=float)
        xa = 1.0 + v
    scalar = v.ndim == 0
    v = np.atleast_1d(v)
    xa = np.atleast_1d(xa)
    if not 0 < threshold <= 0.5:
        raise ValueError("threshold must lie in (0, 0.5]")
    if np.any(v < -2.0):
        raise DomainError("A(x) is evaluated for x >= -1 only")
    out = [_a_from_v(v)]
    near = np.abs(v) <= threshold
    lo = (~near) & (v < 0)
    mid = (~near) & (v > 0) & (v <= _MILLER_VMAX)
    hi = (~near) & (v > _MILLER_VMAX)
    nt = _series_terms(n_max)
    rec_lo = RecurrencePolys.build("acos", max(n_max, 1)) if lo.any() else None
    rec_hi = RecurrencePolys.build("acosh", max(n_max, 1)) if hi.any() else None
    with np.errstate(divide="ignore", invalid="ignore"):
        miller = _miller_b_derivs(xa[mid], n_max) if mid.any() and n_max else None
        for k in range(1, n_max + 1):
            vals = np.empty_like(v)
            if near.any():
                vals[near] = np.polyval(_series_deriv_coeffs(k, nt), v[near])
            if lo.any():
                vals[lo] = rec_lo.evaluate(k, xa[lo])
            if miller is not None:
                vals[mid] = -miller[k]
            if hi.any():
                vals[hi] = -rec_hi.evaluate(k, xa[hi])
            out.append(vals)
    if scalar:
        return [float(o[0]) for o in out]
    return out


_MILLER_VMAX = 3.0


def _miller_b_derivs(x: np.ndarray, n_max: int) -> list:
    # Derivatives of B = arccosh^2 from the differentiated ODE
    #   (x^2-1) B^(n+2) + (2n+1) x B^(n+1) + n^2 B^(n) = 0,   n >= 1,
    # run backwards (B^(n)/n! is the minimal solution, decaying like
    # (x+1)^-n against (x-1)^-n) and normalised by B'.
    u = x * x - 1.0
    ratio = np.min((x + 1.0) / (x - 1.0))
    n_top = n_max + 4 + int(np.ceil(40.0 / np.log10(ratio)))
    g_next = np.zeros_like(x)
    g = np.full_like(x, 1e-200)
    seq = {n_top: g}
    for n in range(n_top - 2, 0, -1):
        # g_n from g_{n+1} (current) and g_{n+2} (next)
        g_new = -(u * (n + 2) * (n + 1) * g_next + (2 * n + 1) * (n + 1) * x * g) / (n * n)
        g_next, g = g, g_new
        big = np.abs(g) > 1e200
        if big.any():
            for key in seq:
                seq[key] = np.where(big, seq[key] * 1e-200, seq[key])
            g_next = np.where(big, g_next * 1e-200, g_next)
            g = np.where(big, g * 1e-200, g)
        if n <= n_max + 1:
            seq[n + 1] = g_next
            seq[n] = g
    b = np.arccosh(x)
    scale = (2.0 * b / np.sqrt(u)) / seq[1]
    return [None] + [seq[n] * scale * factorial(n) for n in range(1, n_max + 1)]


def acos_sq_derivs(x, n_max: int, threshold: float = DEFAULT_THRESHOLD) -> list:
    """d^k/dx^k arccos^2 x for k = 0..n_max on [-1, 1]."""
    xa = np.asarray(x, dtype=float)
    if np.any(np.abs(xa) > 1.0):
        raise DomainError("arccos^2 needs |x| <= 1")
    return a_derivs(xa, n_max, threshold=threshold)


def acosh_sq_derivs(x, n_max: int, threshold: float = DEFAULT_THRESHOLD) -> list:
    """d^k/dx^k arccosh^2 x for k = 0..n_max on [1, inf)."""
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 1.0):
        raise DomainError("arccosh^2 needs x >= 1")
    vals = a_derivs(xa, n_max, threshold=threshold)
    return [-d for d in vals]


# ---------------------------------------------------------------------------
# S_m(w) = d^m/dw^m sinh(sqrt w)/sqrt w, exponentially scaled

_SMALL_W = 1.0
_SERIES_J = 40


@lru_cache(maxsize=None)
def _sinhc_series(m: int) -> np.ndarray:
    # S_m(w) = sum_j w^j (j+m)! / (j! (2j+2m+1)!), highest degree first
    c = [factorial(j + m) / (factorial(j) * factorial(2 * j + 2 * m + 1)) for j in range(_SERIES_J)]
    return np.array(c[::-1])


def sinhc_derivs(w, m_max: int) -> tuple[np.ndarray, np.ndarray]:
    """Scaled derivatives of sinh(sqrt w)/sqrt w.

    Returns ``(vals, scale)`` with ``vals`` of shape (m_max+1, *w.shape) so
    that S_m(w) = vals[m] * exp(scale); ``scale`` is sqrt(w) for w > 0 and 0
    otherwise.  For w = -y^2 the function is sin(y)/y.
    """
    w = np.asarray(w, dtype=float)
    shape = w.shape
    w = np.atleast_1d(w).ravel()
    scale = np.sqrt(np.maximum(w, 0.0))
    vals = np.empty((m_max + 1, w.size))
    small = np.abs(w) <= _SMALL_W
    pos = (~small) & (w > 0)
    neg = (~small) & (w < 0)
    for m in range(m_max + 1):
        if small.any():
            vals[m, small] = np.polyval(_sinhc_series(m), w[small]) * np.exp(-scale[small])
        if pos.any():
            z = scale[pos]
            i_scaled = np.sqrt(pi / (2.0 * z)) * ive(m + 0.5, z)
            vals[m, pos] = i_scaled / (2.0 * z) ** m
        if neg.any():
            y = np.sqrt(-w[neg])
            vals[m, neg] = spherical_jn(m, y) / (2.0 * y) ** m
    return vals.reshape((m_max + 1,) + shape), scale.reshape(shape)


def phi_derivs(kind: str, K: float, A, m_max: int) -> tuple[np.ndarray, np.ndarray]:
    """Scaled derivatives in A of cosh(K sqrt A) ("c") or sinh(K sqrt A)/sqrt A ("s").

    Returns ``(vals, scale)`` with d^m/dA^m Phi = vals[m] * exp(scale).
    """
    A = np.asarray(A, dtype=float)
    w = K * K * A
    if kind == "c":
        S, scale = sinhc_derivs(w, max(m_max - 1, 0))
        vals = np.empty((m_max + 1,) + A.shape)
        pos = w > 0
        z = scale
        with np.errstate(invalid="ignore"):
            c0 = np.where(pos, 0.5 * (1.0 + np.exp(-2.0 * z)), np.cos(np.sqrt(np.maximum(-w, 0.0))))
        vals[0] = c0
        for m in range(1, m_max + 1):
            vals[m] = 0.5 * K ** (2 * m) * S[m - 1]
        return vals, scale
    if kind == "s":
        S, scale = sinhc_derivs(w, m_max)
        vals = np.empty_like(S)
        for m in range(m_max + 1):
            vals[m] = K ** (2 * m + 1) * S[m]
        return vals, scale
    raise ValueError(f"unknown phi kind {kind!r}")


# ---------------------------------------------------------------------------
# Derivative families

_FAMILIES = {
    "acos_sq": ("acos", None),
    "acosh_sq": ("acosh", None),
    "cosh_K_acos": ("acos", "c"),
    "cos_K_acosh": ("acosh", "c"),
    "sinhc_K_acos": ("acos", "s"),
    "sinc_K_acosh": ("acosh", "s"),
}


@dataclass(frozen=True)
class DerivFamily:
    """One of the six derivative families.

    ``near_one_threshold`` is the half-width in |x - 1| of the window where
    the Taylor series of A replaces the recurrence; ``series_order`` is the
    number of series terms (None picks max_order + 70).
    """

    kind: str
    K: float | None = None
    max_order: int = 16
    near_one_threshold: float = DEFAULT_THRESHOLD
    series_order: int | None = None

    def __post_init__(self):
        if self.kind not in _FAMILIES:
            raise ValueError(f"unknown family {self.kind!r}")
        if _FAMILIES[self.kind][1] is not None:
            if self.K is None or not self.K > 0:
                raise DomainError("K must be positive")
        if not 0 < self.near_one_threshold <= 0.5:
            raise ValueError("near_one_threshold must lie in (0, 0.5]")
        if self.series_order is not None and self.series_order < self.max_order + 4:
            raise ValueError("series_order must be >= max_order + 4")

    @property
    def side(self) -> str:
        return _FAMILIES[self.kind][0]

    def check_domain(self, x) -> None:
        xa = np.asarray(x, dtype=float)
        if self.side == "acos" and np.any((xa < -1.0) | (xa > 1.0)):
            raise DomainError(f"{self.kind} needs x in [-1, 1]")
        if self.side == "acosh" and np.any(xa < 1.0):
            raise DomainError(f"{self.kind} needs x >= 1")


def trig_hyp_derivs(family: DerivFamily, x, n_max: int | None = None, *, debug: bool = False) -> list:
    """Derivatives 0..n_max of the family's function at x.

    With ``debug=True`` each value is compared with the frozen lemma bound
    and a RuntimeWarning is emitted for any excess.
    """
    n = family.max_order if n_max is None else n_max
    if n > family.max_order:
        raise ValueError(f"order {n} exceeds max_order {family.max_order}")
    family.check_domain(x)
    side, phi = _FAMILIES[family.kind]
    A = a_derivs(x, n, threshold=family.near_one_threshold)
    sign = -1.0 if side == "acosh" else 1.0
    if phi is None:
        return [sign * d for d in A]
    vals, scale = phi_derivs(phi, family.K, A[0], n)
    outer = [vals[m] * np.exp(scale) for m in range(n + 1)]
    out = composite_derivs(outer, A[1:], n)
    if np.ndim(x) == 0:
        out = [float(np.asarray(o)) for o in out]
    if debug:
        _debug_bounds(family, x, out)
    return out


def trig_hyp_derivs_recurrence(family: DerivFamily, x, n_max: int) -> list:
    """Same values by the N_n recurrences (cosh/cos kinds, away from x = 1)."""
    if family.kind not in ("cosh_K_acos", "cos_K_acosh"):
        raise ValueError("recurrence route exists for cosh_K_acos and cos_K_acosh only")
    family.check_domain(x)
    rec = RecurrencePolys.build(family.kind, max(n_max, 1))
    xa = np.asarray(x, dtype=float)
    if family.kind == "cosh_K_acos":
        f0 = np.cosh(family.K * np.arccos(xa))
    else:
        f0 = np.cos(family.K * np.arccosh(xa))
    return [f0] + [rec.evaluate(k, xa, family.K) for k in range(1, n_max + 1)]


# ---------------------------------------------------------------------------
# Closed-form endpoint limits


def acos_sq_limit(n: int) -> Fraction:
    """Signed value of d^n/dx^n arccos^2 x at x = 1."""
    if n == 0:
        return Fraction(0)
    dfact = 1
    for j in range(1, 2 * n, 2):
        dfact *= j
    return (-1) ** n * Fraction(2 * factorial(n - 1) ** 2, dfact)


def cos_acosh_limit(n: int, K: float) -> float:
    """Signed limit x -> 1+ of d^n/dx^n cos(K arccosh x)."""
    dfact = 1
    for j in range(1, 2 * n, 2):
        dfact *= j
    prod = 1.0
    for m in range(n):
        prod *= K * K + m * m
    return (-1) ** n * prod / dfact


# ---------------------------------------------------------------------------
# Bounds with calibrated constants.  C_n (n = 0..6) are twice the sup of
# |f^(n)| / shape over x in (0, 1) (arccos kinds) or (1, cosh(pi/2))
# (sinc kind), K in {1, 5, 20}, rounded up to two significant digits.
# Recomputed by subrk.harness.calibrate_lemma_constants; frozen here.

LEMMA_BOUND_CONSTANTS = {
    "cosh_K_acos": (1.1, 1.0, 1.1, 2.0, 5.3, 20.0, 89.0),
    "sinhc_K_acos": (0.61, 0.28, 0.26, 0.45, 1.2, 4.4, 20.0),
    "sinc_K_acosh": (0.42, 0.14, 0.074, 0.069, 0.095, 0.18, 0.41),
}


def lemma_bound(kind: str, n: int, K: float) -> float:
    """Right-hand side of the lemma estimate for order n."""
    if kind == "cosh_K_acos":
        return LEMMA_BOUND_CONSTANTS[kind][n] * K**n * np.exp(K * pi / 2)
    if kind == "sinhc_K_acos":
        return LEMMA_BOUND_CONSTANTS[kind][n] * K ** (n + 1) * np.exp(K * pi / 2)
    if kind == "sinc_K_acosh":
        return LEMMA_BOUND_CONSTANTS[kind][n] * K ** (2 * n + 1) * np.exp(K * pi / 2)
    if kind == "cos_K_acosh":
        return abs(cos_acosh_limit(n, K)) if n else 1.0
    raise ValueError(f"no bound for {kind!r}")


def _debug_bounds(family, x, vals):
    import warnings

    consts = LEMMA_BOUND_CONSTANTS.get(family.kind)
    for n, v in enumerate(vals):
        if consts is not None and n >= len(consts):
            break
        bound = lemma_bound(family.kind, n, family.K)
        if np.any(np.abs(v) > bound * (1 + 1e-9)):
            warnings.warn(
                f"{family.kind} order {n} exceeds its bound at x={x}", RuntimeWarning, stacklevel=3
            )


# ---------------------------------------------------------------------------
# Fused exponent


def fused_exponent(rho, lam, t):
    """-(A(cos rho cosh lam) + lam^2) / (4t), computed without cancellation.

    Also returns v = cos(rho) cosh(lam) - 1.  On the hyperbolic side
    A = -b^2 with b = arccosh(x) and the difference lam^2 - b^2 is formed as
    (lam - b)(lam + b), where lam - b is obtained from an asinh identity.
    """
    rho = np.asarray(rho, dtype=float)
    lam = np.abs(np.asarray(lam, dtype=float))
    s2 = np.sin(rho / 2.0) ** 2
    ch = np.cosh(lam)
    v = 2.0 * np.sinh(lam / 2.0) ** 2 - 2.0 * s2 * ch
    v, lam, s2, ch = np.broadcast_arrays(v, lam, s2, ch)
    E = np.empty(v.shape)
    hyp = v > 0
    if hyp.any():
        vh = v[hyp]
        b = np.log1p(vh + np.sqrt(vh * (vh + 2.0)))
        lh = lam[hyp]
        # cosh(lam) - cosh(b) = 2 sinh((lam+b)/2) sinh((lam-b)/2) = 2 s2 cosh(lam)
        half = np.arcsinh(s2[hyp] * ch[hyp] / np.sinh((lh + b) / 2.0))
        E[hyp] = -(2.0 * half) * (lh + b) / (4.0 * t)
    trig = ~hyp
    if trig.any():
        vt = v[trig]
        a = 2.0 * np.arcsin(np.sqrt(np.minimum(-vt / 2.0, 1.0)))
        E[trig] = -(a * a + lam[trig] ** 2) / (4.0 * t)
    return E, v


def combined_exponent(t: float, r: float, lam: float) -> float:
    """(arccosh^2(cos(sqrt t r) cosh lam) - lam^2) / (4t) at a scaled radius.

    Requires cos(sqrt(t) r) cosh(lam) >= 1.
    """
    if t <= 0:
        raise DomainError("t must be positive")
    rho = np.sqrt(t) * r
    E, v = fused_exponent(rho, lam, t)
    if np.any(v < 0):
        raise DomainError("cos(sqrt(t) r) cosh(lam) < 1; use the trigonometric branch")
    return float(E) if np.ndim(E) == 0 else E
