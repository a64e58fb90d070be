"""Small-time convergence experiments, lemma checks and property checks.

Reports are plain dataclasses with CSV/JSON writers.  Floats are written
with ``repr`` (shortest round-trip form) and nothing time- or
machine-dependent goes into a report, so equal inputs give identical files.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from math import pi, sqrt
from typing import Sequence

import numpy as np

from .errors import DomainError, NumericalError
from .faa_di_bruno import composite_derivs
from .heisenberg import HeisenbergParams, h_derivs_block, h_kernel
from .lie_words import Letter, LieWord, beta_map, word_degree
from .operator_algebra import (
    ComplexPoint,
    CylPoint,
    heisenberg_cylindrical_frame,
    heisenberg_frames,
    hermite,
    sphere_frames,
    sphere_scaled_frames,
    su2_frame,
    su2_scaled_frame,
)
from .oracles import mixed_derivative
from .riemannian import q_su2, q_su2_parts, remainder_derivs
from .special_functions import (
    LEMMA_BOUND_CONSTANTS,
    DerivFamily,
    a_derivs,
    acos_sq_limit,
    cos_acosh_limit,
    lemma_bound,
    trig_hyp_derivs,
)
from .subelliptic import QuadratureConfig, SubellipticPoint, p_block, p_profile, p_sphere, p_su2
from . import symbolic as sy

__all__ = [
    "SCHEMA_VERSION",
    "ConvergenceReport",
    "CheckEntry",
    "SuiteReport",
    "default_t_grid",
    "converge_su2",
    "converge_sphere",
    "zero_order_su2",
    "zero_order_sphere",
    "lemma_suite",
    "LemmaGrid",
    "calibrate_lemma_constants",
    "property_suite",
    "su2_normalization",
    "format_number",
]

SCHEMA_VERSION = 1
DEGENERATE_FLOOR = 1e-6
DEGENERATE_TARGET = 1e-10
REL_TOL_FINAL = 0.05
ABS_TOL_DEGENERATE = 1e-3
CROSS_TOL = 1e-3


def format_number(x) -> str:
    """Shortest round-trip text; complex values only when the imaginary part is nonzero."""
    if x is None:
        return ""
    c = complex(x)
    if c.imag == 0:
        return repr(float(c.real))
    return repr(c)


def _json_number(x):
    if x is None:
        return None
    c = complex(x)
    if not (np.isfinite(c.real) and np.isfinite(c.imag)):
        return None
    if c.imag == 0:
        return float(c.real)
    return {"re": float(c.real), "im": float(c.imag)}


# ---------------------------------------------------------------------------
# convergence experiments


@dataclass
class ConvergenceReport:
    space: str
    word: str
    d: int
    point: tuple
    t_grid: list
    scaled_values: list
    target: complex
    abs_err: list
    rel_err: list
    degenerate: bool
    slope: float | None
    monotone: bool
    final_error: float
    passed: bool
    cross_check: list | None = None
    cross_check_max: float | None = None

    @property
    def errors(self) -> list:
        """The error sequence the acceptance rule is applied to."""
        if self.degenerate:
            return [max(e, DEGENERATE_FLOOR) for e in self.abs_err]
        return list(self.rel_err)

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "kind": "convergence",
            "space": self.space,
            "word": self.word,
            "d": self.d,
            "point": [_json_number(x) for x in self.point],
            "t_grid": [float(t) for t in self.t_grid],
            "scaled_values": [_json_number(v) for v in self.scaled_values],
            "target": _json_number(self.target),
            "abs_err": [float(e) for e in self.abs_err],
            "rel_err": [_json_number(e) for e in self.rel_err],
            "degenerate": self.degenerate,
            "slope": _json_number(self.slope),
            "monotone": self.monotone,
            "final_error": float(self.final_error),
            "passed": self.passed,
            "cross_check": None if self.cross_check is None else [_json_number(v) for v in self.cross_check],
            "cross_check_max": _json_number(self.cross_check_max),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, allow_nan=False)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "scaled_value", "target", "abs_err", "rel_err"])
        for t, v, ea, er in zip(self.t_grid, self.scaled_values, self.abs_err, self.rel_err):
            w.writerow([format_number(t), format_number(v), format_number(self.target), format_number(ea), format_number(er)])
        return buf.getvalue()


def default_t_grid(radius: float = 0.0, n: int = 8, t_max: float = 0.2, t_min: float = 1e-3) -> list:
    """Geometric grid from t_max down to t_min, dropping t with sqrt(t) * radius >= pi/4."""
    grid = [float(t) for t in np.geomspace(t_max, t_min, n)]
    return [t for t in grid if sqrt(t) * radius < pi / 4]


def _fit_slope(ts, errs) -> float | None:
    pairs = [(t, e) for t, e in zip(ts, errs) if e > 0 and np.isfinite(e)]
    if len(pairs) < 2:
        return None
    lt = np.log([p[0] for p in pairs])
    le = np.log([p[1] for p in pairs])
    return float(np.polyfit(lt, le, 1)[0])


def _judge(errs: list, degenerate: bool) -> tuple[bool, float, bool]:
    tail = errs[-4:]
    if degenerate:
        floored = [max(e, DEGENERATE_FLOOR) for e in tail]
        monotone = all(b < a or b == DEGENERATE_FLOOR for a, b in zip(floored, floored[1:]))
        final = errs[-1]
        return monotone, final, monotone and final < ABS_TOL_DEGENERATE
    monotone = all(b < a for a, b in zip(tail, tail[1:]))
    final = errs[-1]
    return monotone, final, monotone and final < REL_TOL_FINAL


def _with_t(exc: Exception, t: float) -> Exception:
    err = type(exc)(f"at t={t!r}: {exc}")
    err.t = t
    return err


def _build_report(space, word_text, d, point_tuple, ts, vals, target, cross=None) -> ConvergenceReport:
    degenerate = abs(target) < DEGENERATE_TARGET
    abs_err = [float(abs(v - target)) for v in vals]
    rel_err = [float("nan") if degenerate else e / abs(target) for e in abs_err]
    errs = [max(e, DEGENERATE_FLOOR) for e in abs_err] if degenerate else rel_err
    if len(ts) < 4:
        raise DomainError("the t-grid needs at least 4 points")
    monotone, final, passed = _judge(errs, degenerate)
    cross_max = None
    if cross is not None:
        cross_max = float(max(abs(c - v) for c, v in zip(cross, vals)))
        passed = passed and cross_max <= CROSS_TOL
    return ConvergenceReport(
        space=space,
        word=word_text,
        d=d,
        point=point_tuple,
        t_grid=list(ts),
        scaled_values=vals,
        target=target,
        abs_err=abs_err,
        rel_err=rel_err,
        degenerate=degenerate,
        slope=_fit_slope(ts, errs),
        monotone=monotone,
        final_error=float(final),
        passed=passed,
        cross_check=cross,
        cross_check_max=cross_max,
    )


def _check_grid(ts) -> list:
    ts = [float(t) for t in ts]
    if any(not t > 0 for t in ts):
        raise DomainError("grid times must be positive")
    if any(b >= a for a, b in zip(ts, ts[1:])):
        raise DomainError("the t-grid must be strictly decreasing")
    return ts


def converge_su2(
    word: LieWord,
    point: CylPoint,
    t_grid: Sequence[float] | None = None,
    cfg: QuadratureConfig | None = None,
) -> ConvergenceReport:
    """t^{|xi|/2} K_xi(t, (sqrt(t) r, theta, t z)) against H_{beta(xi)}(1, (r, theta, z))."""
    if word.space != "su2":
        raise DomainError("converge_su2 needs an su2 word")
    if not (0 <= point.r <= 3 and abs(point.z) <= 3):
        raise DomainError("point must lie in r in [0, 3], z in [-3, 3]")
    if word.degree > 6:
        raise DomainError("word degree is capped at 6")
    ts = _check_grid(default_t_grid(point.r) if t_grid is None else t_grid)
    if not word.letters:
        rep = zero_order_su2(point.r, point.z, ts, cfg)
        rep.point = (point.r, point.theta, point.z)
        return rep
    hw = beta_map(word)
    assert word_degree(hw) == word.degree
    target = hermite("heisenberg", hw, 1.0, point)
    vals = []
    for t in ts:
        try:
            vals.append(hermite("su2", word, t, point, cfg, scaled=True))
        except (DomainError, NumericalError) as exc:
            raise _with_t(exc, t) from exc
    return _build_report("su2", str(word), 1, (point.r, point.theta, point.z), ts, vals, target)


def _sphere_to_heisenberg(word: LieWord) -> LieWord:
    letters = tuple(Letter("Z", 0) if x.index == 0 else Letter("W", x.index) for x in word.letters)
    return LieWord("heisenberg", letters, word.d)


def _su2_cross_value(word: LieWord, point: ComplexPoint, t: float, cfg) -> complex | None:
    # d = 1: the sphere field T_1 acting on a radial kernel equals
    # (cos r / 2) e^{-i(z + phi)} e^{i(2z - theta)} (X + iY) on SU(2), and T_0 = Z
    w = point.w[0]
    rs = float(np.arctan(sqrt(t) * abs(w)))
    zs = t * point.z
    theta = 0.0
    P = CylPoint(rs, theta, zs)
    if [x.index for x in word.letters] == [0]:
        return t * hermite("su2", LieWord("su2", (Letter("Z"),)), t, P, cfg)
    if [x.index for x in word.letters] == [1]:
        kx = hermite("su2", LieWord("su2", (Letter("X"),)), t, P, cfg)
        ky = hermite("su2", LieWord("su2", (Letter("Y"),)), t, P, cfg)
        phi = float(np.angle(w))
        phase = np.exp(-1j * (zs + phi)) * np.exp(1j * (2 * zs - theta))
        return complex(sqrt(t) * np.cos(rs) / 2 * phase * (kx + 1j * ky))
    return None


def converge_sphere(
    d: int,
    word: LieWord,
    point: ComplexPoint,
    t_grid: Sequence[float] | None = None,
    cfg: QuadratureConfig | None = None,
) -> ConvergenceReport:
    """t^{|k|/2} (T_k p_{t,d})/p_{t,d} at (sqrt(t) w, t z) against (Z_k h_{1,d})/h_{1,d} at (w, z).

    For d = 1 and one-letter words the values are also rebuilt from SU(2)
    Hermite functions (a separate frame and kernel path) and compared.
    """
    if word.space != "sphere" or word.d != d:
        raise DomainError(f"converge_sphere needs a sphere word with d={d}")
    if len(point.w) != d:
        raise DomainError(f"point needs {d} w-coordinates")
    if word.degree > 6:
        raise DomainError("word degree is capped at 6")
    ts = _check_grid(default_t_grid(point.rho) if t_grid is None else t_grid)
    if not word.letters:
        return zero_order_sphere(d, point, ts, cfg)
    hw = _sphere_to_heisenberg(word)
    target = hermite("heisenberg", hw, 1.0, point)
    vals, cross = [], []
    for t in ts:
        try:
            vals.append(hermite("sphere", word, t, point, cfg, scaled=True))
            if d == 1:
                cross.append(_su2_cross_value(word, point, t, cfg))
        except (DomainError, NumericalError) as exc:
            raise _with_t(exc, t) from exc
    if d != 1 or any(c is None for c in cross):
        cross = None
    return _build_report("sphere", str(word), d, tuple(point.w) + (point.z,), ts, vals, target, cross)


def zero_order_su2(
    r: float, z: float, t_grid: Sequence[float], cfg: QuadratureConfig | None = None
) -> ConvergenceReport:
    """t^2 p_t(sqrt(t) r, t z) against 2 pi^2 h_1(r, z), as relative errors of the ratio."""
    ts = _check_grid(t_grid)
    h = h_kernel(HeisenbergParams(1, 1.0), r, z)
    target = 1.0
    vals = []
    for t in ts:
        try:
            pv = p_su2(SubellipticPoint(sqrt(t) * r, t * z, t), cfg or QuadratureConfig()).value
        except (DomainError, NumericalError) as exc:
            raise _with_t(exc, t) from exc
        vals.append(t * t * pv / (2 * pi**2 * h))
    return _whole_grid(_build_report("su2", "", 1, (r, 0.0, z), ts, vals, target))


def zero_order_sphere(
    d: int, point: ComplexPoint, t_grid: Sequence[float], cfg: QuadratureConfig | None = None
) -> ConvergenceReport:
    """t^{d+1} p_{t,d}(sqrt(t) w, t z) against 2 h_{1,d}(|w|, z), as the ratio."""
    ts = _check_grid(t_grid)
    h = h_kernel(HeisenbergParams(d, 1.0), point.rho, point.z)
    vals = []
    for t in ts:
        r = float(np.arctan(sqrt(t) * point.rho))
        try:
            pv = p_sphere(SubellipticPoint(r, t * point.z, t, d), cfg or QuadratureConfig()).value
        except (DomainError, NumericalError) as exc:
            raise _with_t(exc, t) from exc
        vals.append(t ** (d + 1) * pv / (2 * h))
    return _whole_grid(_build_report("sphere", "", d, tuple(point.w) + (point.z,), ts, vals, 1.0))


def _whole_grid(rep: ConvergenceReport) -> ConvergenceReport:
    # zero-order checks demand decrease over the whole grid
    errs = rep.rel_err
    rep.monotone = all(b < a for a, b in zip(errs, errs[1:]))
    rep.passed = rep.monotone and errs[-1] < REL_TOL_FINAL
    return rep


# ---------------------------------------------------------------------------
# suites


@dataclass
class CheckEntry:
    name: str
    status: str  # "pass", "fail" or "xfail" (known discrepancy, reported not failed)
    value: float | None = None
    tolerance: float | None = None
    detail: str = ""

    @property
    def ok(self) -> bool:
        return self.status in ("pass", "xfail")

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "status": self.status,
            "value": _json_number(self.value),
            "tolerance": _json_number(self.tolerance),
            "detail": self.detail,
        }


@dataclass
class SuiteReport:
    kind: str
    entries: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(e.ok for e in self.entries)

    def add(self, name, ok: bool, value=None, tol=None, detail="", known_failure: str | None = None):
        if known_failure is not None and not ok:
            self.entries.append(CheckEntry(name, "xfail", value, tol, known_failure))
        else:
            self.entries.append(CheckEntry(name, "pass" if ok else "fail", value, tol, detail))

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "kind": self.kind,
            "passed": self.passed,
            "entries": [e.to_dict() for e in self.entries],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, allow_nan=False)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["name", "status", "value", "tolerance", "detail"])
        for e in self.entries:
            w.writerow([e.name, e.status, format_number(e.value), format_number(e.tolerance), e.detail])
        return buf.getvalue()

    def table(self) -> str:
        width = max((len(e.name) for e in self.entries), default=4)
        lines = []
        for e in self.entries:
            v = "" if e.value is None else f"{e.value:.3e}"
            tol = "" if e.tolerance is None else f"{e.tolerance:.1e}"
            lines.append(f"{e.status.upper():5s}  {e.name:<{width}s}  {v:>10s}  {tol:>8s}  {e.detail}")
        return "\n".join(lines)


@dataclass(frozen=True)
class LemmaGrid:
    """Sample grids for the lemma suite."""

    x_trig: tuple = tuple(np.concatenate([np.linspace(1e-6, 0.999, 400), 1 - np.geomspace(1e-3, 1e-12, 40)]))
    x_hyp_near: tuple = tuple(np.concatenate([1 + np.geomspace(1e-12, 1e-3, 40), np.linspace(1.001, np.cosh(pi / 2), 400)]))
    x_hyp_far: tuple = tuple(np.geomspace(np.cosh(pi / 2), 1e4, 200))
    K_bound: tuple = (1.0, 5.0, 20.0)
    K_limit: tuple = (1.0, 3.0, 10.0)
    t_rate: tuple = tuple(np.geomspace(0.9, 0.03, 14))
    t_split: float = 0.3
    limit_offset: float = 1e-12


def calibrate_lemma_constants(grid: LemmaGrid = LemmaGrid(), max_order: int = 6) -> dict:
    """Sup of |f^(n)| / shape over the grid for the three calibrated families."""
    out = {}
    for kind, xs in (
        ("cosh_K_acos", grid.x_trig),
        ("sinhc_K_acos", grid.x_trig),
        ("sinc_K_acosh", grid.x_hyp_near),
    ):
        sup = np.zeros(max_order + 1)
        xa = np.asarray(xs)
        for K in grid.K_bound:
            vals = trig_hyp_derivs(DerivFamily(kind, K), xa, max_order)
            for n in range(max_order + 1):
                shape = lemma_bound(kind, n, K) / LEMMA_BOUND_CONSTANTS[kind][n]
                sup[n] = max(sup[n], float(np.max(np.abs(vals[n]))) / shape)
        out[kind] = tuple(float(s) for s in sup)
    return out


def _rate_check(report, name, log_f, log_shape, ts, t_split, known_failure=None):
    """Calibrate C on t >= t_split, then require log|f| - log shape <= log(2C) for t < t_split.

    ``log_f(t)`` returns log|f| over the sample grid at time t.
    """
    ratios = []
    for t in ts:
        lf = np.asarray(log_f(t))
        ratios.append(float(np.max(lf)) - log_shape(t))
    ratios = np.array(ratios)
    ts = np.asarray(ts)
    cal = ratios[ts >= t_split].max()
    chk = ratios[ts < t_split].max()
    margin = float(np.exp(min(chk - cal - np.log(2.0), 700.0)))
    report.add(
        name,
        margin <= 1.0,
        margin,
        1.0,
        "max ratio at small t over 2x the calibrated constant",
        known_failure,
    )


def _safe_log_abs(a):
    a = np.abs(np.asarray(a, dtype=float))
    with np.errstate(divide="ignore"):
        return np.where(a > 0, np.log(np.where(a > 0, a, 1.0)), -np.inf)


def lemma_suite(max_order: int = 8, sample_grid: LemmaGrid | None = None) -> SuiteReport:
    """Endpoint limits, calibrated bounds and decay rates of the Riemannian building blocks."""
    g = sample_grid or LemmaGrid()
    rep = SuiteReport("lemmas")
    n_lim = min(max_order, 8)
    n_bound = min(max_order, 6)

    # endpoint limits of arccos^2 / arccosh^2
    worst = 0.0
    for side, v in (("trig", -g.limit_offset), ("hyp", g.limit_offset)):
        A = a_derivs(None, n_lim, v=np.array(v))
        for n in range(1, n_lim + 1):
            exact = abs(float(acos_sq_limit(n)))
            worst = max(worst, abs(abs(float(A[n])) - exact) / exact)
    rep.add("acos_sq_endpoint_limit", worst < 1e-8, worst, 1e-8, f"n <= {n_lim}, both sides of x = 1")

    # bounded derivatives of arccos^2 on [0, 1]
    xa = np.asarray(g.x_trig)
    A = a_derivs(xa, n_lim)
    finite = all(np.all(np.isfinite(a)) for a in A)
    sup_ratio = max(float(np.max(np.abs(A[n]))) / abs(float(acos_sq_limit(n))) for n in range(1, n_lim + 1))
    rep.add("acos_sq_bounded_derivatives", finite, sup_ratio, None, "sup |A^(n)| / |A^(n)(1)| on [0, 1)")

    # cos(K arccosh x): endpoint limit and the limit as a global bound
    worst = 0.0
    for K in g.K_limit:
        vals = trig_hyp_derivs(DerivFamily("cos_K_acosh", K), 1.0 + g.limit_offset, 5)
        for n in range(1, 6):
            exact = abs(cos_acosh_limit(n, K))
            worst = max(worst, abs(abs(vals[n]) - exact) / exact)
    rep.add("cos_K_acosh_endpoint_limit", worst < 1e-8, worst, 1e-8, "n <= 5, K in {1, 3, 10}")
    worst = 0.0
    xs = np.concatenate([np.asarray(g.x_hyp_near), np.asarray(g.x_hyp_far)])
    for K in g.K_bound:
        vals = trig_hyp_derivs(DerivFamily("cos_K_acosh", K), xs, n_bound)
        for n in range(1, n_bound + 1):
            worst = max(worst, float(np.max(np.abs(vals[n]))) / abs(cos_acosh_limit(n, K)))
    rep.add("cos_K_acosh_bounded_by_limit", worst <= 1 + 1e-9, worst, 1.0, "sup |f^(n)| / endpoint limit")

    # calibrated bounds
    for kind, xs_k in (
        ("cosh_K_acos", g.x_trig),
        ("sinhc_K_acos", g.x_trig),
        ("sinc_K_acosh", g.x_hyp_near),
    ):
        worst = 0.0
        xk = np.asarray(xs_k)
        for K in g.K_bound:
            vals = trig_hyp_derivs(DerivFamily(kind, K), xk, n_bound)
            for n in range(n_bound + 1):
                worst = max(worst, float(np.max(np.abs(vals[n]))) / lemma_bound(kind, n, K))
        rep.add(f"{kind}_bound", worst <= 1.0, worst, 1.0, "sup |f^(n)| / (C_n * shape), frozen C_n")

    # geometric tail sum_k e^{-ck/t} k^n <= C_n e^{-c/t}
    for c, label in ((pi**2, "pi2"), (pi**2 / 2, "pi2_half")):
        for n in range(0, 7):
            def log_f(t, n=n, c=c):
                k = np.arange(1, 400)
                terms = -c * (k - 1) / t + n * np.log(k)
                m = terms.max()
                return np.array([m + np.log(np.exp(terms - m).sum())])

            _rate_check(rep, f"geometric_tail_{label}_n{n}", log_f, lambda t: 0.0, g.t_rate, g.t_split)

    # remainder factor, trigonometric branch
    xr = np.asarray(g.x_trig)[::8]
    trig_note = (
        "the k = 1 term behaves like exp(-pi^2/2t) away from x = 1, "
        "so the exp(-pi^2/t) rate is not attained"
    )
    for n in range(0, 3):
        def log_R(t, n=n, xs=xr):
            return _safe_log_abs(remainder_derivs(t, xs, n)[n])

        _rate_check(
            rep,
            f"remainder_trig_rate_full_n{n}",
            log_R,
            lambda t, n=n: -pi**2 / t - (n + 1) * np.log(t),
            g.t_rate,
            g.t_split,
            known_failure=trig_note,
        )
        _rate_check(
            rep,
            f"remainder_trig_rate_half_n{n}",
            log_R,
            lambda t, n=n: -pi**2 / (2 * t) - (n + 1) * np.log(t),
            g.t_rate,
            g.t_split,
        )

    # remainder factor, hyperbolic branch
    xn = np.asarray(g.x_hyp_near)[::8]
    xf = np.asarray(g.x_hyp_far)[::4]
    for n in range(0, 3):
        _rate_check(
            rep,
            f"remainder_hyp_near_rate_n{n}",
            lambda t, n=n: _safe_log_abs(remainder_derivs(t, xn, n)[n]),
            lambda t, n=n: -pi**2 / t - (2 * n + 1) * np.log(t),
            g.t_rate,
            g.t_split,
        )
        _rate_check(
            rep,
            f"remainder_hyp_far_rate_n{n}",
            lambda t, n=n: _safe_log_abs(remainder_derivs(t, xf, n)[n]) + 0.5 * n * np.log(xf * xf - 1),
            lambda t, n=n: -pi**2 / t - n * np.log(t),
            g.t_rate,
            g.t_split,
        )

    # leading factor: Q^(n) = lead[n] e^{-A/4t}
    xq = np.asarray(g.x_trig)[::4]
    xq2 = np.concatenate([np.asarray(g.x_hyp_near)[::8], np.asarray(g.x_hyp_far)[::4]])
    for n in range(0, 4):
        def log_Q1(t, n=n):
            parts = q_su2_parts(t, xq, n, remainder=False)
            return _safe_log_abs(parts.leading[n]) - np.asarray(a_derivs(xq, 0)[0]) / (4 * t)

        _rate_check(rep, f"leading_trig_bound_n{n}", log_Q1, lambda t, n=n: -n * np.log(t), g.t_rate, g.t_split)

        def log_Q2(t, n=n):
            parts = q_su2_parts(t, xq2, n, remainder=False)
            b = np.arccosh(xq2)
            # |Q2^(n)| e^{-b^2/4t} (x^2-1)^{(n+1)/2} / b^{n+1}
            return (
                _safe_log_abs(parts.leading[n])
                + 0.5 * (n + 1) * np.log(xq2 * xq2 - 1)
                - (n + 1) * np.log(b)
            )

        _rate_check(rep, f"leading_hyp_bound_n{n}", log_Q2, lambda t, n=n: -n * np.log(t), g.t_rate, g.t_split)

    # remainder under the anisotropic scaling, hyperbolic side of the split
    def log_Rr(t, n):
        out = []
        for r in (0.5, 1.0, 1.3):
            if sqrt(t) * r >= pi / 4:
                continue
            c = np.cos(sqrt(t) * r)
            lam_star = np.arccosh(1 / c)
            lam = lam_star + np.geomspace(1e-6, 3.0, 40)
            x = c * np.cosh(lam)
            R = remainder_derivs(t, x, n)
            cos_d = [np.cos(sqrt(t) * r), -np.sin(sqrt(t) * r), -np.cos(sqrt(t) * r), np.sin(sqrt(t) * r)]
            inner = [t ** (j / 2) * np.cosh(lam) * cos_d[j % 4] for j in range(1, n + 1)]
            Rr = composite_derivs(list(R), inner, n)[n] if n else R[0]
            out.append(_safe_log_abs(Rr))
        return np.concatenate(out)

    for n in range(0, 3):
        _rate_check(
            rep,
            f"remainder_scaled_hyp_rate_n{n}",
            lambda t, n=n: log_Rr(t, n),
            lambda t, n=n: -pi**2 / t - (1.5 * n + 1) * np.log(t),
            g.t_rate,
            g.t_split,
        )
    return rep


# ---------------------------------------------------------------------------
# property suite


def _gl(n: int, a: float, b: float, panels: int):
    x, w = np.polynomial.legendre.leggauss(n)
    edges = np.linspace(a, b, panels + 1)
    xs, ws = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        xs.append(0.5 * (hi - lo) * x + 0.5 * (hi + lo))
        ws.append(0.5 * (hi - lo) * w)
    return np.concatenate(xs), np.concatenate(ws)


def su2_normalization(t: float, cfg: QuadratureConfig | None = None) -> float:
    """int p_t dmu over SU(2), Haar measure sin(2r)/(4 pi^2) dr dtheta dz.

    Composite Gauss-Legendre in r (20 nodes x 4 panels on [0, pi/2]) and z
    (20 nodes x 16 panels on [-pi, pi]); theta integrates to 2 pi.
    """
    cfg = cfg or QuadratureConfig()
    rs, wr = _gl(20, 0.0, pi / 2, 4)
    zs, wz = _gl(20, -pi, pi, 16)
    total = 0.0
    for r, w in zip(rs, wr):
        prof = p_profile(float(r), zs, t, cfg)
        total += w * np.sin(2 * r) / (2 * pi) * float(np.dot(wz, prof))
    return total


def property_suite(cfg: QuadratureConfig | None = None, *, quick: bool = False) -> SuiteReport:
    """Normalization, parity, dilation, branch continuity, derivative and frame identities."""
    cfg = cfg or QuadratureConfig()
    rep = SuiteReport("properties")

    # Heisenberg anchors
    h00 = h_kernel(HeisenbergParams(1, 1.0), 0.0, 0.0)
    rep.add("heisenberg_origin_value", abs(h00 - 1 / 32) < 1e-10, abs(h00 - 1 / 32), 1e-10, "h_1(0,0) = 1/32")
    worst = 0.0
    for d in (1, 2, 3):
        for t in (0.25, 0.5, 2.0):
            for r, z in ((0.3, 0.2), (1.0, -0.7), (2.0, 1.5)):
                lhs = h_kernel(HeisenbergParams(d, t), r, z)
                rhs = t ** (-(d + 1)) * h_kernel(HeisenbergParams(d, 1.0), r / sqrt(t), z / t)
                worst = max(worst, abs(lhs - rhs) / abs(rhs))
    rep.add("heisenberg_dilation", worst < 1e-10, worst, 1e-10, "h_t(r,z) = t^-(d+1) h_1(r/sqrt t, z/t)")

    # sphere d = 1 against SU(2)
    worst = 0.0
    for t in (0.1, 0.5, 1.0):
        # points where the folded integral is well conditioned; far out in z the
        # oscillation limits both kernels to about 1e-8 relative
        for r, z in ((0.2, 0.1), (0.8, -1.0), (1.3, 0.5)):
            pt = SubellipticPoint(r, z, t)
            a = p_sphere(pt, cfg).value
            b = p_su2(pt, cfg).value / pi**2
            worst = max(worst, abs(a - b) / abs(b))
    rep.add("sphere_d1_equals_su2_over_pi2", worst < 1e-10, worst, 1e-10, "p_{t,1} = p_t / pi^2")

    # normalization
    for t in ((0.5,) if quick else (0.1, 0.5)):
        dev = abs(su2_normalization(t, cfg) - 1.0)
        rep.add(f"su2_normalization_t{t}", dev < 1e-5, dev, 1e-5, "int p_t dmu = 1")

    # z-parity of the kernel and of K_Z
    worst = 0.0
    for t in (0.1, 0.5):
        for r, z in ((0.3, 0.4), (1.0, 2.0)):
            a = p_su2(SubellipticPoint(r, z, t), cfg).value
            b = p_su2(SubellipticPoint(r, -z, t), cfg).value
            worst = max(worst, abs(a - b) / abs(a))
    rep.add("su2_z_parity", worst < 1e-10, worst, 1e-10, "p_t(r, -z) = p_t(r, z)")
    kz = abs(hermite("su2", LieWord("su2", (Letter("Z"),)), 0.3, CylPoint(0.7, 0.4, 0.0), cfg))
    rep.add("hermite_Z_vanishes_at_z0", kz < 1e-12, kz, 1e-12, "K_Z(t, (r, theta, 0)) = 0")

    # Riemannian branch continuity across x = 1
    worst = 0.0
    for t in (0.05, 0.3, 1.0):
        for n in range(0, 5):
            lo = q_su2_parts(t, n_max=n, v=np.array(-1e-9)).total[n]
            hi = q_su2_parts(t, n_max=n, v=np.array(1e-9)).total[n]
            worst = max(worst, float(abs(lo - hi) / abs(hi)))
    rep.add("riemannian_branch_continuity", worst < 1e-6, worst, 1e-6, "q_t^(n) at 1 -/+ 1e-9")

    # analytic derivatives against Richardson differences
    tight = QuadratureConfig(rel_tol=1e-13, abs_tol=1e-300)
    pts = [(0.3, 0.7, 0.4, 1, False), (0.5, 0.4, -0.8, 1, False), (0.3, 0.7, 0.4, 2, True)]
    if not quick:
        pts += [(0.05, 0.2, 0.03, 1, False), (1.0, 1.2, 2.0, 1, False)]
    worst = 0.0
    for t, r, z, d, sph in pts:
        blk = p_block(SubellipticPoint(r, z, t, d), cfg, 3, 3, sphere=sph)

        def f(rr, zz, t=t, d=d, sph=sph):
            return p_block(SubellipticPoint(rr, zz, t, d), tight, sphere=sph).values[0, 0]

        h = 0.05 * min(1.0, sqrt(t))
        for nr in range(4):
            for nz in range(4 - nr):
                if nr + nz == 0:
                    continue
                fd = mixed_derivative(f, r, z, nr, nz, h=h, levels=4)
                worst = max(worst, abs(blk.values[nr, nz] - fd) / abs(fd))
    rep.add("subelliptic_derivatives_vs_fd", worst < 1e-6, worst, 1e-6, "n_r + n_z <= 3")
    worst = 0.0
    for t, r, z, d in ((1.0, 1.0, 0.5, 1), (0.25, 0.3, -1.0, 2), (1.0, 0.4, 0.2, 1), (0.5, 2.0, 1.5, 3), (2.0, 0.8, 0.3, 2)):
        vals, _, _ = h_derivs_block(HeisenbergParams(d, t), r, z, 3, 3)

        def f(rr, zz, t=t, d=d):
            return h_kernel(HeisenbergParams(d, t), rr, zz)

        for nr in range(4):
            for nz in range(4 - nr):
                if nr + nz == 0:
                    continue
                fd = mixed_derivative(f, r, z, nr, nz, h=0.05, levels=4)
                scale = max(abs(fd), 1e-8 * abs(vals[0, 0]))
                worst = max(worst, abs(vals[nr, nz] - fd) / scale)
    rep.add("heisenberg_derivatives_vs_fd", worst < 1e-6, worst, 1e-6, "n_r + n_z <= 3")

    # frame identities
    for name, ok in _bracket_identities():
        rep.add(name, ok, None, None, "DiffOp identity")
    gap = scaled_frame_gap(1e-4)
    rep.add("scaled_frames_limit", gap < 1e-3, gap, 1e-3, "max coefficient gap at t = 1e-4")

    # remainder negligibility at t = 0.3 on scaled points
    worst = remainder_share(0.3, cfg)
    rep.add("remainder_negligible_t0.3", worst < 1e-10, worst, 1e-10, "|R-part| / |p| for p, d_r p, d_z p")
    return rep


def _bracket_identities() -> list:
    out = []
    F = su2_frame()
    X, Y, Z = F["X"], F["Y"], F["Z"]
    out.append(("su2_bracket_XY", X.bracket(Y).equals(Z.scale(2))))
    out.append(("su2_bracket_YZ", Y.bracket(Z).equals(X.scale(2))))
    out.append(("su2_bracket_ZX", Z.bracket(X).equals(Y.scale(2))))
    S = su2_scaled_frame(None)
    out.append(("su2_scaled_bracket_XY", S["X"].bracket(S["Y"]).equals(
        S["Z"].scale(2))))
    H = heisenberg_cylindrical_frame()
    out.append(("heisenberg_cyl_bracket_XY", H["X1"].bracket(H["Y1"]).equals(H["Z0"].scale(2))))
    out.append(("heisenberg_cyl_bracket_XZ", H["X1"].bracket(H["Z0"]).is_zero()))
    out.append(("heisenberg_cyl_bracket_YZ", H["Y1"].bracket(H["Z0"]).is_zero()))
    for d in (1, 2):
        Hd = heisenberg_frames(d)
        ok = True
        for j in range(1, d + 1):
            for k in range(1, d + 1):
                ok &= Hd[f"X{j}"].bracket(Hd[f"Y{k}"]).equals(Hd["Z0"].scale(2 if j == k else 0))
                ok &= Hd[f"X{j}"].bracket(Hd[f"X{k}"]).is_zero()
                ok &= Hd[f"Y{j}"].bracket(Hd[f"Y{k}"]).is_zero()
            ok &= Hd[f"X{j}"].bracket(Hd["Z0"]).is_zero()
            ok &= Hd[f"Y{j}"].bracket(Hd["Z0"]).is_zero()
        out.append((f"heisenberg_d{d}_brackets", ok))
        ok = all(
            Hd[f"Z{j}"].equals((Hd[f"Y{j}"] - Hd[f"X{j}"].scale(1j)).scale(0.5)) for j in range(1, d + 1)
        )
        out.append((f"heisenberg_d{d}_complex_fields", ok))
        for label, Sd in (("", sphere_frames(d)), ("_scaled", sphere_scaled_frames(d, None))):
            acc = None
            for k in range(1, d + 1):
                term = Sd[f"T{k}"].scale(sy.var(f"w{k}"))
                acc = term if acc is None else acc + term
            out.append((f"sphere{label}_d{d}_T_last_is_minus_w_dot_T", Sd[f"T{d + 1}"].equals(-acc)))
    return out


def scaled_frame_gap(t: float) -> float:
    """Max coefficient gap between scaled SU(2)/sphere frames and the Heisenberg frames."""
    gap = 0.0
    S, H = su2_scaled_frame(t), heisenberg_cylindrical_frame()
    for r, th, z in ((1.0, 0.3, 0.7), (0.5, 2.0, -1.0), (2.0, 4.0, 2.5)):
        env = {"r": r, "theta": th, "z": z}
        for a, b in (("X", "X1"), ("Y", "Y1"), ("Z", "Z0")):
            cs, ch = S[a].coefficient_values(env), H[b].coefficient_values(env)
            gap = max(gap, max(abs(cs.get(k, 0) - ch.get(k, 0)) for k in set(cs) | set(ch)))
    for d in (1, 2):
        Sd, Hd = sphere_scaled_frames(d, t), heisenberg_frames(d)
        env = {"z": 0.3}
        for j in range(1, d + 1):
            env[f"w{j}"] = 0.5 + 0.3j * j
            env[f"wb{j}"] = np.conj(env[f"w{j}"])
        for j in range(1, d + 1):
            cs, ch = Sd[f"T{j}"].coefficient_values(env), Hd[f"Z{j}"].coefficient_values(env)
            gap = max(gap, max(abs(cs.get(k, 0) - ch.get(k, 0)) for k in set(cs) | set(ch)))
        cs, ch = Sd["T0"].coefficient_values(env), Hd["Z0"].coefficient_values(env)
        gap = max(gap, max(abs(cs.get(k, 0) - ch.get(k, 0)) for k in set(cs) | set(ch)))
    return float(gap)


def remainder_share(t: float, cfg: QuadratureConfig | None = None, points=None) -> float:
    """Largest |remainder contribution| / |kernel value| for p, d_r p, d_z p at scaled points."""
    cfg = cfg or QuadratureConfig()
    if points is None:
        points = [(r, z) for r in (0.5, 1.0) for z in (0.0, 0.5, 1.0)]
    worst = 0.0
    for r, z in points:
        pt = SubellipticPoint(sqrt(t) * r, t * z, t)
        full = p_block(pt, cfg, 1, 1)
        rem = p_block(pt, cfg, 1, 1, component="remainder")
        for i, m in ((0, 0), (1, 0), (0, 1)):
            if i == 0 and m == 1 and z == 0.0:
                # d_z p vanishes at z = 0; compare with the z-derivative scale
                denom = abs(full.values[0, 0]) / 1.0
            else:
                denom = abs(full.values[i, m])
            worst = max(worst, abs(rem.values[i, m]) / denom)
    return float(worst)
