"""Frames of left-invariant fields, word compilation and Hermite functions.

Charts:

* cylindrical (r, theta, z) for SU(2) and for the three-dimensional
  Heisenberg group;
* complex (w_1..w_d, wb_1..wb_d, z) for the CR spheres S^{2d+1} (inhomogeneous
  coordinates) and for H^{2d+1} with w_j = y_j + i x_j.  wb_j is treated as an
  independent Wirtinger variable and set to conj(w_j) on evaluation.

The heat kernels are radial: a function F(s, z) with s = r in cylindrical
charts and s = sum_k w_k wb_k in complex charts.  A compiled operator is
applied to a symbolic F, and the resulting s/z-jets of F are filled in from
the (r, z)-derivative blocks of the kernel evaluators.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import pi, sqrt as _sqrt

import numpy as np

from . import symbolic as sy
from .errors import DomainError, KernelUnderflowError, NumericalError
from .faa_di_bruno import composite_derivs
from .heisenberg import HeisenbergParams, h_derivs_block
from .lie_words import InvalidAlphabetError, LieWord
from .subelliptic import MAX_ORDER as P_MAX_ORDER
from .subelliptic import QuadratureConfig, SubellipticPoint, p_block
from .symbolic import Chart, DiffOp, Jet, JetSpec, const, cos, exp, power, sin, sqrt, tan, var

__all__ = [
    "FrameSet",
    "CylPoint",
    "ComplexPoint",
    "HermiteValue",
    "cylindrical_chart",
    "complex_chart",
    "su2_frame",
    "su2_scaled_frame",
    "heisenberg_cylindrical_frame",
    "heisenberg_frames",
    "sphere_frames",
    "sphere_scaled_frames",
    "compile_word",
    "apply_to_kernel",
    "hermite",
    "hermite_detail",
    "KERNEL_FLOOR",
]

KERNEL_FLOOR = 1e-300


# ---------------------------------------------------------------------------
# charts


def _cyl_sampler(rng, n):
    return {
        "r": rng.uniform(0.2, 1.3, n),
        "theta": rng.uniform(0.0, 2 * pi, n),
        "z": rng.uniform(-3.0, 3.0, n),
        "t": rng.uniform(0.05, 1.0, n),
    }


@lru_cache(maxsize=None)
def cylindrical_chart() -> Chart:
    return Chart("cylindrical", ("r", "theta", "z"), _cyl_sampler)


def _w(j):
    return f"w{j}"


def _wb(j):
    return f"wb{j}"


@lru_cache(maxsize=None)
def complex_chart(d: int) -> Chart:
    if d < 1:
        raise DomainError("d must be >= 1")

    def sampler(rng, n):
        env = {}
        for j in range(1, d + 1):
            w = rng.normal(0.0, 0.5, n) + 1j * rng.normal(0.0, 0.5, n)
            env[_w(j)] = w
            env[_wb(j)] = np.conj(w)
        env["z"] = rng.uniform(-3.0, 3.0, n)
        env["t"] = rng.uniform(0.05, 1.0, n)
        return env

    coords = tuple(_w(j) for j in range(1, d + 1)) + tuple(_wb(j) for j in range(1, d + 1)) + ("z",)
    return Chart(f"complex{d}", coords, sampler)


# ---------------------------------------------------------------------------
# frames


@dataclass(frozen=True)
class FrameSet:
    """Named first-order operators on one chart.

    ``kind`` is "su2", "su2_scaled", "heis_cyl", "heis", "sphere" or
    "sphere_scaled"; ``t`` is the substituted time for scaled frames.
    """

    space: str
    kind: str
    d: int
    chart: Chart
    fields: dict = field(compare=False, hash=False)
    t: float | None = None

    def __getitem__(self, name: str) -> DiffOp:
        return self.fields[name]

    @property
    def cache_key(self):
        return (self.kind, self.d, self.t)


def _check_t(t_value):
    if t_value is not None and not t_value > 0:
        raise DomainError("t must be positive")


def _subs_t(ops: dict, t_value):
    if t_value is None:
        return ops
    return {k: v.subs({"t": const(float(t_value))}) for k, v in ops.items()}


def _su2_symbolic(scaled: bool) -> dict:
    ch = cylindrical_chart()
    r, th, z = var("r"), var("theta"), var("z")
    if scaled:
        t = var("t")
        st = sqrt(t)
        ang = 2 * t * z - th
        tan_r = tan(st * r) / st
        inv_sin = 2 * st / sin(2 * st * r)
    else:
        ang = 2 * z - th
        tan_r = tan(r)
        inv_sin = 2 / sin(2 * r)
    X = DiffOp.first_order(ch, {"r": cos(ang), "z": tan_r * sin(ang), "theta": inv_sin * sin(ang)})
    Y = DiffOp.first_order(ch, {"r": -sin(ang), "z": tan_r * cos(ang), "theta": inv_sin * cos(ang)})
    Z = DiffOp.partial(ch, "z")
    return {"X": X, "Y": Y, "Z": Z}


@lru_cache(maxsize=None)
def su2_frame() -> FrameSet:
    """The left-invariant Pauli frame in cylindrical coordinates."""
    return FrameSet("su2", "su2", 1, cylindrical_chart(), _su2_symbolic(False))


@lru_cache(maxsize=64)
def su2_scaled_frame(t_value: float | None) -> FrameSet:
    """Frame conjugated by the anisotropic dilation (r, z) -> (sqrt(t) r, t z).

    ``t_value=None`` keeps t symbolic.
    """
    _check_t(t_value)
    ops = _subs_t(_su2_symbolic(True), t_value)
    return FrameSet("su2", "su2_scaled", 1, cylindrical_chart(), ops, t_value)


@lru_cache(maxsize=None)
def heisenberg_cylindrical_frame() -> FrameSet:
    """X_1, Y_1, Z_0 on H^3 in cylindrical coordinates (x = r cos theta, y = r sin theta)."""
    ch = cylindrical_chart()
    r, th = var("r"), var("theta")
    X = DiffOp.first_order(ch, {"r": cos(th), "z": -r * sin(th), "theta": -sin(th) / r})
    Y = DiffOp.first_order(ch, {"r": sin(th), "z": r * cos(th), "theta": cos(th) / r})
    Z = DiffOp.partial(ch, "z")
    return FrameSet("heisenberg", "heis_cyl", 1, ch, {"X1": X, "Y1": Y, "Z0": Z, "Z": Z})


@lru_cache(maxsize=None)
def heisenberg_frames(d: int) -> FrameSet:
    """Real (X_j, Y_j, Z_0) and complex (Z_j, Zb_j) frames of H^{2d+1} in the complex chart.

    x_j = (w_j - wb_j)/2i, y_j = (w_j + wb_j)/2, so d/dx_j = i(d/dw_j - d/dwb_j)
    and d/dy_j = d/dw_j + d/dwb_j.
    """
    ch = complex_chart(d)
    ops = {"Z0": DiffOp.partial(ch, "z")}
    ops["Z"] = ops["Z0"]  # the vertical letter prints as "Z"
    half_i = const(0.5j)
    for j in range(1, d + 1):
        w, wb = var(_w(j)), var(_wb(j))
        x = (w - wb) / const(2j)
        y = (w + wb) / 2
        ops[f"X{j}"] = DiffOp.first_order(ch, {_w(j): sy.I, _wb(j): -sy.I, "z": -y})
        ops[f"Y{j}"] = DiffOp.first_order(ch, {_w(j): sy.ONE, _wb(j): sy.ONE, "z": x})
        ops[f"Z{j}"] = DiffOp.first_order(ch, {_w(j): sy.ONE, "z": half_i * wb})
        ops[f"Zb{j}"] = DiffOp.first_order(ch, {_wb(j): sy.ONE, "z": -half_i * w})
    return FrameSet("heisenberg", "heis", d, ch, ops)


def _rho2(d: int):
    return sy.add(*(var(_w(j)) * var(_wb(j)) for j in range(1, d + 1)))


def _sphere_symbolic(d: int) -> dict:
    # T_j^t; the unscaled fields are the t = 1 instance
    ch = complex_chart(d)
    t, z = var("t"), var("z")
    root = sqrt(1 + t * _rho2(d))
    phase = exp(const(-1j) * t * z)
    ops = {"T0": DiffOp.partial(ch, "z")}
    for j in range(1, d + 1):
        wb = var(_wb(j))
        ops[f"T{j}"] = DiffOp.first_order(
            ch, {_w(j): root * phase, "z": -(wb * phase / root) / const(2j)}
        )
    # T_{d+1} from its own coordinate expression, not from -w.T
    coeffs = {_w(k): -root * phase * var(_w(k)) for k in range(1, d + 1)}
    coeffs["z"] = phase / const(2j) * _rho2(d) / root
    ops[f"T{d + 1}"] = DiffOp.first_order(ch, coeffs)
    return ops


@lru_cache(maxsize=None)
def sphere_frames(d: int) -> FrameSet:
    """T_0, T_1..T_d, T_{d+1} on S^{2d+1} in inhomogeneous coordinates."""
    ops = _subs_t(_sphere_symbolic(d), 1.0)
    return FrameSet("sphere", "sphere", d, complex_chart(d), ops)


@lru_cache(maxsize=64)
def sphere_scaled_frames(d: int, t_value: float | None) -> FrameSet:
    """T_j^t: the sphere frame conjugated by (w, z) -> (sqrt(t) w, t z)."""
    _check_t(t_value)
    ops = _subs_t(_sphere_symbolic(d), t_value)
    return FrameSet("sphere", "sphere_scaled", d, complex_chart(d), ops, t_value)


# ---------------------------------------------------------------------------
# words


_compiled: dict = {}


def compile_word(frames: FrameSet, word: LieWord) -> DiffOp:
    """Left-to-right composition of the letters' fields, canonicalised."""
    if word.space != frames.space:
        raise InvalidAlphabetError(f"{word.space} word applied to {frames.space} frames")
    if word.space != "su2" and word.d != frames.d:
        raise InvalidAlphabetError(f"word has d={word.d} but frames have d={frames.d}")
    key = (frames.cache_key, tuple(word.letters))
    hit = _compiled.get(key)
    if hit is not None:
        return hit
    names = [letter.name for letter in word.letters]
    for n in names:
        if n not in frames.fields:
            raise InvalidAlphabetError(f"letter {n} has no field in the {frames.kind} frame")
    if not names:
        op = DiffOp.identity(frames.chart)
    else:
        # compose from the right so each step is (first-order) o (accumulated)
        op = frames[names[-1]]
        for n in reversed(names[:-1]):
            op = frames[n].compose(op)
    _compiled[key] = op
    return op


# ---------------------------------------------------------------------------
# Hermite functions


@dataclass(frozen=True)
class CylPoint:
    r: float
    theta: float
    z: float


@dataclass(frozen=True)
class ComplexPoint:
    w: tuple
    z: float

    def __post_init__(self):
        object.__setattr__(self, "w", tuple(complex(x) for x in self.w))

    @property
    def rho(self) -> float:
        return float(np.sqrt(sum(abs(x) ** 2 for x in self.w)))


@dataclass
class HermiteValue:
    value: complex
    kernel: float
    kernel_err: float
    imag_residual: float
    n_r: int
    n_z: int


def _jet_spec(chart: Chart) -> JetSpec:
    if chart.name == "cylindrical":
        return JetSpec((("r", sy.ONE),), "z")
    d = (len(chart.coords) - 1) // 2
    grad = []
    for j in range(1, d + 1):
        grad.append((_w(j), var(_wb(j))))
        grad.append((_wb(j), var(_w(j))))
    return JetSpec(tuple(grad), "z")


def apply_to_kernel(op: DiffOp) -> sy.Expr:
    """op F for a radial kernel F(s, z), as an expression in kernel jets."""
    return op.apply(Jet(0, 0, _jet_spec(op.chart)))


def _jet_orders(e: sy.Expr) -> tuple[int, int]:
    seen = set()
    nmax = mmax = 0
    stack = [e]
    while stack:
        x = stack.pop()
        if id(x) in seen:
            continue
        seen.add(id(x))
        if isinstance(x, Jet):
            nmax, mmax = max(nmax, x.n), max(mmax, x.m)
        stack.extend(x.children)
    return nmax, mmax


@lru_cache(maxsize=None)
def _radial_map_derivs_expr(kind: str, n: int):
    # derivatives of r(s) in the variable s, symbolic in s and c
    s, c = var("s"), var("c")
    if kind == "sqrt":
        first = power(s, -0.5) / 2
    else:  # r = arctan(sqrt(c s))
        first = sqrt(c) * power(s, -0.5) / (2 * (1 + c * s))
    out = [first]
    for _ in range(n - 1):
        out.append(out[-1].diff("s"))
    return tuple(out)


def _radial_map_derivs(kind: str, s: float, c: float, n: int) -> list:
    exprs = _radial_map_derivs_expr(kind, n)
    env = {"s": s, "c": c}
    return [float(np.real(e.evaluate(env))) for e in exprs]


def _point_env(chart: Chart, point) -> dict:
    if chart.name == "cylindrical":
        if not isinstance(point, CylPoint):
            raise DomainError("cylindrical frames need a (r, theta, z) point")
        return {"r": point.r, "theta": point.theta, "z": point.z}
    if not isinstance(point, ComplexPoint):
        raise DomainError("complex frames need a (w_1..w_d, z) point")
    d = (len(chart.coords) - 1) // 2
    if len(point.w) != d:
        raise DomainError(f"point has {len(point.w)} w-coordinates, expected {d}")
    env = {"z": point.z}
    for j, w in enumerate(point.w, start=1):
        env[_w(j)] = w
        env[_wb(j)] = np.conj(w)
    return env


def _kernel_block(space, d, t, r0, z0, nr, nz, cfg):
    """(values, err, imag) of d^i/dr^i d^m/dz^m of the kernel at (r0, z0)."""
    if space == "heisenberg":
        return h_derivs_block(HeisenbergParams(d, t), r0, z0, nr, nz)
    if nr > P_MAX_ORDER or nz > P_MAX_ORDER:
        raise ValueError(f"derivative orders are capped at {P_MAX_ORDER}")
    pt = SubellipticPoint(r0, z0, t, d if space == "sphere" else 1)
    blk = p_block(pt, cfg, nr, nz, sphere=space == "sphere")
    if not blk.converged:
        raise NumericalError(f"quadrature did not converge at t={t}, r={r0}, z={z0}")
    if not blk.resolved():
        raise NumericalError(f"kernel is below the quadrature cancellation floor at t={t}, r={r0}, z={z0}")
    return blk.values, blk.err_estimate, blk.imag_residual


def _frames_for(space: str, word: LieWord, point, t: float, scaled: bool) -> FrameSet:
    if space == "su2":
        return su2_scaled_frame(t) if scaled else su2_frame()
    if space == "sphere":
        return sphere_scaled_frames(word.d, t) if scaled else sphere_frames(word.d)
    if space == "heisenberg":
        if scaled:
            raise ValueError("the Heisenberg kernel needs no rescaling")
        if isinstance(point, CylPoint):
            if word.d != 1:
                raise DomainError("cylindrical Heisenberg coordinates need d = 1")
            return heisenberg_cylindrical_frame()
        return heisenberg_frames(word.d)
    raise DomainError(f"unknown space {space!r}")


def hermite_detail(
    space: str,
    word: LieWord,
    t: float,
    point,
    cfg: QuadratureConfig | None = None,
    *,
    scaled: bool = False,
) -> HermiteValue:
    """(xi p)(point) / p(point) for the compiled word xi.

    With ``scaled=True`` the dilated frame is applied to the dilated kernel
    p_t(sqrt(t) r, t z) (resp. p_{t,d}(sqrt(t) w, t z)), which returns
    t^{|xi|/2} times the Hermite function at the dilated point.
    """
    cfg = cfg or QuadratureConfig()
    if not t > 0:
        raise DomainError("t must be positive")
    if word.space != space:
        raise InvalidAlphabetError(f"{word.space} word used with space {space}")
    frames = _frames_for(space, word, point, t, scaled)
    op = compile_word(frames, word)
    num = apply_to_kernel(op)
    n_s, n_z = _jet_orders(num)
    env = _point_env(frames.chart, point)
    d = word.d

    if frames.chart.name == "cylindrical":
        if point.r < 0:
            raise DomainError("r must be non-negative")
        r0, z0 = point.r, point.z
        if scaled:
            r0, z0 = _sqrt(t) * point.r, t * point.z
        vals, err, imag = _kernel_block(space, d, t, r0, z0, n_s, n_z, cfg)
        k00 = float(vals[0, 0])
        jets = {}
        for n in range(n_s + 1):
            for m in range(n_z + 1):
                fac = t ** (0.5 * n + m) if scaled else 1.0
                jets[(n, m)] = fac * vals[n, m]
    else:
        s = point.rho**2
        if space == "heisenberg":
            r0, z0, kind, c = _sqrt(s), point.z, "sqrt", 1.0
        else:
            c = t if scaled else 1.0
            r0 = float(np.arctan(_sqrt(c * s)))
            z0 = t * point.z if scaled else point.z
            kind = "arctan"
        vals, err, imag = _kernel_block(space, d, t, r0, z0, n_s, n_z, cfg)
        k00 = float(vals[0, 0])
        if n_s > 0 and s == 0.0:
            raise DomainError("w = 0 is a singular point of the radial chain rule")
        inner = _radial_map_derivs(kind, s, c, n_s) if n_s > 0 else []
        jets = {}
        for m in range(n_z + 1):
            zfac = t**m if (scaled and space == "sphere") else 1.0
            outer = [vals[i, m] for i in range(n_s + 1)]
            ds = composite_derivs(outer, inner, n_s) if n_s > 0 else [outer[0]]
            for n in range(n_s + 1):
                jets[(n, m)] = zfac * float(ds[n])
    if not abs(k00) > KERNEL_FLOOR:
        raise KernelUnderflowError(f"kernel value {k00!r} is below the floor {KERNEL_FLOOR}")
    value = complex(np.asarray(num.evaluate(env, jets)).reshape(-1)[0]) / k00
    if not np.isfinite(value.real) or not np.isfinite(value.imag):
        raise DomainError("operator coefficients are singular at this point")
    used_imag = float(np.max(imag[: n_s + 1, : n_z + 1]))
    used_err = float(err[0, 0])
    return HermiteValue(value, k00, used_err, used_imag, n_s, n_z)


def hermite(
    space: str,
    word: LieWord,
    t: float,
    point,
    cfg: QuadratureConfig | None = None,
    *,
    scaled: bool = False,
) -> complex:
    """Hermite function K_xi(t, point) = (xi p_t)(point) / p_t(point)."""
    return hermite_detail(space, word, t, point, cfg, scaled=scaled).value
