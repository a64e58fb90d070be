"""A small expression-tree algebra and variable-coefficient differential operators.

Expressions are immutable trees built through smart constructors that
flatten sums and products, fold constants, and merge like terms and like
factors.  Nothing else is simplified: deciding whether an expression is
zero is done numerically, by evaluating it at random sample points.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import Callable, Iterable, Mapping

import numpy as np
import zlib

__all__ = [
    "Expr",
    "Const",
    "Var",
    "Jet",
    "JetSpec",
    "const",
    "var",
    "add",
    "mul",
    "power",
    "sin",
    "cos",
    "tan",
    "exp",
    "sqrt",
    "ZERO",
    "ONE",
    "I",
    "Chart",
    "DiffOp",
    "ZERO_TOL",
]

ZERO_TOL = 1e-12


class Expr:
    """Base node.  Subclasses set ``key`` (structural identity) and ``free``."""

    __slots__ = ("key", "_hash", "free")

    def _init(self, key, free, sid):
        # sid is a process-independent hash (str hashing is salted), so
        # canonical term order and hence float summation order is reproducible
        self.key = key
        self._hash = sid
        self.free = free

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return isinstance(other, Expr) and self._hash == other._hash and self.key == other.key

    # arithmetic sugar
    def __add__(self, other):
        return add(self, _lift(other))

    __radd__ = __add__

    def __sub__(self, other):
        return add(self, mul(const(-1), _lift(other)))

    def __rsub__(self, other):
        return add(_lift(other), mul(const(-1), self))

    def __mul__(self, other):
        return mul(self, _lift(other))

    __rmul__ = __mul__

    def __neg__(self):
        return mul(const(-1), self)

    def __truediv__(self, other):
        return mul(self, power(_lift(other), -1))

    def __rtruediv__(self, other):
        return mul(_lift(other), power(self, -1))

    def __pow__(self, e):
        return power(self, e)

    def diff(self, name: str) -> "Expr":
        if name not in self.free:
            return ZERO
        return _diff_cached(self, name)

    def _diff(self, name: str) -> "Expr":  # pragma: no cover - abstract
        raise NotImplementedError

    def subs(self, mapping: Mapping[str, "Expr"]) -> "Expr":
        if not (self.free & set(mapping)):
            return self
        return self._subs(mapping)

    def evaluate(self, env: Mapping, jets: Mapping | None = None):
        """Numeric value; ``env`` maps variable names to scalars or arrays."""
        return _Evaluator(env, jets or {}).run(self)

    @property
    def is_const(self) -> bool:
        return isinstance(self, Const)

    def walk(self):
        yield self
        for c in self.children:
            yield from c.walk()

    children: tuple = ()

    def __repr__(self):
        return _fmt(self)


def _sid_str(s: str) -> int:
    return zlib.crc32(s.encode())


def _lift(x) -> Expr:
    if isinstance(x, Expr):
        return x
    return const(x)


class Const(Expr):
    __slots__ = ("value",)

    def __init__(self, value: complex):
        value = complex(value)
        self.value = value
        self._init(("c", value), frozenset(), hash((1, value.real, value.imag)))

    def _diff(self, name):
        return ZERO

    def _subs(self, mapping):
        return self


class Var(Expr):
    __slots__ = ("name",)

    def __init__(self, name: str):
        self.name = name
        self._init(("v", name), frozenset([name]), hash((2, _sid_str(name))))

    def _diff(self, name):
        return ONE if name == self.name else ZERO

    def _subs(self, mapping):
        return _lift(mapping[self.name]) if self.name in mapping else self


class Add(Expr):
    __slots__ = ("children",)

    def __init__(self, args: tuple):
        self.children = args
        self._init(
            ("+",) + tuple(a.key for a in args),
            frozenset().union(*(a.free for a in args)),
            hash((3,) + tuple(a._hash for a in args)),
        )

    def _diff(self, name):
        return add(*(a.diff(name) for a in self.children))

    def _subs(self, mapping):
        return add(*(a.subs(mapping) for a in self.children))


class Mul(Expr):
    __slots__ = ("children",)

    def __init__(self, args: tuple):
        self.children = args
        self._init(
            ("*",) + tuple(a.key for a in args),
            frozenset().union(*(a.free for a in args)),
            hash((4,) + tuple(a._hash for a in args)),
        )

    def _diff(self, name):
        parts = []
        args = self.children
        for i, a in enumerate(args):
            da = a.diff(name)
            if da is ZERO or da == ZERO:
                continue
            parts.append(mul(*(args[:i] + (da,) + args[i + 1 :])))
        return add(*parts)

    def _subs(self, mapping):
        return mul(*(a.subs(mapping) for a in self.children))


class Pow(Expr):
    __slots__ = ("children", "exponent")

    def __init__(self, base: Expr, exponent: float):
        self.children = (base,)
        self.exponent = exponent
        self._init(("^", base.key, exponent), base.free, hash((5, base._hash, exponent)))

    @property
    def base(self):
        return self.children[0]

    def _diff(self, name):
        b = self.base
        return mul(const(self.exponent), power(b, self.exponent - 1), b.diff(name))

    def _subs(self, mapping):
        return power(self.base.subs(mapping), self.exponent)


_FUNCS: dict[str, Callable] = {"sin": np.sin, "cos": np.cos, "tan": np.tan, "exp": np.exp}


class Fn(Expr):
    __slots__ = ("children", "fname")

    def __init__(self, fname: str, arg: Expr):
        self.children = (arg,)
        self.fname = fname
        self._init((fname, arg.key), arg.free, hash((6, _sid_str(fname), arg._hash)))

    def _diff(self, name):
        a = self.children[0]
        da = a.diff(name)
        if self.fname == "sin":
            outer = cos(a)
        elif self.fname == "cos":
            outer = mul(const(-1), sin(a))
        elif self.fname == "tan":
            outer = power(cos(a), -2)
        else:
            outer = self
        return mul(outer, da)

    def _subs(self, mapping):
        return _fn(self.fname, self.children[0].subs(mapping))


@dataclass(frozen=True)
class JetSpec:
    """How an unknown kernel F(s, z) depends on the chart variables.

    ``grad`` lists (variable, ds/dvariable); ``zvar`` is the variable that
    fills the second slot of F.
    """

    grad: tuple[tuple[str, Expr], ...]
    zvar: str = "z"

    @property
    def free(self) -> frozenset:
        names = {v for v, _ in self.grad} | {self.zvar}
        for _, g in self.grad:
            names |= g.free
        return frozenset(names)


class Jet(Expr):
    """d^n/ds^n d^m/dz^m F evaluated along the chart; values come from ``jets``."""

    __slots__ = ("n", "m", "spec")

    def __init__(self, n: int, m: int, spec: JetSpec):
        self.n, self.m, self.spec = n, m, spec
        gsid = tuple((_sid_str(v), g._hash) for v, g in spec.grad)
        self._init(("J", n, m, spec.grad, spec.zvar), spec.free, hash((7, n, m, gsid, _sid_str(spec.zvar))))

    def _diff(self, name):
        parts = []
        for v, g in self.spec.grad:
            if v == name:
                parts.append(mul(Jet(self.n + 1, self.m, self.spec), g))
        if name == self.spec.zvar:
            parts.append(Jet(self.n, self.m + 1, self.spec))
        return add(*parts)

    def _subs(self, mapping):
        raise ValueError("substitution into kernel jets is not supported")


_diff_cache: dict = {}


def _diff_cached(e: Expr, name: str) -> Expr:
    k = (e, name)
    hit = _diff_cache.get(k)
    if hit is None:
        hit = e._diff(name)
        if len(_diff_cache) > 200_000:
            _diff_cache.clear()
        _diff_cache[k] = hit
    return hit


# ---------------------------------------------------------------------------
# smart constructors

_const_cache: dict = {}


def const(value) -> Const:
    value = complex(value)
    c = _const_cache.get(value)
    if c is None:
        c = Const(value)
        if len(_const_cache) < 10_000:
            _const_cache[value] = c
    return c


def var(name: str) -> Var:
    return Var(name)


ZERO = const(0)
ONE = const(1)
I = const(1j)


def _split_coeff(e: Expr) -> tuple[complex, Expr]:
    if isinstance(e, Mul) and isinstance(e.children[0], Const):
        rest = e.children[1:]
        return e.children[0].value, rest[0] if len(rest) == 1 else Mul(rest)
    return 1.0 + 0j, e


def add(*args) -> Expr:
    flat: list[Expr] = []
    for a in args:
        a = _lift(a)
        if isinstance(a, Add):
            flat.extend(a.children)
        else:
            flat.append(a)
    c = 0j
    terms: dict = {}
    order: list = []
    for a in flat:
        if isinstance(a, Const):
            c += a.value
            continue
        coef, rest = _split_coeff(a)
        if rest.key in terms:
            terms[rest.key][0] += coef
        else:
            terms[rest.key] = [coef, rest]
            order.append(rest.key)
    out = []
    for k in sorted(order, key=lambda k: terms[k][1]._hash):
        coef, rest = terms[k]
        if coef == 0:
            continue
        out.append(rest if coef == 1 else _mul_raw(const(coef), rest))
    if c != 0:
        out.insert(0, const(c))
    if not out:
        return ZERO
    if len(out) == 1:
        return out[0]
    return Add(tuple(out))


def _mul_raw(c: Const, rest: Expr) -> Expr:
    if isinstance(rest, Mul):
        return Mul((c,) + rest.children)
    return Mul((c, rest))


def mul(*args) -> Expr:
    flat: list[Expr] = []
    for a in args:
        a = _lift(a)
        if isinstance(a, Mul):
            flat.extend(a.children)
        else:
            flat.append(a)
    c = 1.0 + 0j
    powers: dict = {}
    for a in flat:
        if isinstance(a, Const):
            c *= a.value
            if c == 0:
                return ZERO
            continue
        if isinstance(a, Pow):
            b, e = a.base, a.exponent
        else:
            b, e = a, 1.0
        if b.key in powers:
            powers[b.key][0] += e
        else:
            powers[b.key] = [e, b]
    factors = []
    for k in sorted(powers, key=lambda k: powers[k][1]._hash):
        e, b = powers[k]
        if e == 0:
            continue
        factors.append(b if e == 1 else Pow(b, float(e)))
    if not factors:
        return const(c)
    if c != 1:
        factors.insert(0, const(c))
    if len(factors) == 1:
        return factors[0]
    return Mul(tuple(factors))


def power(base, e) -> Expr:
    base = _lift(base)
    e = float(e)
    if e == 0:
        return ONE
    if e == 1:
        return base
    if isinstance(base, Const):
        if base.value == 0 and e < 0:
            raise ZeroDivisionError("0 to a negative power")
        return const(_cpow(base.value, e))
    if isinstance(base, Pow) and float(e).is_integer():
        return power(base.base, base.exponent * e)
    if isinstance(base, Mul) and float(e).is_integer():
        return mul(*(power(f, e) for f in base.children))
    return Pow(base, e)


def _cpow(b: complex, e: float) -> complex:
    if float(e).is_integer():
        return b ** int(e)
    if b.imag == 0 and b.real > 0:
        return complex(b.real**e)
    return complex(np.power(b, e))


def _fn(fname: str, arg) -> Expr:
    arg = _lift(arg)
    if isinstance(arg, Const):
        return const(_FUNCS[fname](arg.value))
    return Fn(fname, arg)


def sin(a) -> Expr:
    return _fn("sin", a)


def cos(a) -> Expr:
    return _fn("cos", a)


def tan(a) -> Expr:
    return _fn("tan", a)


def exp(a) -> Expr:
    return _fn("exp", a)


def sqrt(a) -> Expr:
    return power(a, 0.5)


# ---------------------------------------------------------------------------
# evaluation


class _Evaluator:
    def __init__(self, env: Mapping, jets: Mapping):
        self.env = {k: np.asarray(v, dtype=complex) for k, v in env.items()}
        self.jets = jets
        self.memo: dict = {}

    def run(self, e: Expr):
        hit = self.memo.get(id(e))
        if hit is not None:
            return hit[1]
        val = self._eval(e)
        self.memo[id(e)] = (e, val)
        return val

    def _eval(self, e: Expr):
        if isinstance(e, Const):
            return e.value
        if isinstance(e, Var):
            try:
                return self.env[e.name]
            except KeyError:
                raise KeyError(f"no value for variable {e.name!r}") from None
        if isinstance(e, Add):
            acc = 0j
            for a in e.children:
                acc = acc + self.run(a)
            return acc
        if isinstance(e, Mul):
            acc = 1.0 + 0j
            for a in e.children:
                acc = acc * self.run(a)
            return acc
        if isinstance(e, Pow):
            b = self.run(e.base)
            if float(e.exponent).is_integer():
                n = int(e.exponent)
                with np.errstate(divide="ignore", invalid="ignore"):
                    return b**n if n >= 0 else 1.0 / b ** (-n)
            with np.errstate(divide="ignore", invalid="ignore"):
                return np.power(np.asarray(b, dtype=complex), e.exponent)
        if isinstance(e, Fn):
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                return _FUNCS[e.fname](np.asarray(self.run(e.children[0]), dtype=complex))
        if isinstance(e, Jet):
            try:
                return self.jets[(e.n, e.m)]
            except KeyError:
                raise KeyError(f"kernel jet ({e.n}, {e.m}) was not supplied") from None
        raise TypeError(type(e))


# ---------------------------------------------------------------------------
# printing


def _fmt_const(v: complex) -> str:
    if v.imag == 0:
        x = v.real
        return repr(int(x)) if x.is_integer() and abs(x) < 1e15 else repr(x)
    if v.real == 0:
        return f"{v.imag!r}i"
    return f"({v.real!r}{v.imag:+}i)"


def _fmt(e: Expr) -> str:
    if isinstance(e, Const):
        return _fmt_const(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Add):
        return "(" + " + ".join(_fmt(a) for a in e.children) + ")"
    if isinstance(e, Mul):
        return "*".join(_fmt(a) for a in e.children)
    if isinstance(e, Pow):
        ex = e.exponent
        ex_s = repr(int(ex)) if float(ex).is_integer() else repr(ex)
        return f"{_fmt(e.base)}^{ex_s}"
    if isinstance(e, Fn):
        return f"{e.fname}({_fmt(e.children[0])})"
    if isinstance(e, Jet):
        return f"F[{e.n},{e.m}]"
    return object.__repr__(e)


# ---------------------------------------------------------------------------
# differential operators


@dataclass(frozen=True)
class Chart:
    """A coordinate chart: the base partials and a sampler for zero tests.

    ``sampler(rng, n)`` returns a dict of n-vectors, one per chart variable
    and per free parameter (such as ``t``).
    """

    name: str
    coords: tuple[str, ...]
    sampler: Callable = field(compare=False, repr=False)

    def sample(self, n: int = 5, seed: int = 20240917) -> dict:
        return self.sampler(np.random.default_rng(seed), n)


def _is_zero(e: Expr, chart: Chart, tol: float = ZERO_TOL) -> bool:
    if isinstance(e, Const):
        return abs(e.value) <= tol
    env = chart.sample()
    missing = e.free - set(env)
    if missing:
        raise KeyError(f"chart {chart.name} cannot sample {sorted(missing)}")
    val = np.asarray(e.evaluate(env))
    if isinstance(e, Add):
        scale = sum(np.abs(np.asarray(a.evaluate(env))) for a in e.children)
    else:
        scale = np.abs(val)
    scale = np.maximum(scale, 1.0)
    return bool(np.all(np.abs(val) <= tol * scale))


class DiffOp:
    """sum of coefficient(x) * d^alpha over the chart's base partials.

    Instances are canonical and immutable: like terms merged, terms whose
    coefficient vanishes at the chart's sample points dropped, and terms
    sorted by exponent vector.
    """

    __slots__ = ("chart", "terms")

    def __init__(self, chart: Chart, terms: Mapping | Iterable = ()):
        items = terms.items() if isinstance(terms, Mapping) else terms
        merged: dict = {}
        n = len(chart.coords)
        for alpha, c in items:
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != n or min(alpha, default=0) < 0:
                raise ValueError(f"bad exponent vector {alpha} for chart {chart.name}")
            merged[alpha] = add(merged[alpha], c) if alpha in merged else _lift(c)
        kept = tuple(sorted((a, c) for a, c in merged.items() if not _is_zero(c, chart)))
        object.__setattr__(self, "chart", chart)
        object.__setattr__(self, "terms", kept)

    def __setattr__(self, *_):
        raise AttributeError("DiffOp is immutable")

    # constructors
    @classmethod
    def identity(cls, chart: Chart) -> "DiffOp":
        return cls(chart, {(0,) * len(chart.coords): ONE})

    @classmethod
    def partial(cls, chart: Chart, name: str, coeff=ONE) -> "DiffOp":
        alpha = tuple(1 if c == name else 0 for c in chart.coords)
        if sum(alpha) != 1:
            raise KeyError(f"{name!r} is not a coordinate of {chart.name}")
        return cls(chart, {alpha: coeff})

    @classmethod
    def first_order(cls, chart: Chart, coeffs: Mapping[str, Expr]) -> "DiffOp":
        terms = []
        for name, c in coeffs.items():
            alpha = tuple(1 if x == name else 0 for x in chart.coords)
            if sum(alpha) != 1:
                raise KeyError(f"{name!r} is not a coordinate of {chart.name}")
            terms.append((alpha, c))
        return cls(chart, terms)

    # structure
    @property
    def order(self) -> int:
        return max((sum(a) for a, _ in self.terms), default=0)

    def coefficient(self, alpha) -> Expr:
        for a, c in self.terms:
            if a == tuple(alpha):
                return c
        return ZERO

    def is_zero(self) -> bool:
        return not self.terms

    def _check(self, other: "DiffOp"):
        if self.chart != other.chart:
            raise ValueError(f"operators live on different charts ({self.chart.name}, {other.chart.name})")

    def __add__(self, other: "DiffOp") -> "DiffOp":
        self._check(other)
        return DiffOp(self.chart, list(self.terms) + list(other.terms))

    def __sub__(self, other: "DiffOp") -> "DiffOp":
        return self + other.scale(const(-1))

    def __neg__(self) -> "DiffOp":
        return self.scale(const(-1))

    def scale(self, c) -> "DiffOp":
        c = _lift(c)
        return DiffOp(self.chart, [(a, mul(c, x)) for a, x in self.terms])

    def __rmul__(self, c) -> "DiffOp":
        return self.scale(c)

    def __matmul__(self, other: "DiffOp") -> "DiffOp":
        return self.compose(other)

    def compose(self, other: "DiffOp") -> "DiffOp":
        """self o other, with the product rule on other's coefficients."""
        self._check(other)
        coords = self.chart.coords
        out: list = []
        for alpha, a in self.terms:
            for beta, b in other.terms:
                for gamma in _sub_multi(alpha):
                    db = b
                    for name, g in zip(coords, gamma):
                        for _ in range(g):
                            db = db.diff(name)
                    if db == ZERO:
                        continue
                    w = 1
                    for al, g in zip(alpha, gamma):
                        w *= comb(al, g)
                    exps = tuple(al - g + be for al, g, be in zip(alpha, gamma, beta))
                    out.append((exps, mul(const(w), a, db)))
        return DiffOp(self.chart, out)

    def bracket(self, other: "DiffOp") -> "DiffOp":
        return self.compose(other) - other.compose(self)

    def equals(self, other: "DiffOp") -> bool:
        return (self - other).is_zero()

    def apply(self, f: Expr) -> Expr:
        """The function (self f) as an expression."""
        f = _lift(f)
        parts = []
        for alpha, c in self.terms:
            g = f
            for name, k in zip(self.chart.coords, alpha):
                for _ in range(k):
                    g = g.diff(name)
            parts.append(mul(c, g))
        return add(*parts)

    def subs(self, mapping: Mapping[str, Expr]) -> "DiffOp":
        """Substitute parameters (not chart coordinates) in the coefficients."""
        if set(mapping) & set(self.chart.coords):
            raise ValueError("cannot substitute chart coordinates")
        return DiffOp(self.chart, [(a, c.subs(mapping)) for a, c in self.terms])

    def coefficient_values(self, env: Mapping) -> dict:
        return {a: complex(np.asarray(c.evaluate(env)).reshape(-1)[0]) for a, c in self.terms}

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for alpha, c in self.terms:
            d = "".join(
                f"d{n}" + (f"^{k}" if k > 1 else "") for n, k in zip(self.chart.coords, alpha) if k
            )
            parts.append(f"{_fmt(c)}*{d}" if d else _fmt(c))
        return " + ".join(parts)


def _sub_multi(alpha: tuple) -> list[tuple]:
    out = [()]
    for a in alpha:
        out = [g + (k,) for g in out for k in range(a + 1)]
    return out
