"""Command-line front end: ``subrk <subcommand> ...``.

Exit codes: 0 success, 1 usage, 2 domain error, 3 numerical failure,
4 suite (or convergence) failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DomainError, NumericalError
from .harness import (
    SCHEMA_VERSION,
    converge_sphere,
    converge_su2,
    default_t_grid,
    format_number,
    lemma_suite,
    property_suite,
)
from .heisenberg import HeisenbergParams, h_derivs_block
from .lie_words import InvalidAlphabetError, parse_word
from .operator_algebra import ComplexPoint, CylPoint, hermite_detail
from .riemannian import q_sphere, q_su2_derivs
from .subelliptic import QuadratureConfig, SubellipticPoint, p_block

__all__ = ["main", "build_parser", "read_config", "UsageError"]

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_NUMERICAL, EXIT_SUITE = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# ---------------------------------------------------------------------------
# parsing


def _floats(text: str) -> list:
    return [float(x) for x in text.split(",") if x.strip()]


def _common(p: argparse.ArgumentParser, fmt_default: str) -> None:
    p.add_argument("--config", type=Path, help="key=value file; flags override its entries")
    p.add_argument("--format", choices=("json", "csv", "table"), help=f"output format (default {fmt_default})")
    p.add_argument("--output", type=Path, help="write to this path instead of stdout")
    q = p.add_argument_group("quadrature")
    q.add_argument("--rel-tol", type=float)
    q.add_argument("--abs-tol", type=float)
    q.add_argument("--max-panels", type=int)
    q.add_argument("--kmax", type=int, help="image-sum truncation of the remainder series")
    p.set_defaults(_format_default=fmt_default)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="subrk", description="Heat kernels on SU(2), CR spheres and Heisenberg groups.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    kp = sub.add_parser("kernel", help="evaluate a kernel and its derivatives")
    ksub = kp.add_subparsers(dest="family", parser_class=_Parser)
    rk = ksub.add_parser("riemannian", help="Riemannian kernel q_t(x), x = cos(distance)")
    rk.add_argument("--space", choices=("su2", "sphere"))
    rk.add_argument("--d", type=int)
    rk.add_argument("--t", type=float)
    rk.add_argument("--x", type=float)
    rk.add_argument("--n", type=int, help="highest x-derivative (default 0)")
    _common(rk, "table")
    for name, helptext in (
        ("subelliptic", "subelliptic kernel p_t(r, z) on SU(2) or p_{t,d} on the sphere"),
        ("heisenberg", "Heisenberg kernel h_{t,d}(r, z)"),
    ):
        kk = ksub.add_parser(name, help=helptext)
        if name == "subelliptic":
            kk.add_argument("--space", choices=("su2", "sphere"))
        kk.add_argument("--d", type=int)
        kk.add_argument("--t", type=float)
        kk.add_argument("--r", type=float)
        kk.add_argument("--z", type=float)
        kk.add_argument("--nr", "--dr", dest="nr", type=int, help="highest r-derivative (default 0)")
        kk.add_argument("--nz", "--dz", dest="nz", type=int, help="highest z-derivative (default 0)")
        _common(kk, "table")

    hp = sub.add_parser("hermite", help="Hermite function (xi p)/p at a point")
    hp.add_argument("--space", choices=("su2", "sphere", "heisenberg"))
    hp.add_argument("--d", type=int)
    hp.add_argument("--word", help='comma-separated letters, e.g. "X,Y" or "1,0"; "" for the empty word')
    hp.add_argument("--t", type=float)
    hp.add_argument("--point", help="r,theta,z (su2, heisenberg d=1) or w1,...,wd,z (complex w allowed)")
    hp.add_argument("--scaled", action="store_true", default=None, help="evaluate t^{|xi|/2} K_xi at the scaled point")
    _common(hp, "table")

    cp = sub.add_parser("converge", help="small-time convergence of scaled Hermite functions")
    cp.add_argument("--space", choices=("su2", "sphere"))
    cp.add_argument("--d", type=int)
    cp.add_argument("--word")
    cp.add_argument("--point")
    cp.add_argument("--t-grid", help="explicit decreasing list of t, comma-separated")
    cp.add_argument("--t-max", type=float)
    cp.add_argument("--t-min", type=float)
    cp.add_argument("--n-points", type=int)
    _common(cp, "csv")

    lp = sub.add_parser("verify-lemmas", help="limits, bounds and decay rates of the special functions")
    lp.add_argument("--max-order", type=int)
    _common(lp, "table")

    pp = sub.add_parser("verify-properties", help="normalization, parity, dilation, derivative and frame checks")
    pp.add_argument("--quick", action="store_true", default=None, help="reduced grids")
    _common(pp, "table")
    return parser


DEFAULTS = {
    "space": "su2",
    "d": None,
    "n": 0,
    "nr": 0,
    "nz": 0,
    "word": "",
    "scaled": False,
    "quick": False,
    "max_order": 8,
    "t_max": 0.2,
    "t_min": 1e-3,
    "n_points": 8,
}


def read_config(path: Path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment, keys may use dashes."""
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _leaf_parser(parser: argparse.ArgumentParser, argv: list) -> argparse.ArgumentParser:
    node = parser
    for tok in argv:
        sp = next((a for a in node._actions if isinstance(a, argparse._SubParsersAction)), None)
        if sp is None:
            break
        if tok in sp.choices:
            node = sp.choices[tok]
    return node


def _merge_config(ns: argparse.Namespace, leaf: argparse.ArgumentParser) -> None:
    if getattr(ns, "config", None) is None:
        return
    conf = read_config(ns.config)
    types = {a.dest: a for a in leaf._actions}
    for key, raw in conf.items():
        if key not in types or key in ("config", "help"):
            raise UsageError(f"unknown config key {key!r}")
        if getattr(ns, key) is not None:
            continue  # flag wins
        action = types[key]
        if isinstance(action, argparse._StoreTrueAction):
            val = raw.lower() in ("1", "true", "yes", "on")
        else:
            conv = action.type or str
            try:
                val = conv(raw)
            except (TypeError, ValueError) as exc:
                raise UsageError(f"config key {key!r}: {exc}") from exc
            if action.choices is not None and val not in action.choices:
                raise UsageError(f"config key {key!r}: {val!r} not in {sorted(action.choices)}")
        setattr(ns, key, val)


def _get(ns, key):
    val = getattr(ns, key, None)
    return DEFAULTS.get(key) if val is None else val


def _require(ns, *keys):
    for k in keys:
        if _get(ns, k) is None:
            raise UsageError(f"--{k.replace('_', '-')} is required")


def _dim(ns, space: str) -> int:
    """--d is mandatory for sphere and Heisenberg runs and meaningless for su2."""
    d = _get(ns, "d")
    if space == "su2":
        if d not in (None, 1):
            raise UsageError("--d applies to sphere and heisenberg only")
        return 1
    if d is None:
        raise UsageError(f"--d is required for space {space}")
    return d


def _cfg(ns) -> QuadratureConfig:
    over = {}
    for k in ("rel_tol", "abs_tol", "max_panels", "kmax"):
        if getattr(ns, k, None) is not None:
            over[k] = getattr(ns, k)
    return QuadratureConfig(**over)


# ---------------------------------------------------------------------------
# output


@dataclass
class Table:
    columns: list
    rows: list
    meta: dict

    def render(self, fmt: str) -> str:
        if fmt == "json":
            doc = {"schema": SCHEMA_VERSION, **self.meta, "rows": [dict(zip(self.columns, r)) for r in self.rows]}
            return json.dumps(_jsonable(doc), indent=2, allow_nan=False) + "\n"
        if fmt == "csv":
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(self.columns)
            for r in self.rows:
                w.writerow([_text(x) for x in r])
            return buf.getvalue()
        if len(self.rows) == 1 and self.columns[-1] == "value":
            return _text(self.rows[0][-1]) + "\n"
        lines = ["  ".join(self.columns)]
        lines += ["  ".join(_text(x) for x in r) for r in self.rows]
        return "\n".join(lines) + "\n"


def _text(x) -> str:
    if isinstance(x, (bool, str, int, np.integer)) and not isinstance(x, np.floating):
        return str(x)
    return format_number(x)


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (bool, str, int)) or x is None:
        return x
    if isinstance(x, np.integer):
        return int(x)
    c = complex(x)
    if not (np.isfinite(c.real) and np.isfinite(c.imag)):
        return None
    return float(c.real) if c.imag == 0 else {"re": float(c.real), "im": float(c.imag)}


def _emit(text: str, ns) -> None:
    if getattr(ns, "output", None) is not None:
        ns.output.write_text(text)
    else:
        sys.stdout.write(text)


def _fmt(ns) -> str:
    return ns.format or ns._format_default


# ---------------------------------------------------------------------------
# commands


def _parse_point(text: str, space: str, d: int | None):
    try:
        parts = [complex(x.strip().replace(" ", "")) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"bad --point {text!r}") from exc
    if space == "su2" or (space == "heisenberg" and (d or 1) == 1 and len(parts) == 3 and "j" not in text):
        if len(parts) != 3 or any(p.imag for p in parts):
            raise UsageError("--point needs real r,theta,z")
        return CylPoint(*(p.real for p in parts))
    dd = d or 1
    if len(parts) != dd + 1:
        raise UsageError(f"--point needs {dd} w-coordinates and z")
    if parts[-1].imag:
        raise UsageError("z must be real")
    return ComplexPoint(tuple(parts[:-1]), parts[-1].real)


def _cmd_kernel(ns) -> int:
    fam = ns.family
    if fam is None:
        raise UsageError("kernel needs one of: riemannian, subelliptic, heisenberg")
    _require(ns, "t")
    t = ns.t
    if fam == "riemannian":
        _require(ns, "x")
        space, n = _get(ns, "space"), _get(ns, "n")
        d = _dim(ns, space)
        if space == "sphere":
            vals = q_sphere(t, d, np.array(ns.x), n, kmax=_cfg(ns).kmax).values
        else:
            vals = q_su2_derivs(t, np.array(ns.x), n, kmax=_cfg(ns).kmax).values
        rows = [[k, float(v)] for k, v in enumerate(np.atleast_1d(vals))]
        meta = {"kind": "kernel", "family": fam, "space": space, "d": d, "t": t, "x": ns.x}
        _emit(Table(["n", "value"], rows, meta).render(_fmt(ns)), ns)
        return EXIT_OK
    _require(ns, "r", "z")
    nr, nz = _get(ns, "nr"), _get(ns, "nz")
    if fam == "heisenberg":
        d = _dim(ns, "heisenberg")
        try:
            params = HeisenbergParams(d, t)
        except ValueError as exc:
            raise DomainError(str(exc)) from exc
        vals, errs, imag = h_derivs_block(params, ns.r, ns.z, nr, nz)
        meta = {"kind": "kernel", "family": fam, "d": d, "t": t, "r": ns.r, "z": ns.z}
    else:
        space = _get(ns, "space")
        d = _dim(ns, space)
        blk = p_block(SubellipticPoint(ns.r, ns.z, t, d), _cfg(ns), nr, nz, sphere=space == "sphere")
        if not blk.converged:
            raise NumericalError("quadrature did not reach the requested tolerance")
        if not blk.resolved():
            raise NumericalError(
                f"kernel value {float(blk.values[0, 0])!r} is below the cancellation floor "
                f"(error estimate {float(blk.err_estimate[0, 0])!r})"
            )
        vals, errs, imag = blk.values, blk.err_estimate, blk.imag_residual
        meta = {"kind": "kernel", "family": fam, "space": space, "d": d, "t": t, "r": ns.r, "z": ns.z}
        meta["branch_split_lambda"] = blk.branch_split_lambda
    meta["value"] = float(vals[0, 0])
    meta["err_estimate"] = float(errs[0, 0])
    meta["imag_residual"] = float(imag[0, 0])
    rows = [
        [i, m, float(vals[i, m]), float(errs[i, m]), float(imag[i, m])] for i in range(nr + 1) for m in range(nz + 1)
    ]
    if nr == 0 and nz == 0 and _fmt(ns) == "table":
        _emit(format_number(float(vals[0, 0])) + "\n", ns)
    else:
        _emit(Table(["n_r", "n_z", "value", "err_estimate", "imag_residual"], rows, meta).render(_fmt(ns)), ns)
    return EXIT_OK


def _cmd_hermite(ns) -> int:
    _require(ns, "t", "point")
    space = _get(ns, "space")
    d = _dim(ns, space)
    word = parse_word(_get(ns, "word"), space, d)
    point = _parse_point(ns.point, space, d)
    res = hermite_detail(space, word, ns.t, point, _cfg(ns), scaled=bool(_get(ns, "scaled")))
    meta = {
        "kind": "hermite",
        "space": space,
        "d": d,
        "word": str(word),
        "t": ns.t,
        "scaled": bool(_get(ns, "scaled")),
        "kernel": res.kernel,
        "kernel_err": res.kernel_err,
        "imag_residual": res.imag_residual,
    }
    _emit(Table(["value"], [[res.value]], meta).render(_fmt(ns)), ns)
    return EXIT_OK


def _cmd_converge(ns) -> int:
    _require(ns, "point")
    space = _get(ns, "space")
    d = _dim(ns, space)
    word = parse_word(_get(ns, "word"), space, d)
    point = _parse_point(ns.point, space, d)
    if ns.t_grid is not None:
        grid = _floats(ns.t_grid)
    else:
        radius = point.r if isinstance(point, CylPoint) else point.rho
        grid = default_t_grid(radius, _get(ns, "n_points"), _get(ns, "t_max"), _get(ns, "t_min"))
    cfg = _cfg(ns)
    if space == "su2":
        rep = converge_su2(word, point, grid, cfg)
    else:
        rep = converge_sphere(d, word, point, grid, cfg)
    fmt = _fmt(ns)
    if fmt == "json":
        text = rep.to_json() + "\n"
    elif fmt == "csv":
        text = rep.to_csv()
    else:
        text = rep.to_csv().replace(",", "  ") + f"passed  {rep.passed}\n"
    _emit(text, ns)
    return EXIT_OK if rep.passed else EXIT_SUITE


def _emit_suite(rep, ns) -> int:
    fmt = _fmt(ns)
    if fmt == "json":
        text = rep.to_json() + "\n"
    elif fmt == "csv":
        text = rep.to_csv()
    else:
        text = rep.table() + f"\npassed  {rep.passed}\n"
    _emit(text, ns)
    return EXIT_OK if rep.passed else EXIT_SUITE


def _cmd_lemmas(ns) -> int:
    return _emit_suite(lemma_suite(_get(ns, "max_order")), ns)


def _cmd_properties(ns) -> int:
    return _emit_suite(property_suite(_cfg(ns), quick=bool(_get(ns, "quick"))), ns)


_COMMANDS = {
    "kernel": _cmd_kernel,
    "hermite": _cmd_hermite,
    "converge": _cmd_converge,
    "verify-lemmas": _cmd_lemmas,
    "verify-properties": _cmd_properties,
}


def main(argv: list | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        if ns.command is None:
            raise UsageError(parser.format_usage().strip())
        _merge_config(ns, _leaf_parser(parser, argv))
        return _COMMANDS[ns.command](ns)
    except (UsageError, InvalidAlphabetError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (DomainError, ValueError) as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
