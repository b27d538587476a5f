"""Command-line interface: JSON in, JSON out.

Exit codes: 0 success, 1 domain or numerical failure (including a failed
verification), 2 usage or parse failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import geometry, reduction, spectral
from .geometry import Chart, MetricParams, NumericalError, ScalarField
from .group import DomainError, JacobiPoint, SiegelPoint, act_jacobi, random_point
from .jsonio import (
    ParseError,
    dumps,
    encode_complex_matrix,
    encode_element,
    encode_point,
    encode_real_matrix,
    loads,
    parse_complex_matrix,
    parse_element,
    parse_point,
)
from .verify import SUITES, RunConfig, run_suite

CONFIG_ENV = "SIEGEL_JACOBI_CONFIG"

_FIELD_FUNCS = {
    name: getattr(np, name)
    for name in ("exp", "log", "sqrt", "sin", "cos", "tan", "sinh", "cosh", "tanh", "abs")
}
_FIELD_FUNCS["pi"] = np.pi


def _read_json(text: str):
    """A JSON literal, ``@path`` for a file, or ``-`` for standard input."""
    if text == "-":
        text = sys.stdin.read()
    elif text.startswith("@"):
        try:
            text = Path(text[1:]).read_text()
        except OSError as exc:
            raise ParseError(f"cannot read {text[1:]}: {exc}") from None
    return loads(text)


def _parse_scalar(text: str) -> complex:
    try:
        value = json.loads(text)
        if isinstance(value, list):
            return complex(value[0], value[1])
        return complex(value)
    except (ValueError, TypeError, IndexError):
        pass
    try:
        return complex(text.replace("i", "j").replace(" ", ""))
    except ValueError:
        raise ParseError(f"cannot parse {text!r} as a complex number") from None


def field_from_expression(expr: str, n: int, m: int) -> ScalarField:
    """Compile an arithmetic expression in the chart coordinates.

    Names are the chart labels (``x11``, ``y12``, ``u11``, ``v21``, ...)
    plus ``exp log sqrt sin cos tan sinh cosh tanh abs pi``.
    """
    chart = Chart(n, m)
    try:
        code = compile(expr, "<field>", "eval")
    except SyntaxError as exc:
        raise ParseError(f"bad field expression: {exc.msg}") from None
    allowed = set(chart.labels) | set(_FIELD_FUNCS)
    unknown = set(code.co_names) - allowed
    if unknown:
        raise ParseError(f"unknown names in field expression: {sorted(unknown)}")

    def fn(p):
        env = dict(zip(chart.labels, chart.vector(p)))
        return eval(code, {"__builtins__": {}, **_FIELD_FUNCS}, env)

    return ScalarField(fn, label=expr)


def load_config(args) -> RunConfig:
    path = args.config or os.environ.get(CONFIG_ENV)
    data = {}
    if path:
        try:
            data = json.loads(Path(path).read_text())
        except OSError as exc:
            raise ParseError(f"cannot read config {path}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ParseError(f"config {path} is not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ParseError("config must be a JSON object")
    for key in ("n", "m", "A", "B", "seed", "samples"):
        value = getattr(args, key, None)
        if value is not None:
            data[key] = value
    try:
        return RunConfig.from_dict(data)
    except TypeError as exc:
        raise ParseError(f"bad config: {exc}") from None


def _jacobi(p) -> JacobiPoint:
    if isinstance(p, SiegelPoint):
        raise ParseError('this command needs a point with a "W" entry')
    return p


# commands ---------------------------------------------------------------------

def cmd_act(cfg, args):
    g = parse_element(_read_json(args.element))
    p = _jacobi(parse_point(_read_json(args.point)))
    return encode_point(act_jacobi(g, p))


def cmd_metric(cfg, args):
    p = _jacobi(parse_point(_read_json(args.point)))
    g = geometry.metric_tensor(p, cfg.params)
    return {
        "labels": g.chart.labels,
        "g": encode_real_matrix(g.g),
        "volume_density": geometry.volume_density(p),
        "A": cfg.A,
        "B": cfg.B,
    }


def cmd_laplacian(cfg, args):
    p = _jacobi(parse_point(_read_json(args.point)))
    f = field_from_expression(args.field, p.n, p.m)
    value = geometry.laplacian_apply(f, p, cfg.params, cfg.fd_steps["second"])
    out = {"field": args.field, "laplacian": value, "A": cfg.A, "B": cfg.B}
    if args.beltrami:
        out["laplace_beltrami"] = geometry.laplace_beltrami_apply(f, p, cfg.params)
    return out


def cmd_curvature(cfg, args):
    if args.point:
        p = _jacobi(parse_point(_read_json(args.point)))
    else:
        p = JacobiPoint(1j * np.eye(cfg.n), np.zeros((cfg.m, cfg.n)))
    return {"point": encode_point(p), "scalar_curvature": geometry.scalar_curvature(p, cfg.params),
            "A": cfg.A, "B": cfg.B}


def cmd_reduce(cfg, args):
    p = parse_point(_read_json(args.point))
    if isinstance(p, SiegelPoint):
        r = reduction.siegel_reduce(p)
        transform = {"M": r.transform.tolist()}
    else:
        r = reduction.jacobi_reduce(p)
        transform = encode_element(r.transform)
    return {"reduced": encode_point(r.reduced), "transform": transform, "certificate": r.certificate}


def cmd_volume(cfg, args):
    n = args.degree if args.degree is not None else cfg.n
    r, e = reduction.siegel_volume_exact(n)
    return {"n": n, "value": reduction.siegel_volume(n), "exact": f"{r.numerator}/{r.denominator} * pi^{e}"}


def cmd_spectral(cfg, args):
    if args.task == "bessel":
        s, z = _parse_scalar(args.s), _parse_scalar(args.z)
        return {"s": s, "z": z, "K": spectral.bessel_k(s, z)}
    if args.task == "catalog":
        s = _parse_scalar(args.s)
        s = s if s.imag else s.real
        rng = np.random.default_rng(cfg.seed)
        points = [random_point(1, 1, rng) for _ in range(cfg.samples)]
        reports = [spectral.check_eigenfunction(c, points, MetricParams(), cfg.tolerances["eigen"],
                                                cfg.fd_steps["second"]).to_dict()
                   for c in spectral.eigenfunction_catalog(s, float(args.a))]
        return {"s": s, "a": float(args.a), "reports": reports}
    O = SiegelPoint(parse_complex_matrix(_read_json(args.omega), "Omega"))
    if args.task == "riemann":
        return spectral.riemann_conditions(O, cfg.tolerances["riemann"])
    A = np.array(_read_json(args.A_index), dtype=float)
    B = np.array(_read_json(args.B_index), dtype=float)
    idx = spectral.TorusBasisIndex(A, B)
    lam, spread = spectral.torus_eigenvalue(O, idx, rng_seed=cfg.seed)
    return {"Omega": encode_complex_matrix(O.Z), "A": idx.A, "B": idx.B,
            "eigenvalue": lam, "ratio_spread": spread}


def cmd_verify(cfg, args):
    return run_suite(args.suite, cfg, timing=args.timing)


# parser -----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help=f"JSON config file (default: ${CONFIG_ENV} if set)")
    common.add_argument("--seed", type=int, help="random seed (default 0)")
    common.add_argument("--n", type=int, help="degree n (default 1)")
    common.add_argument("--m", type=int, help="rows m of W (default 1)")
    common.add_argument("--A", type=float, help="metric parameter A (default 1)")
    common.add_argument("--B", type=float, help="metric parameter B (default 1)")
    common.add_argument("--samples", type=int, help="random samples per check (default 10)")

    parser = argparse.ArgumentParser(
        prog="siegel-jacobi",
        description="Jacobi group actions, invariant metrics and Laplacians on H_n x C^(m,n). "
        "Matrix arguments are JSON literals, @file, or - for stdin.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("act", parents=[common], help="apply a group element to a point")
    p.add_argument("--element", required=True)
    p.add_argument("--point", required=True)
    p.set_defaults(func=cmd_act)

    p = sub.add_parser("metric", parents=[common], help="metric tensor in the real chart")
    p.add_argument("--point", required=True)
    p.set_defaults(func=cmd_metric)

    p = sub.add_parser("laplacian", parents=[common], help="Laplacian of a field expression")
    p.add_argument("--point", required=True)
    p.add_argument("--field", required=True, help="expression in chart labels, e.g. 'y11**2*v11'")
    p.add_argument("--beltrami", action="store_true", help="also evaluate the Laplace-Beltrami oracle")
    p.set_defaults(func=cmd_laplacian)

    p = sub.add_parser("curvature", parents=[common], help="scalar curvature (default point (iE, 0))")
    p.add_argument("--point")
    p.set_defaults(func=cmd_curvature)

    p = sub.add_parser("reduce", parents=[common], help="reduce a point into the fundamental domain")
    p.add_argument("--point", required=True)
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("volume", parents=[common], help="volume of Siegel's fundamental domain")
    p.add_argument("degree", nargs="?", type=int, help="n (default: --n)")
    p.set_defaults(func=cmd_volume)

    p = sub.add_parser("spectral", help="Bessel K, eigenfunctions, torus spectrum")
    tasks = p.add_subparsers(dest="task", required=True)
    t = tasks.add_parser("bessel", parents=[common])
    t.add_argument("--s", required=True)
    t.add_argument("--z", required=True)
    t = tasks.add_parser("catalog", parents=[common])
    t.add_argument("--s", required=True)
    t.add_argument("--a", required=True, type=float)
    t = tasks.add_parser("torus", parents=[common])
    t.add_argument("--omega", required=True)
    t.add_argument("--A-index", dest="A_index", required=True, help="integer m x n matrix")
    t.add_argument("--B-index", dest="B_index", required=True, help="integer m x n matrix")
    t = tasks.add_parser("riemann", parents=[common])
    t.add_argument("--omega", required=True)
    p.set_defaults(func=cmd_spectral)

    p = sub.add_parser("verify", parents=[common], help="run a verification suite")
    p.add_argument("suite", choices=SUITES + ("all",))
    p.add_argument("--timing", action="store_true", help="include wall-clock duration in the report")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args)
        result = args.func(cfg, args)
        text = dumps(result)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (DomainError, NumericalError, ValueError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(text)
    if args.command == "verify" and not result["pass"]:
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
