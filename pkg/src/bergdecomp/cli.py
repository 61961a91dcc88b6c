"""Command-line front end.

Exit codes: 0 pass, 1 residual failure, 2 parse error, 3 resource cap,
4 evaluation outside a domain or validity region.
"""

from __future__ import annotations

import argparse
import ast
import csv
import json
import os
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from .bergman import DEFAULT_MAX_DEGREE, cached_build_kernel, kernel_eval
from .domains import polydisk
from .errors import (
    DomainError,
    GroupTooLargeError,
    QuadratureError,
    ScenarioError,
    TruncationError,
)
from .group import DEFAULT_MAX_ORDER, build_group, check_orthogonality, character_value
from .intlin import IntMatrix, smith_normal_form
from .monomial import eval_Phi, fiber
from .projection import LaurentPolynomial, check_projection_algebra
from .scenario import (
    Scenario,
    load_scenario,
    report_json,
    run_verify,
    shipped_scenario_path,
    shipped_scenarios,
)

EXIT_OK, EXIT_FAIL, EXIT_PARSE, EXIT_CAP, EXIT_DOMAIN = 0, 1, 2, 3, 4


class UsageError(Exception):
    """Malformed command-line input (exit code 2)."""


def _parse_matrix(text: str) -> IntMatrix:
    try:
        rows = json.loads(text)
    except json.JSONDecodeError:
        try:
            rows = ast.literal_eval(text)
        except (ValueError, SyntaxError) as exc:
            raise UsageError(f"cannot parse matrix {text!r}: {exc}") from exc
    if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
        raise UsageError(f"matrix must be a nested list such as [[2,0],[0,3]], got {text!r}")
    if not all(isinstance(x, int) and not isinstance(x, bool) for r in rows for x in r):
        raise UsageError("matrix entries must be integers")
    try:
        return IntMatrix(rows)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _parse_point(text: str) -> list[complex]:
    try:
        return [complex(p.strip().replace(" ", "")) for p in text.split(",") if p.strip()]
    except ValueError as exc:
        raise UsageError(f"cannot parse point {text!r}: {exc}") from exc


def _parse_pair(text: str, n: int) -> tuple[np.ndarray, np.ndarray]:
    if ";" in text:
        a, b = text.split(";", 1)
        z, w = _parse_point(a), _parse_point(b)
    else:
        vals = _parse_point(text)
        if len(vals) != 2 * n:
            raise UsageError(f"--at needs {2 * n} coordinates (z then w), got {len(vals)}")
        z, w = vals[:n], vals[n:]
    if len(z) != n or len(w) != n:
        raise UsageError(f"points must have {n} coordinates")
    return np.array(z), np.array(w)


def _cplx(x) -> list[float]:
    x = complex(x)
    return [x.real, x.imag]


def _emit(payload: dict, args, *, timestamp: bool = False) -> None:
    text = report_json(payload, timestamp=timestamp)
    print(text)
    if getattr(args, "output", None):
        Path(args.output).write_text(text + "\n", encoding="utf-8")


def _cache_dir(args) -> str | None:
    return args.cache_dir or os.environ.get("BERGDECOMP_CACHE") or str(Path.home() / ".cache" / "bergdecomp")


def _load(name_or_path: str) -> Scenario:
    path = Path(name_or_path)
    if not path.exists() and not name_or_path.endswith(".toml"):
        path = shipped_scenario_path(name_or_path)
    return load_scenario(path)


# -- subcommands -------------------------------------------------------------

def cmd_snf(args) -> int:
    A = _parse_matrix(args.matrix)
    snf = smith_normal_form(A)
    n = A.n
    lam = [[snf.lam[i] if i == j else 0 for j in range(n)] for i in range(n)]
    _emit({"matrix": A.tolist(), "S": snf.S.tolist(), "Lambda": lam, "T": snf.T.tolist(),
           "invariant_factors": list(snf.lam)}, args)
    return EXIT_OK


def cmd_group(args) -> int:
    A = _parse_matrix(args.matrix)
    G = build_group(A, max_order=args.max_order)
    orth = check_orthogonality(G)
    table = [[str(character_value(G, b, m).value) for m in G.reps_GA] for b in G.reps_GAt]
    _emit({
        "matrix": A.tolist(),
        "order": G.order,
        "elements": [list(m.m) for m in G.reps_GA],
        "characters": [list(b.m) for b in G.reps_GAt],
        "character_phases": table,
        "orthogonality": orth.to_dict(),
    }, args)
    return EXIT_OK if orth.passed else EXIT_FAIL


def cmd_fiber(args) -> int:
    A = _parse_matrix(args.matrix)
    G = build_group(A, max_order=args.max_order)
    w = np.array(_parse_point(args.point))
    if len(w) != A.n:
        raise UsageError(f"point must have {A.n} coordinates")
    pts = fiber(A, G, w)
    back = eval_Phi(A, pts)
    err = float(np.max(np.abs(back - w)))
    _emit({"point": [_cplx(x) for x in w], "fiber": [[_cplx(x) for x in p] for p in pts],
           "max_forward_error": err}, args)
    return EXIT_OK if err < 1e-10 * max(1.0, float(np.max(np.abs(w)))) else EXIT_FAIL


def cmd_project(args) -> int:
    A = _parse_matrix(args.matrix)
    G = build_group(A, max_order=args.max_order)
    rng = np.random.default_rng(args.seed)
    f = LaurentPolynomial.random(A.n, rng, terms=args.terms)
    pts = polydisk(*([1] * A.n)).sample(rng, args.points)
    rep = check_projection_algebra(G, f, pts)
    _emit({"matrix": A.tolist(), "seed": args.seed, "report": rep.to_dict(),
           "tolerance": args.tolerance}, args)
    return EXIT_OK if rep.max_deviation < args.tolerance else EXIT_FAIL


def cmd_kernel(args) -> int:
    sc = _load(args.scenario)
    if sc.kind != "decomposition":
        raise ScenarioError(f"scenario {sc.name!r} has no kernel to evaluate")
    if args.tol is not None:
        sc.tolerances["kernel_tol"] = args.tol
    if args.max_degree is not None:
        sc.max_degree = args.max_degree
    S = sc.decomposition()
    K, cached = cached_build_kernel(S.D1, S.omega1, tol=sc.tolerances["kernel_tol"], max_degree=sc.max_degree,
                                    cache_dir=_cache_dir(args))
    print(f"kernel {'read from' if cached else 'written to'} cache", file=sys.stderr)
    values = []
    for text in args.at or []:
        z, w = _parse_pair(text, S.A.n)
        val = complex(kernel_eval(K, z, w))
        values.append({"z": [_cplx(x) for x in z], "w": [_cplx(x) for x in w], "value": _cplx(val)})
    _emit({"scenario": sc.name, "domain": S.D1.to_dict(), "weight": S.omega1.to_dict(),
           "truncation": K.truncation(), "values": values}, args)
    return EXIT_OK


def _write_csv(path: str, rows: list[dict]) -> None:
    cols: list[str] = []
    for r in rows:
        cols.extend(k for k in r if k not in cols)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=cols)
        writer.writeheader()
        for r in rows:
            writer.writerow({k: (f"{v.real:.17g}{v.imag:+.17g}j" if isinstance(v, complex) else v)
                             for k, v in r.items()})


def _verify(sc: Scenario, args) -> int:
    report, rows = run_verify(sc, kernel_tol=args.tol, seed=args.seed, max_degree=args.max_degree)
    text = report_json(report)
    print(text)
    out = getattr(args, "report", None) or args.output
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
    if getattr(args, "csv", None):
        _write_csv(args.csv, rows)
    return EXIT_OK if report["passed"] else EXIT_FAIL


def cmd_verify(args) -> int:
    return _verify(_load(args.scenario), args)


def cmd_example(args) -> int:
    if args.list or not args.name:
        for name in shipped_scenarios():
            print(name)
        return EXIT_OK
    path = shipped_scenario_path(args.name)
    if args.show:
        print(path.read_text(encoding="utf-8"), end="")
        return EXIT_OK
    return _verify(load_scenario(path), args)


# -- parser -------------------------------------------------------------------

def _global_options(parser: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--tol", type=float, default=d(None), help="kernel truncation tolerance")
    parser.add_argument("--seed", type=int, default=d(None), help="seed for sampled points")
    parser.add_argument("--max-degree", type=int, default=d(None),
                        help=f"largest shell index of a kernel series (default {DEFAULT_MAX_DEGREE})")
    parser.add_argument("--output", default=d(None), help="also write the JSON report here")
    parser.add_argument("--cache-dir", default=d(None), help="kernel cache directory (env BERGDECOMP_CACHE)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bergdecomp",
                                     description="Deck groups of monomial maps and Bergman kernel identities.")
    _global_options(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_options(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)

    def matrix_cmd(name, help_text):
        p = sub.add_parser(name, help=help_text, parents=[common])
        p.add_argument("--matrix", required=True, help='integer matrix, e.g. "[[2,0],[0,3]]"')
        p.add_argument("--max-order", type=int, default=DEFAULT_MAX_ORDER, help="cap on |det A|")
        return p

    p = matrix_cmd("snf", "Smith normal form S·A·T = Λ")
    p.set_defaults(func=cmd_snf)
    p = matrix_cmd("group", "deck group, characters and orthogonality")
    p.set_defaults(func=cmd_group)
    p = matrix_cmd("fiber", "all preimages of a point under the monomial map")
    p.add_argument("--point", required=True, help='comma-separated coordinates, e.g. "0.3+0.1j,0.5"')
    p.set_defaults(func=cmd_fiber)
    p = matrix_cmd("project", "projection algebra on a seeded Laurent polynomial")
    p.add_argument("--points", type=int, default=20)
    p.add_argument("--terms", type=int, default=6)
    p.add_argument("--tolerance", type=float, default=1e-12)
    p.set_defaults(func=cmd_project, seed=0)

    p = sub.add_parser("kernel", help="evaluate the D1 kernel of a scenario", parents=[common])
    p.add_argument("scenario", help="scenario file or shipped scenario name")
    p.add_argument("--at", action="append", help='"z;w" or "z1,..,zn,w1,..,wn"')
    p.set_defaults(func=cmd_kernel)

    p = sub.add_parser("verify", help="check every identity listed in a scenario", parents=[common])
    p.add_argument("scenario", help="scenario file or shipped scenario name")
    p.add_argument("--report", help="write the JSON report here")
    p.add_argument("--csv", help="write per-point residuals here")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("example", help="list, show or verify a shipped scenario", parents=[common])
    p.add_argument("name", nargs="?")
    p.add_argument("--list", action="store_true")
    p.add_argument("--show", action="store_true", help="print the scenario file instead of running it")
    p.add_argument("--csv", help="write per-point residuals here")
    p.set_defaults(func=cmd_example)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (UsageError, ScenarioError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (GroupTooLargeError, TruncationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except QuadratureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
