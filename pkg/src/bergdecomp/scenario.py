"""Declarative scenario files and the verification runner behind the CLI.

A scenario is a TOML document. Exact rationals are written as ``"p/q"``
strings, matrices as nested integer arrays. Two kinds exist:
``decomposition`` (a monomial map between Reinhardt domains, checked
through kernel identities) and ``monomial_ball`` (the comparison probe).
"""

from __future__ import annotations

import hashlib
import json
import re
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - exercised on 3.10
    import tomli as tomllib

from .bergman import DEFAULT_MAX_DEGREE, build_kernel
from .domains import ReinhardtDomain, WeightSpec, domain_from_dict
from .errors import ScenarioError
from .group import build_group
from .identities import (
    DecompositionScenario,
    bell_fiber_residual,
    corollary_inequality,
    decomposition_residual,
    diagonal_residual,
    monomial_ball_estimate,
)
from .intlin import IntMatrix
from .monomial import eval_Phi

__all__ = [
    "SCHEMA_VERSION",
    "Scenario",
    "load_scenario",
    "parse_scenario",
    "shipped_scenarios",
    "shipped_scenario_path",
    "run_verify",
    "report_json",
]

SCHEMA_VERSION = 1
CHECKS = ("decomposition", "diagonal", "bell", "inequality")
DEFAULT_TOLERANCES = {"kernel_tol": 1e-12, "quad_tol": 1e-10, "residual_tol": 1e-8}


@dataclass
class Scenario:
    name: str
    kind: str
    source_hash: str
    description: str = ""
    matrix: IntMatrix | None = None
    domain1: ReinhardtDomain | None = None
    domain2: ReinhardtDomain | None = None
    weight2: WeightSpec | None = None
    mode: str = "axes-deleted"
    points: dict = field(default_factory=lambda: {"count": 20, "seed": 0, "scale": 0.7})
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    b_overrides: dict[int, tuple[int, ...]] = field(default_factory=dict)
    checks: tuple[str, ...] = ("decomposition", "diagonal")
    ball: dict = field(default_factory=dict)
    max_degree: int = DEFAULT_MAX_DEGREE

    @property
    def use_full_domains(self) -> bool:
        return self.mode == "full-domains"

    def decomposition(self) -> DecompositionScenario:
        b_choices = None
        if self.b_overrides:
            reps = build_group(self.matrix).reps_GAt
            for idx in self.b_overrides:
                if not 0 <= idx < len(reps):
                    raise ScenarioError(f"b_overrides: no character with index {idx}")
            b_choices = {reps[i].m: b for i, b in self.b_overrides.items()}
        return DecompositionScenario(
            self.matrix, self.domain1, self.domain2, self.weight2,
            b_choices=b_choices, use_full_domains=self.use_full_domains,
            kernel_tol=self.tolerances["kernel_tol"], max_degree=self.max_degree, name=self.name,
        )

    def sample_pairs(self, S: DecompositionScenario) -> tuple[np.ndarray, np.ndarray]:
        explicit = self.points.get("explicit")
        if explicit is not None:
            z = np.array(explicit, dtype=complex)
            return z, z[::-1].copy()
        count, seed, scale = int(self.points["count"]), int(self.points["seed"]), float(self.points["scale"])
        return S.sample_points(count, seed, scale), S.sample_points(count, seed + 1, scale)


def _line_of(text: str, key: str) -> int | None:
    pat = re.compile(rf"^[ \t]*(\[{re.escape(key)}\]|{re.escape(key)}\s*=)", re.M)
    m = pat.search(text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def _fail(text: str, key: str, message: str, origin: str):
    line = _line_of(text, key)
    where = f"{origin}:{line}" if line else origin
    raise ScenarioError(f"{where}: {key}: {message}")


def _parse_complex(value) -> complex:
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, (int, float)):
        return complex(value)
    return complex(str(value).replace(" ", ""))


def parse_scenario(text: str, origin: str = "<scenario>") -> Scenario:
    """Parse scenario text; every error names the offending line when it can."""
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ScenarioError(f"{origin}: {exc}") from exc
    source_hash = hashlib.sha256(text.encode()).hexdigest()

    def get(key, default=None, required=False):
        if key not in data:
            if required:
                raise ScenarioError(f"{origin}: missing required key {key!r}")
            return default
        return data[key]

    name = str(get("name", Path(origin).stem))
    kind = str(get("kind", "decomposition"))
    sc = Scenario(name=name, kind=kind, source_hash=source_hash, description=str(get("description", "")))
    sc.max_degree = int(get("max_degree", DEFAULT_MAX_DEGREE))
    tol = dict(DEFAULT_TOLERANCES)
    for k, v in get("tolerances", {}).items():
        if k not in tol:
            _fail(text, "tolerances", f"unknown tolerance {k!r}", origin)
        tol[k] = float(v)
    sc.tolerances = tol

    if kind == "monomial_ball":
        ball = get("monomial_ball", required=True)
        try:
            deltas = [tuple(float(x) for x in d) for d in ball["deltas"]]
            band = tuple(float(x) for x in ball.get("band", [1 / 50, 50]))
        except (KeyError, TypeError, ValueError) as exc:
            _fail(text, "monomial_ball", str(exc), origin)
        if any(len(d) != 3 for d in deltas):
            _fail(text, "monomial_ball", "each delta needs three entries", origin)
        sc.ball = {"deltas": deltas, "band": band, "delta3_factor": float(ball.get("delta3_factor", 0.8))}
        return sc
    if kind != "decomposition":
        _fail(text, "kind", f"unknown scenario kind {kind!r}", origin)

    matrix = get("matrix", required=True)
    try:
        sc.matrix = IntMatrix(matrix)
    except (ValueError, TypeError) as exc:
        _fail(text, "matrix", str(exc), origin)
    for key in ("domain1", "domain2"):
        try:
            setattr(sc, key, domain_from_dict(get(key, required=True)))
        except ScenarioError as exc:
            if "missing required" in str(exc):
                raise
            _fail(text, key, str(exc), origin)
    try:
        sc.weight2 = WeightSpec.from_dict(get("weight2", {"mu": ["0"] * sc.matrix.n}))
    except (KeyError, ValueError, TypeError, ZeroDivisionError) as exc:
        _fail(text, "weight2", str(exc), origin)
    if sc.weight2.n != sc.matrix.n:
        _fail(text, "weight2", "length of mu does not match the matrix", origin)
    sc.mode = str(get("mode", "axes-deleted"))
    if sc.mode not in ("axes-deleted", "full-domains"):
        _fail(text, "mode", "expected 'axes-deleted' or 'full-domains'", origin)
    pts = dict(get("points", {}))
    if "explicit" in pts:
        try:
            pts["explicit"] = [[_parse_complex(c) for c in p] for p in pts["explicit"]]
        except (ValueError, TypeError) as exc:
            _fail(text, "points", str(exc), origin)
    sc.points = {"count": 20, "seed": 0, "scale": 0.7, **pts}
    overrides = {}
    for k, v in get("b_overrides", {}).items():
        try:
            overrides[int(k)] = tuple(int(x) for x in v)
        except (TypeError, ValueError) as exc:
            _fail(text, "b_overrides", str(exc), origin)
    sc.b_overrides = overrides
    checks = tuple(get("checks", ["decomposition", "diagonal"]))
    for c in checks:
        if c not in CHECKS:
            _fail(text, "checks", f"unknown check {c!r}", origin)
    sc.checks = checks
    return sc


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(f"{path}: {exc.strerror}") from exc
    return parse_scenario(text, str(path))


def shipped_scenarios() -> list[str]:
    root = resources.files("bergdecomp") / "scenarios"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".toml"))


def shipped_scenario_path(name: str) -> Path:
    name = name[:-5] if name.endswith(".toml") else name
    path = Path(str(resources.files("bergdecomp") / "scenarios" / f"{name}.toml"))
    if not path.exists():
        raise ScenarioError(f"no shipped scenario {name!r}; available: {', '.join(shipped_scenarios())}")
    return path


# -- running ------------------------------------------------------------------

def _cplx(x) -> list[float]:
    x = complex(x)
    return [x.real, x.imag]


def _check_result(name: str, residuals, tol: float, **extra) -> dict:
    residuals = np.atleast_1d(np.asarray(residuals, dtype=float))
    worst = float(np.max(residuals)) if residuals.size else 0.0
    return {"check": name, "max_residual": worst, "tolerance": tol, "passed": bool(worst < tol), **extra}


def run_verify(sc: Scenario, *, kernel_tol: float | None = None, seed: int | None = None,
               max_degree: int | None = None) -> tuple[dict, list[dict]]:
    """Run every check of a scenario; returns the report and CSV rows."""
    if kernel_tol is not None:
        sc.tolerances["kernel_tol"] = kernel_tol
    if seed is not None:
        sc.points["seed"] = seed
    if max_degree is not None:
        sc.max_degree = max_degree
    report: dict[str, Any] = {
        "schema": SCHEMA_VERSION,
        "scenario": sc.name,
        "kind": sc.kind,
        "scenario_hash": sc.source_hash,
        "tolerances": dict(sc.tolerances),
        "max_degree": sc.max_degree,
    }
    if sc.kind == "monomial_ball":
        return _run_ball(sc, report)

    S = sc.decomposition()
    report["mode"] = sc.mode
    report["points"] = {k: v for k, v in sc.points.items() if k != "explicit"} | (
        {"explicit": len(sc.points["explicit"])} if "explicit" in sc.points else {}
    )
    report["mapping"] = S.check_mapping(seed=int(sc.points["seed"]))
    report["characters"] = [
        {"character": list(chi), "b": list(b), "eta": S.eta(b).to_dict()} for chi, b in S.b_choices.items()
    ]
    S.build_all()
    z, w = sc.sample_pairs(S)
    rtol = sc.tolerances["residual_tol"]
    results = []
    rows: list[dict] = []
    if "decomposition" in sc.checks:
        rep = decomposition_residual(S, z, w)
        results.append(_check_result("decomposition", rep.residual, rtol))
        rows.extend({"check": "decomposition", **r} for r in rep.rows(z, w))
    if "diagonal" in sc.checks:
        rep = diagonal_residual(S, z)
        negative = int(sum(np.sum(v < 0) for v in rep.terms.values()))
        res = _check_result("diagonal", rep.residual, rtol, negative_terms=negative)
        res["passed"] = res["passed"] and negative == 0
        results.append(res)
        rows.extend({"check": "diagonal", **r} for r in rep.rows(z))
    if "bell" in sc.checks:
        unit = WeightSpec.unit(sc.matrix.n)
        D1 = S.D1.with_axes_deleted(False)
        D2 = S.D2.with_axes_deleted(False)
        K1 = build_kernel(D1, unit, tol=sc.tolerances["kernel_tol"], max_degree=sc.max_degree)
        K2 = build_kernel(D2, unit, tol=sc.tolerances["kernel_tol"], max_degree=sc.max_degree)
        v = eval_Phi(sc.matrix, w)
        res = bell_fiber_residual(sc.matrix, S.group, K2, K1, z, v)
        results.append(_check_result("bell", res, rtol))
    if "inequality" in sc.checks:
        ineq = corollary_inequality(S, z)
        results.append({
            "check": "inequality",
            "min_relative_slack": ineq.min_relative_slack,
            "passed": ineq.holds,
        })
        for i in range(len(ineq.slack)):
            rows.append({"check": "inequality", "z": " ".join(f"{complex(c)}" for c in z[i]),
                         "lhs": float(ineq.full[i]), "rhs": float(ineq.split[i]),
                         "residual": float(ineq.slack[i])})
    report["checks"] = results
    report["truncation"] = S.truncation()
    report["passed"] = all(r["passed"] for r in results) and report["mapping"]["ok"]
    return report, rows


def _run_ball(sc: Scenario, report: dict) -> tuple[dict, list[dict]]:
    lo, hi = sc.ball["band"]
    factor = sc.ball["delta3_factor"]
    estimates, rows, results = [], [], []
    for d in sc.ball["deltas"]:
        est = monomial_ball_estimate(d)
        tighter = monomial_ball_estimate((d[0], d[1], d[2] * factor))
        entry = est.to_dict() | {"value_at_smaller_delta3": tighter.computed}
        estimates.append(entry)
        rows.append({"delta": " ".join(str(x) for x in d), "computed": est.computed, "model": est.model,
                     "reference": est.reference, "ratio": est.ratio})
    results.append({
        "check": "comparability",
        "band": [lo, hi],
        "ratios": [e["ratio"] for e in estimates],
        "passed": all(lo <= e["ratio"] <= hi for e in estimates),
    })
    results.append({
        "check": "delta3_monotonicity",
        "passed": all(e["value_at_smaller_delta3"] > e["computed"] for e in estimates),
    })
    report["estimates"] = estimates
    report["checks"] = results
    report["passed"] = all(r["passed"] for r in results)
    return report, rows


def _default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, complex):
        return _cplx(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialise {type(o).__name__}")


def report_json(report: dict, *, timestamp: bool = True) -> str:
    """Stable JSON: sorted keys; the timestamp is the only varying field."""
    body = dict(report)
    if timestamp:
        body["timestamp"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return json.dumps(body, indent=2, sort_keys=True, default=_default, allow_nan=True)
