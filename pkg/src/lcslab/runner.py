"""Run a scenario: sample points, evaluate verifiers, aggregate, serialize."""

from __future__ import annotations

import csv
import io
import json
import math
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .expr import ExpressionError
from .scenario import Scenario
from .tensor import TensorError
from .verifiers import THEOREMS, PointGeometry, run_theorem

MATH_ERRORS = (TensorError, ExpressionError, ArithmeticError, np.linalg.LinAlgError, ValueError)


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    return obj


def aggregate(entries: list[dict]) -> dict:
    """Counts, max |residual| and mean residual over one theorem's entries."""
    ok = [e["report"] for e in entries if e["status"] == "ok"]
    residuals = [float(r["residual"]) for r in ok]
    ident = [abs(float(r["exact_identity_residual"])) for r in ok]
    out = {
        "points": len(entries),
        "pass": sum(r["verdict"] == "pass" for r in ok),
        "conditional": sum(r["verdict"] == "conditional" for r in ok),
        "fail": sum(r["verdict"] == "fail" for r in ok),
        "error": sum(e["status"] == "error" for e in entries),
        "max_abs_residual": max((abs(r) for r in residuals), default=None),
        "mean_residual": math.fsum(residuals) / len(residuals) if residuals else None,
        "max_exact_identity_residual": max(ident, default=None),
        "hard_check_failures": sum(
            any(not c["ok"] for c in r["hard_checks"].values()) for r in ok
        ),
    }
    return out


def exit_status(report: dict) -> int:
    """0 when every entry passes (or is conditional and that was expected), else 1."""
    expect = report["expect_conditional"]
    for agg in report["aggregates"].values():
        if agg["fail"] or agg["error"] or agg["hard_check_failures"]:
            return 1
        if agg["conditional"] and not expect:
            return 1
    return 0


def run(scenario: Scenario, theorems=None, points: int | None = None, seed: int | None = None) -> dict:
    theorems = list(scenario.theorems if theorems is None else theorems)
    for th in theorems:
        if th not in THEOREMS:
            raise ValueError(f"unknown theorem id {th!r}")
    seed = scenario.seed if seed is None else seed
    sample = scenario.sample(points, seed)
    results = {th: [] for th in theorems}
    for idx, u in enumerate(sample):
        point = [float(v) for v in u]
        try:
            geo = PointGeometry(scenario.immersion, u, scenario.tolerances)
        except MATH_ERRORS as err:
            for th in theorems:
                results[th].append(_error_entry(idx, point, err))
            continue
        for th in theorems:
            try:
                rep = run_theorem(th, geo, seed=seed + idx, options=scenario.options)
                results[th].append({"index": idx, "point": point, "status": "ok", "report": _clean(rep.to_dict())})
            except MATH_ERRORS as err:
                results[th].append(_error_entry(idx, point, err))
    report = {
        "tool": "lcslab",
        "version": __version__,
        "seed": seed,
        "points": len(sample),
        "scenario": _clean(scenario.raw),
        "expect_conditional": scenario.expect_conditional,
        "theorems": theorems,
        "results": results,
        "aggregates": {th: aggregate(results[th]) for th in theorems},
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    report["exit_status"] = exit_status(report)
    return _clean(report)


def _error_entry(idx: int, point: list, err: Exception) -> dict:
    return {"index": idx, "point": point, "status": "error",
            "error": {"type": type(err).__name__, "message": str(err)}}


def canonical(report: dict) -> str:
    """Deterministic serialization with the timestamp removed."""
    body = {k: v for k, v in report.items() if k != "timestamp"}
    return json.dumps(body, sort_keys=True, separators=(",", ":"))


def to_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True)


CSV_FIELDS = ("theorem", "index", "point", "lhs", "rhs", "residual", "verdict")


def to_csv(report: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for th in report["theorems"]:
        for e in report["results"][th]:
            point = " ".join(repr(v) for v in e["point"])
            if e["status"] == "ok":
                r = e["report"]
                w.writerow([th, e["index"], point, repr(r["lhs"]), repr(r["rhs"]), repr(r["residual"]), r["verdict"]])
            else:
                w.writerow([th, e["index"], point, "", "", "", "error"])
    return buf.getvalue()


def _fmt(v) -> str:
    return "-" if v is None else f"{v:.6g}"


def to_text(report: dict) -> str:
    lines = [f"lcslab {report['version']}  seed={report['seed']}  points={report['points']}"]
    for th in report["theorems"]:
        a = report["aggregates"][th]
        lines.append(
            f"{th:10s} pass={a['pass']} conditional={a['conditional']} fail={a['fail']} "
            f"error={a['error']}  max|res|={_fmt(a['max_abs_residual'])}  "
            f"mean={_fmt(a['mean_residual'])}  max|gauss|={_fmt(a['max_exact_identity_residual'])}"
        )
        for e in report["results"][th]:
            if e["status"] == "error":
                lines.append(f"  point {e['index']}: {e['error']['type']}: {e['error']['message']}")
            else:
                bad = [k for k, c in e["report"]["hard_checks"].items() if not c["ok"]]
                if bad:
                    lines.append(f"  point {e['index']}: hard checks failed: {', '.join(bad)}")
    lines.append(f"exit status {report['exit_status']}")
    return "\n".join(lines) + "\n"


FORMATTERS = {"json": to_json, "csv": to_csv, "text": to_text}
