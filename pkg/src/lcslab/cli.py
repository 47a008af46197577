"""Command line: ``lcslab validate | check | selftest``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .lcs import INFORMATIONAL_KEYS, hard_residual_max, validate_structure
from .runner import FORMATTERS, run
from .scenario import ScenarioError, load_scenario
from .selftest import selftest
from .verifiers import THEOREMS


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lcslab", description="Numerical checks for submanifolds of (LCS)_n warped products.")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="structure equations at the sampled ambient points")
    v.add_argument("scenario")
    v.add_argument("--tol", type=float, default=None, help="residual bound (default: scenario structure tolerance)")

    c = sub.add_parser("check", help="run the scenario's theorem checks")
    c.add_argument("scenario")
    c.add_argument("--theorems", default=None, help=f"comma-separated ids from {','.join(THEOREMS)}")
    c.add_argument("--points", type=int, default=None)
    c.add_argument("--seed", type=int, default=None)
    c.add_argument("--format", choices=sorted(FORMATTERS), default="json")
    c.add_argument("--out", default=None, help="write the report here instead of stdout")

    sub.add_parser("selftest", help="built-in differentiation, tensor and Gauss-fixture checks")
    return p


def _validate(args) -> int:
    sc = load_scenario(args.scenario)
    tol = sc.tolerances.structure if args.tol is None else args.tol
    worst = 0.0
    for i, u in enumerate(sc.sample()):
        x = sc.immersion.ambient_point(u)
        res = validate_structure(sc.ambient, x)
        hard = hard_residual_max(res)
        worst = max(worst, hard)
        key = max((k for k in res if k not in INFORMATIONAL_KEYS), key=lambda k: res[k])
        print(f"point {i}: x={[round(float(v), 6) for v in x]} max residual {hard:.3e} ({key})")
    status = 0 if worst <= tol else 1
    print(f"structure equations: max residual {worst:.3e} vs tol {tol:g}: {'ok' if status == 0 else 'FAILED'}")
    return status


def _check(args) -> int:
    sc = load_scenario(args.scenario)
    theorems = None
    if args.theorems:
        theorems = [t.strip() for t in args.theorems.split(",") if t.strip()]
        unknown = [t for t in theorems if t not in THEOREMS]
        if unknown:
            raise ScenarioError("--theorems", f"unknown theorem ids {unknown}")
    if args.points is not None and args.points < 1:
        raise ScenarioError("--points", "needs at least one point")
    report = run(sc, theorems=theorems, points=args.points, seed=args.seed)
    text = FORMATTERS[args.format](report)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return report["exit_status"]


def _selftest() -> int:
    results = selftest()
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    return 0 if all(ok for _, ok, _ in results) else 1


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "validate":
            return _validate(args)
        if args.command == "check":
            return _check(args)
        return _selftest()
    except ScenarioError as err:
        print(f"lcslab: input error: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"lcslab: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
