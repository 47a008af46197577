"""Quick built-in checks: differentiation catalog, tensor identities, Gauss fixture."""

from __future__ import annotations

import math

import numpy as np

from .expr import eval_jet2, parse
from .lcs import catalog, hard_residual_max, validate_structure, warped_product
from .qsm import verify_curvature_relation
from .riemann import MetricField, levi_civita, riemann
from .submanifold import Immersion
from .verifiers import PointGeometry

# expression, value, gradient, hessian at (x, y)
DIFF_CATALOG = [
    ("x^3*y", lambda x, y: (x**3 * y, [3 * x**2 * y, x**3], [[6 * x * y, 3 * x**2], [3 * x**2, 0]])),
    ("sin(x)*cos(y)", lambda x, y: (
        math.sin(x) * math.cos(y),
        [math.cos(x) * math.cos(y), -math.sin(x) * math.sin(y)],
        [[-math.sin(x) * math.cos(y), -math.cos(x) * math.sin(y)],
         [-math.cos(x) * math.sin(y), -math.sin(x) * math.cos(y)]])),
    ("exp(x*y)", lambda x, y: (
        math.exp(x * y),
        [y * math.exp(x * y), x * math.exp(x * y)],
        [[y * y * math.exp(x * y), (1 + x * y) * math.exp(x * y)],
         [(1 + x * y) * math.exp(x * y), x * x * math.exp(x * y)]])),
    ("log(x^2+y^2)", lambda x, y: (
        math.log(x * x + y * y),
        [2 * x / (x * x + y * y), 2 * y / (x * x + y * y)],
        [[2 * (y * y - x * x) / (x * x + y * y) ** 2, -4 * x * y / (x * x + y * y) ** 2],
         [-4 * x * y / (x * x + y * y) ** 2, 2 * (x * x - y * y) / (x * x + y * y) ** 2]])),
]


def _diff_ok() -> tuple[bool, str]:
    x, y = 0.7, -0.4
    worst = 0.0
    for src, closed in DIFF_CATALOG:
        j = eval_jet2(parse(src, ("x", "y")), [x, y])
        v, gr, he = closed(x, y)
        for got, want in ((j.value, v), (j.gradient, gr), (j.hessian, he)):
            want = np.asarray(want, dtype=float)
            err = np.max(np.abs(np.asarray(got) - want) / (1 + np.abs(want)))
            worst = max(worst, float(err))
    return worst <= 1e-9, f"max relative error {worst:.2e}"


def _flat_ok() -> tuple[bool, str]:
    worst = 0.0
    for metric in (MetricField.euclidean(4), MetricField.minkowski(4)):
        conn = levi_civita(metric)
        p = [0.3, -0.1, 0.8, 1.2]
        worst = max(worst, float(np.max(np.abs(conn.coefficients(p).components))),
                    float(np.max(np.abs(riemann(conn, p).components))))
    return worst <= 1e-9, f"max flat component {worst:.2e}"


def _structure_ok() -> tuple[bool, str]:
    worst = 0.0
    for s in catalog(4).values():
        worst = max(worst, hard_residual_max(validate_structure(s, [0.6, 0.1, -0.3, 0.4])))
    return worst <= 1e-6, f"max structure residual {worst:.2e}"


def _qsm_ok() -> tuple[bool, str]:
    rep = verify_curvature_relation(warped_product(4, "t"), [1.2, 0.1, 0.2, 0.3])
    worst = max(rep.extras["torsion_residual"], rep.extras["metricity_residual"],
                rep.extras["curvature_route_gap"])
    return worst <= 1e-8, f"torsion/metricity/two-route max {worst:.2e}"


def _gauss_ok() -> tuple[bool, str]:
    imm = Immersion.slice(warped_product(3, "exp(t)"), 2, 0.0)
    geo = PointGeometry(imm, [0.2, -0.3])
    checks = [
        abs(geo.norms["H_sq"] + 1.0),
        abs(geo.norms["h_sq"] + 2.0),
        abs(geo.tau),
        geo.gauss_equation_residual(),
        abs(geo.gauss_trace_residual()),
    ]
    return max(checks) <= 1e-4, f"slice fixture max deviation {max(checks):.2e}"


CHECKS = [
    ("differentiation catalog", _diff_ok),
    ("flat-space zeros", _flat_ok),
    ("structure equations", _structure_ok),
    ("quarter-symmetric connection", _qsm_ok),
    ("Gauss-equation fixture", _gauss_ok),
]


def selftest() -> list[tuple[str, bool, str]]:
    out = []
    for name, fn in CHECKS:
        try:
            ok, detail = fn()
        except Exception as err:  # a selftest reports, it does not crash
            ok, detail = False, f"{type(err).__name__}: {err}"
        out.append((name, ok, detail))
    return out
