import numpy as np
import pytest

from lcslab.expr import Taylor
from lcslab.lcs import CATALOG, LcsStructure, from_catalog_name, warped_product
from lcslab.qsm import (
    build_qsm,
    curvature_routes,
    difference_tensor,
    metricity_residual,
    qsm_curvature,
    curvature_relation_rhs,
    torsion_residual,
    verify_curvature_relation,
)
from lcslab.riemann import MetricField, curvature_0_4, levi_civita


def _points(name, count, seed=0, n=4):
    lo, hi = CATALOG[name][1]
    rng = np.random.default_rng(seed)
    return [np.concatenate([[rng.uniform(lo, hi)], rng.uniform(-1, 1, n - 1)]) for _ in range(count)]


@pytest.mark.parametrize("name", sorted(CATALOG))
def test_torsion_metricity_two_routes(name):
    s = from_catalog_name(name, 4)
    c = build_qsm(s)
    for p in _points(name, 12):
        assert torsion_residual(c, p) <= 1e-8
        assert metricity_residual(c, s.metric, p) <= 1e-8
        a, b = curvature_routes(c, p)
        assert np.max(np.abs(a - b)) <= 1e-8


def test_connection_formula_with_vectors():
    s = from_catalog_name("exp_plus_2", 4)
    c = build_qsm(s)
    p = [0.3, 0.1, 0.2, -0.4]
    rng = np.random.default_rng(1)
    x, y = rng.standard_normal(4), rng.standard_normal(4)
    f = {k: v.value for k, v in s.fields_at(Taylor.variables(p, 0)).items()}
    g, xi, eta, phi = f["g"], f["xi"], f["eta"], f["phi"]
    phix = phi @ x
    expected = (eta @ y) * phix - (phix @ g @ y) * xi
    np.testing.assert_allclose(c.difference(p, x, y), expected, atol=1e-14)
    # X = Y = xi: A(xi, xi) = 0
    assert np.max(np.abs(c.difference(p, xi, xi))) <= 1e-14


def test_degenerate_structure_gives_levi_civita():
    s = LcsStructure.degenerate(MetricField.minkowski(3))
    c = build_qsm(s)
    p = [0.1, 0.2, 0.3]
    np.testing.assert_array_equal(c.coefficients(p).components, levi_civita(s.metric).coefficients(p).components)
    np.testing.assert_array_equal(qsm_curvature(c, p).components,
                                  curvature_0_4(levi_civita(s.metric), s.metric, p).components)


@pytest.mark.parametrize("warp, alpha_constant", [("exp(t)", True), ("t", False)])
def test_relation_report(warp, alpha_constant):
    s = warped_product(4, warp)
    p = [1.1, 0.2, -0.3, 0.4]
    rep = verify_curvature_relation(s, p)
    assert np.isfinite(rep.max_residual)
    assert (abs(rep.extras["alpha"] - 1.0) < 1e-12) == alpha_constant
    for key in ("torsion_residual", "metricity_residual", "curvature_route_gap"):
        assert rep.extras[key] <= 1e-8


def test_relation_multilinearity():
    """Coordinate-slot tensors contracted with random vectors equal direct evaluation."""
    s = from_catalog_name("cosh", 4)
    p = [0.8, 0.1, 0.2, 0.3]
    rep = verify_curvature_relation(s, p)
    rng = np.random.default_rng(7)
    vs = rng.standard_normal((4, 4))
    f = {k: v.value for k, v in s.fields_at(Taylor.variables(p, 0)).items()}
    g, eta, phi, alpha = f["g"], f["eta"], f["phi"], float(f["alpha"])
    X, Y, Z, W = vs
    r04 = rep.rhs - curvature_relation_rhs(np.zeros((4,) * 4), f)
    gp = lambda a, b: (phi @ a) @ g @ b  # noqa: E731
    r = np.einsum("ijkw,i,j,k,w->", r04, X, Y, Z, W)
    direct = (
        r
        + (2 * alpha - 1) * (gp(X, Z) * gp(Y, W) - gp(Y, Z) * gp(X, W))
        + alpha * ((eta @ Y) * (X @ g @ W) - (eta @ X) * (Y @ g @ W)) * (eta @ Z)
        + alpha * ((Y @ g @ Z) * (eta @ X) - (X @ g @ Z) * (eta @ Y)) * (eta @ W)
    )
    assert np.einsum("ijkw,i,j,k,w->", rep.rhs, X, Y, Z, W) == pytest.approx(direct, abs=1e-8)
    lhs_direct = np.einsum("ijkw,i,j,k,w->", rep.lhs, X, Y, Z, W)
    xi = f["xi"]
    # all-xi slots exercise the eta(xi) = -1 terms; both sides finite
    assert np.isfinite(np.einsum("ijkw,i,j,k,w->", rep.rhs, xi, Y, xi, W))
    assert np.isfinite(lhs_direct)


def test_difference_tensor_shape():
    s = from_catalog_name("exp", 3)
    a = difference_tensor(s.fields_at(Taylor.variables([0.0, 0.0, 0.0], 1)))
    assert a.shape == (3, 3, 3)
