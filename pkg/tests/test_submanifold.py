import numpy as np
import pytest

from conftest import random_graph
from lcslab.lcs import LcsStructure, warped_product
from lcslab.riemann import MetricField, levi_civita
from lcslab.submanifold import (
    DegenerateImmersionError,
    Immersion,
    InducedMetric,
    SecondFundamentalForm,
    classify,
    induced_connection,
    induced_metric,
    mean_curvature,
    norms,
    point_type,
    qsm_form_checks,
    qsm_second_fundamental_form,
    relative_null_space,
    second_fundamental_form,
    shape_operator,
    shape_spectrum,
    submanifold_frame,
)
from lcslab.tensor import TensorError


def test_slice_closed_forms(slice_exp):
    u = [0.3, -0.2]
    sff = second_fundamental_form(slice_exp, u)
    dt = np.array([1.0, 0.0, 0.0])
    for i in range(2):
        for j in range(2):
            np.testing.assert_allclose(sff.vectors[i, j], dt * (i == j), atol=1e-12)
    n = norms(sff)
    assert n["H_sq"] == pytest.approx(-1.0, abs=1e-12)
    assert n["h_sq"] == pytest.approx(-2.0, abs=1e-12)
    assert n["h_sq_frame"] == pytest.approx(n["h_sq"], abs=1e-12)
    assert n["H_sq_unsigned"] == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(mean_curvature(sff), dt, atol=1e-12)


def test_slice_shape_operator(slice_exp):
    sff = second_fundamental_form(slice_exp, [0.0, 0.0])
    a = shape_operator(sff, [1.0, 0.0, 0.0])
    assert a.kinds == "ud"
    np.testing.assert_allclose(a.components, -np.eye(2), atol=1e-12)
    np.testing.assert_allclose(shape_spectrum(sff, [1.0, 0.0, 0.0]), [-1.0, -1.0], atol=1e-12)
    with pytest.raises(TensorError):
        shape_operator(sff, [0.0, 1.0, 0.0])


def test_shape_operator_duality():
    imm, u = random_graph(3)
    sff = second_fundamental_form(imm, u)
    g = sff.frame.metric
    for r in range(sff.frame.normal.shape[1]):
        v = sff.frame.normal[:, r]
        a = shape_operator(sff, v).components
        expected = np.einsum("ijA,AB,B->ij", sff.vectors, g, v)
        np.testing.assert_allclose(a, expected, atol=1e-12)
        np.testing.assert_allclose(a, a.T, atol=1e-9)


def test_graph_induced_metric_hand_formula(exp3):
    imm = Immersion(exp3, ["0.1*u", "u", "v"], ["u", "v"])
    u = 0.4
    g = induced_metric(imm, [u, -0.3]).components
    f2 = np.exp(2 * 0.1 * u)
    np.testing.assert_allclose(g, [[-0.01 + f2, 0.0], [0.0, f2]], atol=1e-13)
    # Inducing a jet through InducedMetric agrees with the value path
    np.testing.assert_allclose(InducedMetric(imm).at([u, -0.3]).components, g, atol=1e-13)


def test_collapsed_immersion_errors(exp3):
    imm = Immersion(exp3, ["0", "u", "u"], ["u", "v"])
    with pytest.raises(DegenerateImmersionError):
        induced_metric(imm, [0.1, 0.2])
    # timelike curve tangent to xi
    with pytest.raises(DegenerateImmersionError):
        induced_metric(Immersion(exp3, ["s", "0", "0"], ["s"]), [0.1])
    with pytest.raises(DegenerateImmersionError):
        Immersion(exp3, ["u", "v", "w"], ["u", "v", "w"])


def test_frame_gram_and_signature():
    imm, u = random_graph(5, n=5, m=2)
    fr = submanifold_frame(imm, u)
    assert fr.gram_residual() <= 1e-9
    assert sorted(fr.eps.tolist()) == [-1.0, 1.0, 1.0]
    np.testing.assert_allclose(fr.jacobian @ fr.coefficients, fr.tangent, atol=1e-12)


def test_classification(slice_exp, exp3):
    c = classify(slice_exp, [0.1, 0.2])
    assert c.is_c_totally_real and c.is_invariant and not c.is_totally_real
    assert c.residuals["totally_real"] == pytest.approx(1.0, abs=1e-12)
    tilted = Immersion(exp3, ["0.5*s", "s", "0"], ["s"])
    ct = classify(tilted, [0.3])
    assert not ct.is_c_totally_real
    assert ct.residuals["c_totally_real"] > 0.1


def test_null_space_cases(slice_exp, euclid3):
    plane = Immersion(euclid3, ["u1", "u2", "0"], 2)
    full = relative_null_space(second_fundamental_form(plane, [0.2, 0.1]))
    assert full.dim == 2
    assert relative_null_space(second_fundamental_form(slice_exp, [0.0, 0.0])).dim == 0

    sff = second_fundamental_form(plane, [0.0, 0.0])
    comps = np.zeros_like(sff.components)
    comps[0] = np.diag([1.0, 0.0])
    injected = SecondFundamentalForm(sff.frame, sff.coordinate, sff.vectors, comps)
    null = relative_null_space(injected)
    assert null.dim == 1
    assert null.projection_residual([0.0, 1.0]) <= 1e-12
    assert null.projection_residual([1.0, 0.0]) == pytest.approx(1.0)


def test_cylinder(euclid3):
    cyl = Immersion(euclid3, ["cos(u1)", "sin(u1)", "u2"], 2)
    sff = second_fundamental_form(cyl, [0.4, 0.3])
    n = norms(sff)
    assert n["H_sq"] == pytest.approx(0.25, abs=1e-12)
    assert n["h_sq"] == pytest.approx(1.0, abs=1e-12)
    null = relative_null_space(sff)
    assert null.dim == 1 and null.projection_residual([0.0, 1.0]) <= 1e-10
    pt = point_type(sff)
    assert not pt["totally_geodesic"] and not pt["totally_umbilical"]


def test_sphere_point_type(euclid3):
    from conftest import sphere

    sff = second_fundamental_form(sphere(2.0, euclid3), [0.9, 0.4])
    pt = point_type(sff)
    assert pt["totally_umbilical"] and not pt["totally_geodesic"]
    assert norms(sff)["H_sq"] == pytest.approx(0.25, abs=1e-12)


def test_induced_connection_matches_induced_metric():
    imm, u = random_graph(11)
    a = induced_connection(imm).coefficients(u).components
    b = levi_civita(InducedMetric(imm)).coefficients(u).components
    np.testing.assert_allclose(a, b, atol=1e-10)


def test_sff_symmetry_and_normality_on_graphs():
    for seed in range(5):
        imm, u = random_graph(seed, n=4, m=2)
        sff = second_fundamental_form(imm, u)
        assert sff.symmetry_residual() <= 1e-10
        assert sff.normality_residual() <= 1e-10


def test_hbar_antisymmetry_is_normal_torsion():
    imm, u = random_graph(4)
    h = second_fundamental_form(imm, u)
    hbar = qsm_second_fundamental_form(imm, u, h.frame)
    chk = qsm_form_checks(imm, u, h, hbar)
    assert chk["symmetry_vs_torsion"] <= 1e-10
    assert hbar.normality_residual() <= 1e-10


def test_hbar_on_slice(slice_exp):
    """h-bar(X, Y) = h(X, Y) - alpha g(X, Y) xi on the slice, so h-bar vanishes for alpha = 1."""
    u = [0.1, 0.2]
    h = second_fundamental_form(slice_exp, u)
    hbar = qsm_second_fundamental_form(slice_exp, u, h.frame)
    assert np.max(np.abs(hbar.vectors)) <= 1e-12
    chk = qsm_form_checks(slice_exp, u, h, hbar)
    assert chk["hbar_minus_h"] == pytest.approx(1.0, abs=1e-12)
    assert chk["tangential_leakage"] == pytest.approx(1.0, abs=1e-12)


def test_degenerate_structure_hbar_equals_h():
    s = LcsStructure.degenerate(MetricField.minkowski(3))
    imm = Immersion(s, ["0.2*u1^2", "u1", "u2"], 2)
    h = second_fundamental_form(imm, [0.1, 0.2])
    hbar = qsm_second_fundamental_form(imm, [0.1, 0.2], h.frame)
    assert qsm_form_checks(imm, [0.1, 0.2], h, hbar)["hbar_minus_h"] == 0.0


def test_slice_constructor_variants():
    s = warped_product(4, "exp(t)")
    imm = Immersion.slice(s, 2, 0.5)
    np.testing.assert_allclose(imm.ambient_point([0.1, 0.2]), [0.5, 0.1, 0.2, 0.0])
    other = Immersion.slice(s, 3, 0.7, coordinate=2)
    np.testing.assert_allclose(other.ambient_point([0.1, 0.2, 0.3]), [0.1, 0.2, 0.7, 0.3])
