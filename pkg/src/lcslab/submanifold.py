"""Submanifolds of an (LCS)_n chart: immersions, frames and extrinsic geometry.

An :class:`Immersion` maps parameters ``u = (u1..um)`` to ambient
coordinates.  Ambient fields are evaluated along ``F(u)`` by composing jets,
so the induced metric and the induced connections come with as many
derivatives in ``u`` as the curvature code needs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .expr import Expression, Taylor, inverse, jeinsum, parse, stack
from .lcs import LcsStructure
from .qsm import QsmConnection
from .riemann import Connection, MetricField
from .tensor import Tensor, TensorError, as_point

DEGENERATE_EIGEN = 1e-8
NORMAL_SKIP = 1e-6
FRAME_TOL = 1e-9
CLASSIFY_TOL = 1e-7
NULL_SV = 1e-8
NORMAL_TOL = 1e-8


class DegenerateImmersionError(TensorError):
    pass


class FrameError(TensorError):
    pass


def _param_names(parameters) -> tuple[str, ...]:
    if isinstance(parameters, int):
        return tuple(f"u{i}" for i in range(1, parameters + 1))
    return tuple(parameters)


class Immersion:
    """``F: U -> ambient chart`` given by one expression per ambient coordinate."""

    def __init__(self, ambient: LcsStructure, components, parameters, kind: str = "parametric"):
        self.ambient = ambient
        self.parameters = _param_names(parameters)
        self.m = len(self.parameters)
        self.n = ambient.dim
        self.kind = kind
        if not 1 <= self.m < self.n:
            raise DegenerateImmersionError(
                f"submanifold dimension m={self.m} must satisfy 1 <= m < n={self.n}"
            )
        if len(components) != self.n:
            raise DegenerateImmersionError(
                f"{len(components)} component expressions for an ambient of dimension {self.n}"
            )
        self.components = [
            parse(c, self.parameters) if isinstance(c, str) else c.rebind(self.parameters)
            for c in components
        ]

    @classmethod
    def slice(cls, ambient: LcsStructure, m: int, value: float, coordinate: int = 0,
              parameters=None) -> "Immersion":
        """Fix ambient coordinate ``coordinate`` at ``value``.

        The parameters run along the next ``m`` coordinates in index order;
        any coordinates left over (``m < n - 1``) are held at 0.
        """
        n = ambient.dim
        names = _param_names(parameters if parameters is not None else m)
        if not 0 <= coordinate < n:
            raise DegenerateImmersionError(f"slice coordinate {coordinate} out of range")
        free = [i for i in range(n) if i != coordinate]
        comps = [Expression.constant(0.0, names) for _ in range(n)]
        comps[coordinate] = Expression.constant(float(value), names)
        for a, i in enumerate(free[: len(names)]):
            comps[i] = parse(names[a], names)
        return cls(ambient, comps, names, kind="slice")

    @classmethod
    def graph(cls, ambient: LcsStructure, components, parameters) -> "Immersion":
        """First ``n - m`` ambient coordinates given as functions of the
        parameters; the remaining ``m`` coordinates equal the parameters."""
        names = _param_names(parameters)
        n, m = ambient.dim, len(names)
        if len(components) != n - m:
            raise DegenerateImmersionError(f"graph needs n-m={n - m} components, got {len(components)}")
        comps = list(components) + [parse(p, names) for p in names]
        return cls(ambient, comps, names, kind="graph")

    @cached_property
    def qsm(self) -> QsmConnection:
        return QsmConnection(self.ambient)

    def coords_of(self, c: Taylor) -> Taylor:
        """Ambient coordinates ``F`` at parameter jets ``c``."""
        args = list(c)
        return stack([e.evaluate(args) for e in self.components], basis=c.basis)

    def ambient_point(self, u) -> np.ndarray:
        return self.coords_of(Taylor.variables(as_point(u).coords, 0)).value

    def jacobian(self, u) -> np.ndarray:
        """``J[A, a] = dF^A/du_a``."""
        f = self.coords_of(Taylor.variables(as_point(u).coords, 1))
        return f.grad().value.T

    def ambient_fields(self, u) -> dict:
        x = self.ambient_point(u)
        return {k: v.value for k, v in self.ambient.fields_at(Taylor.variables(x, 0)).items()}


def _induced_from(imm: Immersion, c: Taylor) -> Taylor:
    f = imm.coords_of(c)
    jac = f.grad()  # [a, A]
    g = imm.ambient.metric.of_coords(f)
    return jeinsum("ai,ij,bj->ab", jac, g, jac)


class InducedMetric(MetricField):
    """``g_ab = g(dF/du_a, dF/du_b)`` as a metric field on the parameter chart.

    ``of_coords`` returns one order less than the jets it is given, because
    the immersion is differentiated once; :meth:`jet` compensates.
    """

    def __init__(self, imm: Immersion):
        self.immersion = imm
        super().__init__(imm.m, lambda c: _induced_from(imm, c), signature=0,
                         coordinates=imm.parameters)

    def jet(self, point, order: int) -> Taylor:
        p = as_point(point)
        if p.dim != self.dim:
            raise TensorError(f"point has dimension {p.dim}, field has {self.dim}")
        return _induced_from(self.immersion, Taylor.variables(p.coords, order + 1))


def induced_metric(imm: Immersion, u) -> Tensor:
    g = InducedMetric(imm).at(u).components
    g = 0.5 * (g + g.T)
    eig = np.linalg.eigvalsh(g)
    if eig[0] <= DEGENERATE_EIGEN:
        raise DegenerateImmersionError(
            f"induced metric at u={list(as_point(u).coords)} is not positive-definite "
            f"(smallest eigenvalue {eig[0]:.3e}); the immersion is degenerate or not spacelike"
        )
    return Tensor("dd", g)


# frames ----------------------------------------------------------------------


@dataclass
class SubmanifoldFrame:
    """Orthonormal tangent frame and pseudo-orthonormal normal frame at F(u).

    ``tangent`` and ``normal`` hold ambient vectors as columns;
    ``coefficients[a, i]`` expresses ``e_i`` in the coordinate basis
    ``d/du_a``, and ``eps[r] = g(e_r, e_r)``.
    """

    point: np.ndarray
    ambient_point: np.ndarray
    metric: np.ndarray
    jacobian: np.ndarray
    coefficients: np.ndarray
    tangent: np.ndarray
    normal: np.ndarray
    eps: np.ndarray

    @property
    def m(self) -> int:
        return self.tangent.shape[1]

    @property
    def full(self) -> np.ndarray:
        return np.hstack([self.tangent, self.normal])

    def gram(self) -> np.ndarray:
        e = self.full
        return e.T @ self.metric @ e

    def gram_residual(self) -> float:
        expected = np.diag(np.concatenate([np.ones(self.m), self.eps]))
        return float(np.max(np.abs(self.gram() - expected)))

    def inner(self, x, y) -> float:
        return float(np.asarray(x) @ self.metric @ np.asarray(y))

    def tangential_components(self, v) -> np.ndarray:
        return self.tangent.T @ self.metric @ np.asarray(v, dtype=float)

    def normal_part(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        return v - self.tangent @ self.tangential_components(v)


def _build_frame(point, x, g, jac) -> SubmanifoldFrame:
    n, m = jac.shape
    ip = lambda a, b: float(a @ g @ b)  # noqa: E731

    tangent, coeffs = [], []
    for a in range(m):
        v = jac[:, a].copy()
        c = np.zeros(m)
        c[a] = 1.0
        for _ in range(2):
            for e, ce in zip(tangent, coeffs):
                s = ip(v, e)
                v = v - s * e
                c = c - s * ce
        q = ip(v, v)
        if q <= DEGENERATE_EIGEN:
            raise DegenerateImmersionError(f"tangent Gram-Schmidt hit a non-spacelike vector (g(v,v)={q:.3e})")
        r = np.sqrt(q)
        tangent.append(v / r)
        coeffs.append(c / r)

    candidates = [np.eye(n)[i] for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            candidates.append(np.eye(n)[i] + np.eye(n)[j])
            candidates.append(np.eye(n)[i] - np.eye(n)[j])

    normals, eps = [], []
    for v in candidates:
        if len(normals) == n - m:
            break
        v = v.astype(float)
        for _ in range(2):
            for e in tangent:
                v = v - ip(v, e) * e
            for e, s in zip(normals, eps):
                v = v - s * ip(v, e) * e
        q = ip(v, v)
        if abs(q) <= NORMAL_SKIP:
            continue
        normals.append(v / np.sqrt(abs(q)))
        eps.append(1.0 if q > 0 else -1.0)
    if len(normals) != n - m:
        raise FrameError(f"could only complete {len(normals)} of {n - m} normal directions")

    return SubmanifoldFrame(
        point=np.asarray(point, dtype=float),
        ambient_point=x,
        metric=g,
        jacobian=jac,
        coefficients=np.array(coeffs).T,
        tangent=np.array(tangent).T,
        normal=np.array(normals).T,
        eps=np.array(eps),
    )


def submanifold_frame(imm: Immersion, u) -> SubmanifoldFrame:
    induced_metric(imm, u)  # raises on degenerate points
    p = as_point(u)
    x = imm.ambient_point(p)
    g = imm.ambient.metric.at(x).components
    frame = _build_frame(p.coords, x, g, imm.jacobian(p))
    if frame.gram_residual() > FRAME_TOL:
        raise FrameError(f"frame Gram residual {frame.gram_residual():.3e} exceeds {FRAME_TOL}")
    return frame


# Gauss formula ----------------------------------------------------------------


def _gauss_split(imm: Immersion, c: Taylor, connection: str):
    """Jets of ``X[a, b] = nabla~_{d_a} d_b`` along F, plus J and the induced metric.

    ``connection`` is ``"levi-civita"`` or ``"quarter-symmetric"``.  The
    returned jets have order ``c.order - 2``.
    """
    f = imm.coords_of(c)
    jac = f.grad()  # [a, A]
    hess = jac.grad()  # [b, a, A]
    g = imm.ambient.metric.of_coords(f)
    gam = imm.ambient.metric.christoffel_at(f)
    if connection == "quarter-symmetric":
        gam = gam + imm.qsm.difference_of(f)
    elif connection != "levi-civita":
        raise ValueError(f"unknown connection {connection!r}")
    x = hess.transpose(1, 0, 2) + jeinsum("kij,ai,bj->abk", gam, jac, jac)
    g_ind = jeinsum("ai,ij,bj->ab", jac, g, jac)
    return x, jac, g, g_ind


def _tangent_coefficients(x, jac, g, g_ind) -> Taylor:
    """``Gamma[c, a, b]`` such that the tangential part of X[a, b] is Gamma^c d_c."""
    g_inv = inverse(g_ind, np.linalg.inv(g_ind.value))
    return jeinsum("cd,di,ik,abk->cab", g_inv, jac, g, x)


def induced_connection(imm: Immersion, connection: str = "levi-civita") -> Connection:
    """Tangential part of the ambient connection, as a connection on the parameter chart."""

    def jet_fn(point, order):
        x, jac, g, g_ind = _gauss_split(imm, Taylor.variables(point.coords, order + 2), connection)
        return _tangent_coefficients(x, jac, g, g_ind)

    return Connection(imm.m, jet_fn, torsion_free=connection == "levi-civita")


@dataclass
class SecondFundamentalForm:
    """``coordinate[a, b]`` = h(d_a, d_b) and ``vectors[i, j]`` = h(e_i, e_j),
    both ambient vectors; ``components[r, i, j] = g(h(e_i, e_j), e_r)``."""

    frame: SubmanifoldFrame
    coordinate: np.ndarray
    vectors: np.ndarray
    components: np.ndarray
    connection: str = "levi-civita"

    @property
    def eps(self) -> np.ndarray:
        return self.frame.eps

    @property
    def m(self) -> int:
        return self.frame.m

    def symmetry_residual(self) -> float:
        return float(np.max(np.abs(self.coordinate - self.coordinate.transpose(1, 0, 2))))

    def normality_residual(self) -> float:
        t = np.einsum("ijk,kl,la->ija", self.vectors, self.frame.metric, self.frame.tangent)
        return float(np.max(np.abs(t)))


def _form(imm: Immersion, u, connection: str, frame: SubmanifoldFrame | None = None) -> SecondFundamentalForm:
    p = as_point(u)
    frame = frame if frame is not None else submanifold_frame(imm, p)
    x, jac, g, g_ind = _gauss_split(imm, Taylor.variables(p.coords, 2), connection)
    gam = _tangent_coefficients(x, jac, g, g_ind).value
    coord = x.value - np.einsum("Ac,cab->abA", frame.jacobian, gam)
    c = frame.coefficients
    vectors = np.einsum("ai,bj,abA->ijA", c, c, coord)
    comps = np.einsum("ijA,AB,Br->rij", vectors, frame.metric, frame.normal)
    return SecondFundamentalForm(frame, coord, vectors, comps, connection)


def second_fundamental_form(imm: Immersion, u, frame: SubmanifoldFrame | None = None) -> SecondFundamentalForm:
    return _form(imm, u, "levi-civita", frame)


def qsm_second_fundamental_form(imm: Immersion, u, frame: SubmanifoldFrame | None = None) -> SecondFundamentalForm:
    """h-bar: normal part of the quarter-symmetric Gauss formula (not symmetric in general)."""
    return _form(imm, u, "quarter-symmetric", frame)


def shape_operator(sff: SecondFundamentalForm, v) -> Tensor:
    """``A_V`` on the orthonormal tangent frame: ``g(A_V e_i, e_j) = g(h(e_i, e_j), V)``."""
    v = np.asarray(v, dtype=float)
    leak = np.max(np.abs(sff.frame.tangential_components(v)))
    if leak > NORMAL_TOL:
        raise TensorError(f"shape operator needs a normal vector; tangential component {leak:.3e}")
    s = np.einsum("ijA,AB,B->ij", sff.vectors, sff.frame.metric, v)
    return Tensor("ud", 0.5 * (s + s.T) if sff.connection == "levi-civita" else s)


def shape_spectrum(sff: SecondFundamentalForm, v) -> np.ndarray:
    """Sorted eigenvalues of the (symmetric) shape operator along ``v``."""
    return np.linalg.eigvalsh(shape_operator(sff, v).components)


def mean_curvature(sff: SecondFundamentalForm) -> np.ndarray:
    return np.einsum("iiA->A", sff.vectors) / sff.m


def norms(sff: SecondFundamentalForm) -> dict[str, float]:
    """Signed ``H_sq = g(H, H)`` and ``h_sq``, plus unsigned frame-component sums."""
    g = sff.frame.metric
    h_vec = mean_curvature(sff)
    h_r = h_vec @ g @ sff.frame.normal
    return {
        "H_sq": float(h_vec @ g @ h_vec),
        "h_sq": float(np.einsum("ijA,AB,ijB->", sff.vectors, g, sff.vectors)),
        "h_sq_frame": float(np.einsum("r,rij,rij->", sff.eps, sff.components, sff.components)),
        "H_sq_unsigned": float(np.sum(h_r ** 2)),
        "h_sq_unsigned": float(np.sum(sff.components ** 2)),
    }


# predicates --------------------------------------------------------------------


@dataclass
class Classification:
    is_invariant: bool
    is_totally_real: bool
    is_c_totally_real: bool
    residuals: dict = field(default_factory=dict)
    tol: float = CLASSIFY_TOL


def classify(imm: Immersion, u, tol: float = CLASSIFY_TOL, frame: SubmanifoldFrame | None = None) -> Classification:
    """Literal predicates on phi and eta at F(u), with their residual maxima."""
    frame = frame if frame is not None else submanifold_frame(imm, u)
    f = imm.ambient_fields(u)
    g, eta, phi = f["g"], f["eta"], f["phi"]
    phi_t = phi @ frame.tangent  # columns phi e_a
    res = {
        "c_totally_real": float(np.max(np.abs(eta @ frame.tangent))),
        "totally_real": float(np.max(np.abs(phi_t.T @ g @ frame.tangent))),
        "invariant": float(np.max(np.abs(phi_t.T @ g @ frame.normal))),
    }
    return Classification(
        is_invariant=res["invariant"] <= tol,
        is_totally_real=res["totally_real"] <= tol,
        is_c_totally_real=res["c_totally_real"] <= tol,
        residuals=res,
        tol=tol,
    )


@dataclass
class NullSpace:
    """Basis of ``N_x`` as rows of tangent-frame coefficients."""

    basis: np.ndarray
    singular_values: np.ndarray

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def projection_residual(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(np.linalg.norm(x - self.basis.T @ (self.basis @ x)))


def relative_null_space(sff: SecondFundamentalForm, threshold: float = NULL_SV) -> NullSpace:
    m = sff.m
    stacked = sff.components.transpose(2, 0, 1).reshape(-1, m)  # rows (j, r), columns i
    _, s, vt = np.linalg.svd(stacked)
    s_full = np.zeros(m)
    s_full[: s.size] = s
    return NullSpace(vt[s_full <= threshold], s)


def point_type(sff: SecondFundamentalForm, tol: float = CLASSIFY_TOL) -> dict:
    h_r = mean_curvature(sff) @ sff.frame.metric @ sff.frame.normal
    umbilic = sff.components - np.einsum("r,ij->rij", h_r, np.eye(sff.m))
    geo = float(np.max(np.abs(sff.components)))
    umb = float(np.max(np.abs(umbilic)))
    return {
        "totally_geodesic": geo <= tol,
        "totally_umbilical": umb <= tol,
        "geodesic_residual": geo,
        "umbilical_residual": umb,
    }


def qsm_form_checks(imm: Immersion, u, h: SecondFundamentalForm, hbar: SecondFundamentalForm) -> dict[str, float]:
    """Residuals relating h-bar to h.

    ``hbar_minus_h`` is the claim h-bar = h, ``hbar_shift`` the claim
    h-bar(X,Y) = h(X,Y) + eta(Y) phi X, ``tangential_leakage`` the size of
    g(phi X, Y) that both claims drop, and ``symmetry_vs_torsion`` compares
    the antisymmetric part of h-bar with the normal part of the torsion.
    """
    frame = h.frame
    f = imm.ambient_fields(u)
    eta_t = f["eta"] @ frame.tangent  # eta(e_j)
    phi_t = f["phi"] @ frame.tangent  # phi e_i as columns
    diff = hbar.vectors - h.vectors
    shift = np.einsum("j,Ai->ijA", eta_t, phi_t)
    torsion = np.einsum("j,Ai->ijA", eta_t, phi_t) - np.einsum("i,Aj->ijA", eta_t, phi_t)
    torsion_n = np.stack([[frame.normal_part(torsion[i, j]) for j in range(frame.m)] for i in range(frame.m)])
    antisym = hbar.vectors - hbar.vectors.transpose(1, 0, 2)
    return {
        "hbar_minus_h": float(np.max(np.abs(diff))),
        "hbar_shift": float(np.max(np.abs(diff - shift))),
        "tangential_leakage": float(np.max(np.abs(phi_t.T @ frame.metric @ frame.tangent))),
        "symmetry_defect": float(np.max(np.abs(antisym))),
        "symmetry_vs_torsion": float(np.max(np.abs(antisym - torsion_n))),
    }
