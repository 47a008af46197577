"""Quarter-symmetric metric connection of an (LCS)_n structure.

``nabla-bar_X Y = nabla_X Y + eta(Y) phi X - g(phi X, Y) xi`` where nabla is
the Levi-Civita connection.  The difference tensor is stored as
``A[k, i, j]``, the ``d_k`` component of ``A(d_i, d_j)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .expr import Taylor, jeinsum
from .lcs import LcsStructure
from .riemann import (
    Connection,
    MetricField,
    covariant_components,
    levi_civita,
    lower_curvature,
    riemann_from_jet,
)
from .tensor import Tensor, as_point


def difference_tensor(fields: dict) -> Taylor:
    """``A^k_ij = eta_j phi^k_i - g(phi d_i, d_j) xi^k`` from structure fields."""
    g, xi, eta, phi = fields["g"], fields["xi"], fields["eta"], fields["phi"]
    g_phi = jeinsum("lj,li->ij", g, phi)
    return jeinsum("ki,j->kij", phi, eta) - jeinsum("k,ij->kij", xi, g_phi)


class QsmConnection(Connection):
    def __init__(self, structure: LcsStructure):
        self.structure = structure
        self.base = levi_civita(structure.metric)

        def jet_fn(point, order):
            return self._coeffs_of(Taylor.variables(point.coords, order))

        super().__init__(structure.dim, jet_fn, torsion_free=False, of_coords=self._coeffs_of)

    def difference_of(self, coords: Taylor) -> Taylor:
        return difference_tensor(self.structure.fields_at(coords))

    def _coeffs_of(self, coords: Taylor) -> Taylor:
        return self.base.of_coords(coords) + self.difference_of(coords)

    def difference(self, point, x, y) -> np.ndarray:
        a = self.difference_of(Taylor.variables(as_point(point).coords, 0)).value
        return np.einsum("kij,i,j->k", a, x, y)


def build_qsm(s: LcsStructure) -> QsmConnection:
    return QsmConnection(s)


def curvature_routes(c: QsmConnection, point) -> tuple[np.ndarray, np.ndarray]:
    """``R-bar[l, k, i, j]`` from the coefficients and from the expansion
    ``R + (nabla_X A)(Y,Z) - (nabla_Y A)(X,Z) + A(X, A(Y,Z)) - A(Y, A(X,Z))``."""
    p = as_point(point)
    coords = Taylor.variables(p.coords, 1)
    gamma = c.base.of_coords(coords)
    a = c.difference_of(coords)
    route_a = riemann_from_jet(gamma + a)

    r = riemann_from_jet(gamma)
    av = a.value
    nabla_a = covariant_components("udd", av, a.grad().value, gamma.value)  # [l, j, k, i] = (nabla_i A)^l_jk
    route_b = (
        r
        + np.einsum("ljki->lkij", nabla_a)
        - np.einsum("likj->lkij", nabla_a)
        + np.einsum("lim,mjk->lkij", av, av)
        - np.einsum("ljm,mik->lkij", av, av)
    )
    return route_a, route_b


def qsm_curvature(c: QsmConnection, point) -> Tensor:
    """``R-bar(X,Y,Z,W) = g(R-bar(X,Y)Z, W)`` on the coordinate frame."""
    route_a, _ = curvature_routes(c, point)
    g = c.structure.metric.at(point).components
    return Tensor("dddd", lower_curvature(route_a, g))


def torsion_residual(c: QsmConnection, point) -> float:
    """max |T(X,Y) - (eta(Y) phi X - eta(X) phi Y)| on frame pairs."""
    p = as_point(point)
    f = c.structure.fields_at(Taylor.variables(p.coords, 0))
    eta, phi = f["eta"].value, f["phi"].value
    expected = np.einsum("ki,j->kij", phi, eta) - np.einsum("kj,i->kij", phi, eta)
    return float(np.max(np.abs(c.torsion(p).components - expected)))


def metricity_residual(c: Connection, metric: MetricField, point) -> float:
    p = as_point(point)
    g = metric.jet(p, 1)
    gamma = c.coefficients(p).components
    nabla_g = covariant_components("dd", g.value, g.grad().value, gamma)
    return float(np.max(np.abs(nabla_g)))


def curvature_relation_rhs(r04: np.ndarray, fields: dict) -> np.ndarray:
    """Right side of the R-bar / R relation on the coordinate frame, ``[i, j, k, w]``."""
    g, eta, phi = fields["g"], fields["eta"], fields["phi"]
    alpha = float(fields["alpha"])
    g_phi = np.einsum("lj,li->ij", g, phi)  # g(phi d_i, d_j)
    return (
        r04
        + (2 * alpha - 1)
        * (np.einsum("ik,jw->ijkw", g_phi, g_phi) - np.einsum("jk,iw->ijkw", g_phi, g_phi))
        + alpha * np.einsum("j,iw,k->ijkw", eta, g, eta)
        - alpha * np.einsum("i,jw,k->ijkw", eta, g, eta)
        + alpha * np.einsum("jk,i,w->ijkw", g, eta, eta)
        - alpha * np.einsum("ik,j,w->ijkw", g, eta, eta)
    )


@dataclass
class IdentityReport:
    name: str
    point: list[float]
    max_residual: float
    lhs: np.ndarray = field(repr=False)
    rhs: np.ndarray = field(repr=False)
    extras: dict = field(default_factory=dict)


def verify_curvature_relation(s: LcsStructure, point, connection: QsmConnection | None = None) -> IdentityReport:
    """Compare ``R-bar(X,Y,Z,W)`` with the literature relation to ``R``.

    Report-only: the residual is measured, never asserted.  ``extras`` carries
    the hard checks of the connection itself (torsion, metricity, agreement
    of the two curvature routes).
    """
    p = as_point(point)
    c = connection if connection is not None else build_qsm(s)
    route_a, route_b = curvature_routes(c, p)
    fields = {k: v.value for k, v in s.fields_at(Taylor.variables(p.coords, 0)).items()}
    g = fields["g"]
    lhs = lower_curvature(route_a, g)
    r04 = lower_curvature(riemann_from_jet(c.base.jet(p, 1)), g)
    rhs = curvature_relation_rhs(r04, fields)
    extras = {
        "alpha": float(fields["alpha"]),
        "torsion_residual": torsion_residual(c, p),
        "metricity_residual": metricity_residual(c, s.metric, p),
        "curvature_route_gap": float(np.max(np.abs(route_a - route_b))),
    }
    return IdentityReport(
        "rel2.18", [float(x) for x in p.coords], float(np.max(np.abs(lhs - rhs))), lhs, rhs, extras
    )
