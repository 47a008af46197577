"""Metric fields, affine connections and curvature.

Conventions: ``Gamma[k, i, j]`` is the ``d_k`` component of ``nabla_{d_i} d_j``
(the first lower index is the direction), ``R(X,Y)Z = nabla_X nabla_Y Z -
nabla_Y nabla_X Z - nabla_[X,Y] Z`` with components ``R[l, k, i, j]`` of
``R(d_i, d_j) d_k``, and ``R(X,Y,Z,W) = g(R(X,Y)Z, W)``.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .expr import Taylor, inverse, jeinsum, parse, stack
from .tensor import Tensor, TensorError, TensorField, as_point, invert_metric

DEGENERATE_PLANE = 1e-10


class MetricSignatureError(TensorError):
    pass


class DegeneratePlaneError(TensorError):
    pass


def _stack_grid(items, shape, basis):
    return stack(items, basis=basis).reshape(shape)


class MetricField(TensorField):
    """Symmetric (0,2) field with a declared number of negative eigenvalues.

    ``derivative_of_coords`` (optional) returns ``dg[k, i, j] = d_k g_ij`` at
    arbitrary coordinate jets; expression-backed metrics get it from
    symbolic differentiation, which is what lets ambient Christoffel symbols
    be evaluated along an immersion.
    """

    def __init__(self, dim: int, of_coords: Callable, signature: int = 1,
                 derivative_of_coords: Callable | None = None, coordinates=None):
        super().__init__("dd", dim, of_coords)
        self.signature = signature
        self.derivative_of_coords = derivative_of_coords
        self.coordinates = tuple(coordinates) if coordinates is not None else None

    @classmethod
    def from_expressions(cls, components, coordinates, signature: int = 1) -> "MetricField":
        """Build from an n x n grid of expressions; only the upper triangle is read."""
        coordinates = tuple(coordinates)
        n = len(coordinates)
        exprs = [[None] * n for _ in range(n)]
        for i in range(n):
            for j in range(i, n):
                e = components[i][j]
                e = parse(e, coordinates) if isinstance(e, str) else e.rebind(coordinates)
                exprs[i][j] = exprs[j][i] = e
        dexprs = [[[exprs[i][j].derivative(x) for j in range(n)] for i in range(n)] for x in coordinates]

        def of_coords(c):
            args = list(c)
            return _stack_grid([exprs[i][j].evaluate(args) for i in range(n) for j in range(n)], (n, n), c.basis)

        def derivative_of_coords(c):
            args = list(c)
            return _stack_grid(
                [dexprs[k][i][j].evaluate(args) for k in range(n) for i in range(n) for j in range(n)],
                (n, n, n),
                c.basis,
            )

        metric = cls(n, of_coords, signature, derivative_of_coords, coordinates)
        metric.expressions = exprs
        return metric

    @classmethod
    def minkowski(cls, n: int) -> "MetricField":
        coords = ("t",) + tuple(f"x{i}" for i in range(1, n))
        comps = [["0"] * n for _ in range(n)]
        comps[0][0] = "-1"
        for i in range(1, n):
            comps[i][i] = "1"
        return cls.from_expressions(comps, coords, signature=1)

    @classmethod
    def euclidean(cls, n: int) -> "MetricField":
        coords = tuple(f"x{i}" for i in range(1, n + 1))
        comps = [["1" if i == j else "0" for j in range(n)] for i in range(n)]
        return cls.from_expressions(comps, coords, signature=0)

    def check_signature(self, point) -> np.ndarray:
        g = self.at(point).components
        eig = np.linalg.eigvalsh(g)
        negative = int(np.sum(eig < 0))
        if negative != self.signature or np.min(np.abs(eig)) < 1e-12:
            raise MetricSignatureError(
                f"metric eigenvalues {eig} do not have signature {self.signature}"
            )
        return eig

    def christoffel_at(self, coords: Taylor) -> Taylor:
        if self.derivative_of_coords is None:
            raise TensorError("metric has no coordinate-derivative representation")
        return christoffel_from(self.of_coords(coords), self.derivative_of_coords(coords))


def christoffel_from(g: Taylor, dg: Taylor) -> Taylor:
    """Levi-Civita symbols from metric jets and ``dg[k, i, j] = d_k g_ij``."""
    g_inv = inverse(g, invert_metric(g.value))
    s = dg + dg.transpose(1, 0, 2) - dg.transpose(1, 2, 0)
    return jeinsum("kl,ijl->kij", g_inv, s) * 0.5


class Connection:
    """Affine connection given by coefficient jets on a chart."""

    def __init__(self, dim: int, jet_fn: Callable[[object, int], Taylor], torsion_free: bool,
                 of_coords: Callable | None = None):
        self.dim = dim
        self._jet_fn = jet_fn
        self.torsion_free = torsion_free
        self.of_coords = of_coords

    def jet(self, point, order: int) -> Taylor:
        return self._jet_fn(as_point(point), order)

    def coefficients(self, point) -> Tensor:
        return Tensor("udd", self.jet(point, 0).value)

    def torsion(self, point) -> Tensor:
        gam = self.coefficients(point).components
        return Tensor("udd", gam - gam.transpose(0, 2, 1))


def levi_civita(metric: MetricField) -> Connection:
    if metric.derivative_of_coords is not None:
        def of_coords(c):
            return metric.christoffel_at(c)

        def jet_fn(point, order):
            return of_coords(Taylor.variables(point.coords, order))

        return Connection(metric.dim, jet_fn, torsion_free=True, of_coords=of_coords)

    def jet_fn(point, order):
        g = metric.jet(point, order + 1)
        return christoffel_from(g, g.grad())

    return Connection(metric.dim, jet_fn, torsion_free=True)


def covariant_components(kinds: str, t: np.ndarray, dt: np.ndarray, gamma: np.ndarray) -> np.ndarray:
    """Components of nabla T with the derivative slot appended last.

    ``dt[m, ...]`` are partial derivatives; works for any valence.
    """
    out = np.moveaxis(dt, 0, -1).copy()
    for p, kind in enumerate(kinds):
        if kind == "u":
            tmp = np.tensordot(t, gamma, axes=([p], [2]))  # ..., a, m
            out += np.moveaxis(tmp, -2, p)
        else:
            tmp = np.tensordot(t, gamma, axes=([p], [0]))  # ..., m, c
            out -= np.moveaxis(tmp, -1, p)
    return out


def covariant_derivative(conn: Connection, field: TensorField, point) -> Tensor:
    """``nabla T`` at ``point``; the new covariant slot is the last axis."""
    r, s = field.valence
    if r + s > 2:
        raise TensorError(f"covariant_derivative supports r+s <= 2, got {(r, s)}")
    jet = field.jet(point, 1)
    gamma = conn.coefficients(point).components
    comps = covariant_components(field.kinds, jet.value, jet.grad().value, gamma)
    return Tensor(field.kinds + "d", comps)


def riemann_from_jet(gamma: Taylor) -> np.ndarray:
    """``R[l, k, i, j]`` from an order >= 1 jet of connection coefficients."""
    g = gamma.value
    dg = gamma.grad().value  # dg[m, k, i, j] = d_m Gamma^k_ij
    return (
        np.einsum("iljk->lkij", dg)
        - np.einsum("jlik->lkij", dg)
        + np.einsum("lim,mjk->lkij", g, g)
        - np.einsum("ljm,mik->lkij", g, g)
    )


def riemann(conn: Connection, point) -> Tensor:
    return Tensor("uddd", riemann_from_jet(conn.jet(point, 1)))


def lower_curvature(r13: np.ndarray, g: np.ndarray) -> np.ndarray:
    """``R(d_i, d_j, d_k, d_w) = g_wl R^l_kij``."""
    return np.einsum("wl,lkij->ijkw", g, r13)


def curvature_0_4(conn: Connection, metric: MetricField, point) -> Tensor:
    r13 = riemann(conn, point).components
    return Tensor("dddd", lower_curvature(r13, metric.at(point).components))


def sectional(metric, r04, x, y) -> float:
    g = np.asarray(metric, dtype=float)
    r = np.asarray(r04, dtype=float)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    gram = (x @ g @ x) * (y @ g @ y) - (x @ g @ y) ** 2
    if abs(gram) <= DEGENERATE_PLANE:
        raise DegeneratePlaneError(f"plane Gram determinant {gram:.3e} is degenerate")
    return float(np.einsum("ijkl,i,j,k,l->", r, x, y, y, x) / gram)


def ricci_from_04(r04: np.ndarray, g_inv: np.ndarray) -> np.ndarray:
    """``Ric(Y,Z) = trace(X -> R(X,Y)Z) = g^{il} R_{i j k l}``."""
    return np.einsum("il,ijkl->jk", g_inv, r04)


def ricci(conn: Connection, metric: MetricField, point) -> Tensor:
    g = metric.at(point).components
    r04 = lower_curvature(riemann(conn, point).components, g)
    return Tensor("dd", ricci_from_04(r04, invert_metric(g)))


def scalar(conn: Connection, metric: MetricField, point) -> float:
    g_inv = invert_metric(metric.at(point).components)
    return float(np.einsum("jk,jk->", g_inv, ricci(conn, metric, point).components))


def metric_derivative(conn: Connection, metric: MetricField, point) -> Tensor:
    """``(nabla_m g)_{ij}`` stored as ``[i, j, m]``; zero for metric connections."""
    return covariant_derivative(conn, metric, point)


__all__ = [
    "Connection",
    "DegeneratePlaneError",
    "MetricField",
    "MetricSignatureError",
    "christoffel_from",
    "covariant_components",
    "covariant_derivative",
    "curvature_0_4",
    "levi_civita",
    "lower_curvature",
    "metric_derivative",
    "ricci",
    "ricci_from_04",
    "riemann",
    "riemann_from_jet",
    "scalar",
    "sectional",
]
