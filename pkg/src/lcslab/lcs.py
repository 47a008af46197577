"""(LCS)_n structures from warped products, and their structure equations."""

from __future__ import annotations

import numpy as np

from .expr import Expression, Taylor, parse, stack
from .expr import nodes
from .riemann import (
    MetricField,
    christoffel_from,
    covariant_components,
    lower_curvature,
    riemann_from_jet,
)
from .tensor import TensorField, as_point

ALPHA_FLOOR = 1e-8

# name -> (warp source, t-interval on which f > 0 and f' != 0)
CATALOG = {
    "exp": ("exp(t)", (-1.0, 1.0)),
    "cosh": ("cosh(t)", (0.2, 1.5)),
    "linear": ("t", (0.5, 2.0)),
    "exp_plus_2": ("exp(t)+2", (-1.0, 1.0)),
}


class StructureError(ValueError):
    pass


def _scalar_field(expr: Expression, dim: int) -> TensorField:
    def of_coords(c):
        out = expr.evaluate(list(c))
        return out if isinstance(out, Taylor) else Taylor.constant(out, c.basis)

    return TensorField("", dim, of_coords)


class LcsStructure:
    """Lorentzian metric with (xi, eta, phi, alpha, rho) on one chart.

    ``xi`` and ``alpha`` are given; ``eta = g(., xi)`` and
    ``phi = Id + eta (x) xi`` are derived, so those two relations hold by
    construction.  ``regular`` is False for test-only structures built by
    :meth:`degenerate`.
    """

    def __init__(self, metric: MetricField, xi: list[Expression], alpha: Expression,
                 rho: Expression, name: str = "", warp: Expression | None = None):
        self.metric = metric
        self.coordinates = metric.coordinates
        self.dim = metric.dim
        self.name = name
        self.warp = warp
        self.regular = True
        n = self.dim
        self.xi_exprs = [e.rebind(self.coordinates) for e in xi]
        self.alpha_expr = alpha.rebind(self.coordinates)
        self.rho_expr = rho.rebind(self.coordinates)

        self.xi = TensorField("u", n, self._xi_of)
        self.eta = TensorField("d", n, self._eta_of)
        self.phi = TensorField("ud", n, self._phi_of)
        self.alpha = _scalar_field(self.alpha_expr, n)
        self.rho = _scalar_field(self.rho_expr, n)

    # fields at arbitrary coordinate jets ----------------------------------

    def _xi_of(self, c):
        args = list(c)
        return stack([e.evaluate(args) for e in self.xi_exprs], basis=c.basis)

    def _eta_of(self, c):
        g = self.metric.of_coords(c)
        xi = self._xi_of(c)
        return (g * xi.reshape(1, self.dim)).sum(axis=1)

    def _phi_of(self, c):
        xi = self._xi_of(c)
        eta = self._eta_of(c)
        return xi.reshape(self.dim, 1) * eta.reshape(1, self.dim) + np.eye(self.dim)

    def fields_at(self, coords: Taylor) -> dict:
        """Every structure field (and the metric) evaluated at coordinate jets."""
        g = self.metric.of_coords(coords)
        xi = self._xi_of(coords)
        eta = (g * xi.reshape(1, self.dim)).sum(axis=1)
        if self.regular:
            phi = xi.reshape(self.dim, 1) * eta.reshape(1, self.dim) + np.eye(self.dim)
        else:
            phi = self._phi_of(coords)
        return {
            "g": g,
            "xi": xi,
            "eta": eta,
            "phi": phi,
            "alpha": self.alpha.of_coords(coords),
            "rho": self.rho.of_coords(coords),
        }

    def alpha_sq_minus_rho(self, point) -> float:
        p = as_point(point)
        a = float(self.alpha.at(p).components)
        r = float(self.rho.at(p).components)
        return a * a - r

    @classmethod
    def degenerate(cls, metric: MetricField, name: str = "degenerate") -> "LcsStructure":
        """Test-only structure with xi = eta = phi = 0 and alpha = rho = 0.

        Makes the quarter-symmetric difference tensor vanish identically; it
        is not an (LCS) structure and never passes :func:`validate_structure`.
        """
        zero = Expression.constant(0.0, metric.coordinates)
        s = cls(metric, [zero] * metric.dim, zero, zero, name=name)
        s.regular = False
        n = metric.dim
        s.phi = TensorField("ud", n, lambda c: Taylor.constant(np.zeros((n, n)), c.basis))
        s._phi_of = s.phi.of_coords
        return s


def warped_product(n: int, warp, t_range=None, samples: int = 257) -> LcsStructure:
    """``-dt^2 + f(t)^2 (dx_1^2 + ... + dx_{n-1}^2)`` with xi = d_t.

    Then eta = -dt, alpha = f'/f and rho = -alpha'.  If ``t_range`` is given
    the warp is checked on a uniform grid: f > 0 and |alpha| > 1e-8.
    """
    if n < 3:
        raise StructureError(f"(LCS)_n needs n >= 3, got {n}")
    f = parse(warp, ("t",)) if isinstance(warp, str) else warp.rebind(("t",))
    coords = ("t",) + tuple(f"x{i}" for i in range(1, n))
    df = f.derivative("t")
    alpha = Expression(nodes.BinOp("/", df.root, f.root), ("t",))
    if df.root == nodes.Number(0.0):
        raise StructureError(f"warp {f} is constant, so alpha = f'/f vanishes")
    rho = Expression(nodes.Neg(alpha.derivative("t").root), ("t",))

    if t_range is not None:
        lo, hi = t_range
        for t in np.linspace(lo, hi, samples):
            fv = float(f.evaluate([t]))
            if fv <= 0:
                raise StructureError(f"warp {f} is not positive at t={t:g}")
            av = float(alpha.evaluate([t]))
            if abs(av) <= ALPHA_FLOOR:
                raise StructureError(f"alpha = f'/f vanishes at t={t:g} for warp {f}")

    f_sq = nodes.BinOp("^", f.root, nodes.Number(2.0))
    comps = [[nodes.Number(0.0)] * n for _ in range(n)]
    comps[0][0] = nodes.Number(-1.0)
    for i in range(1, n):
        comps[i][i] = f_sq
    metric = MetricField.from_expressions(
        [[Expression(c, ("t",)) for c in row] for row in comps], coords, signature=1
    )
    xi = [Expression.constant(1.0 if i == 0 else 0.0, ("t",)) for i in range(n)]
    return LcsStructure(metric, xi, alpha, rho, name=f"warped:{f.source}", warp=f)


def from_catalog_name(name: str, n: int, t_range=None) -> LcsStructure:
    """Resolve ``"warped:<expression>"`` or a bare catalog key."""
    if name.startswith("warped:"):
        return warped_product(n, name[len("warped:"):], t_range)
    if name in CATALOG:
        source, default_range = CATALOG[name]
        return warped_product(n, source, default_range if t_range is None else t_range)
    raise StructureError(f"unknown manifold {name!r}")


def catalog(n: int) -> dict[str, LcsStructure]:
    return {key: warped_product(n, src, rng) for key, (src, rng) in CATALOG.items()}


def _max(a) -> float:
    a = np.asarray(a, dtype=float)
    return float(np.max(np.abs(a))) if a.size else 0.0


def validate_structure(s: LcsStructure, point) -> dict[str, float]:
    """Max-abs residual of each structure equation on the coordinate frame.

    Keys name the relation checked.  ``eta_of_curvature`` is
    ``eta(R(X,Y)Z) - (alpha^2-rho)(g(Y,Z)eta(X) - g(X,Z)eta(Y))``.  The
    curvature relations ``R = phi R -/+ (alpha^2-rho){...} xi`` are reported
    in the sign that matches this module's curvature convention
    (``curvature_xi``, ``curvature_xi_0_4``) and with the opposite sign
    (``*_as_printed``, informational only, excluded from :data:`HARD_KEYS`).
    """
    p = as_point(point)
    n = s.dim
    coords = Taylor.variables(p.coords, 2)
    f2 = s.fields_at(coords)
    dg = s.metric.derivative_of_coords(coords)

    gam_jet = christoffel_from(f2["g"], dg)
    gam = gam_jet.value
    g = f2["g"].value
    xi = f2["xi"].value
    eta = f2["eta"].value
    phi = f2["phi"].value
    alpha = float(f2["alpha"].value)
    rho = float(f2["rho"].value)
    c = alpha * alpha - rho
    eye = np.eye(n)

    d_eta = f2["eta"].grad().value  # [m, j]
    d_xi = f2["xi"].grad().value  # [m, k]
    d_alpha = f2["alpha"].grad().value  # [m]

    nabla_eta = covariant_components("d", eta, d_eta, gam)  # [j, m] = (nabla_m eta)_j
    nabla_xi = covariant_components("u", xi, d_xi, gam)  # [k, m] = (nabla_m xi)^k

    out = {}
    out["g(xi,xi)=-1"] = _max(xi @ g @ xi + 1.0)
    out["eta=g(.,xi)"] = _max(eta - g @ xi)
    # (nabla_X eta)(Y) with X = d_m, Y = d_j
    out["nabla_eta"] = _max(nabla_eta.T - alpha * (g + np.outer(eta, eta)))
    # nabla_X xi with X = d_m, component k
    out["nabla_xi"] = _max(nabla_xi.T - alpha * (eye + np.outer(eta, xi)))
    out["d_alpha=rho*eta"] = _max(d_alpha - rho * eta)
    if abs(alpha) > ALPHA_FLOOR:
        out["phi=nabla_xi/alpha"] = _max(phi - nabla_xi / alpha)
    else:
        out["phi=nabla_xi/alpha"] = float("inf")
    out["phi=Id+eta*xi"] = _max(phi - (eye + np.outer(xi, eta)))
    g_phi = g @ phi  # [a, i] = g(d_a, phi d_i)
    out["g(phiX,Y)=g(X,phiY)"] = _max(g_phi.T - g_phi)
    out["eta(xi)=-1"] = _max(eta @ xi + 1.0)
    out["phi(xi)=0"] = _max(phi @ xi)
    out["eta(phiX)=0"] = _max(eta @ phi)
    out["g(phiX,phiY)"] = _max(phi.T @ g @ phi - (g + np.outer(eta, eta)))
    out["phi^2=Id+eta*xi"] = _max(phi @ phi - (eye + np.outer(xi, eta)))

    r13 = riemann_from_jet(gam_jet)  # [l, k, i, j] of R(d_i, d_j) d_k
    bracket = np.einsum("jk,i->kij", g, eta) - np.einsum("ik,j->kij", g, eta)  # [k, i, j]
    shift_13 = c * np.einsum("kij,l->lkij", bracket, xi)
    phi_r = np.einsum("lm,mkij->lkij", phi, r13)
    r04 = lower_curvature(r13, g)  # [i, j, k, w]
    shift_04 = c * np.einsum("kij,w->ijkw", bracket, eta)
    r04_phi = np.einsum("ijkm,mw->ijkw", r04, phi)
    eta_r = np.einsum("l,lkij->kij", eta, r13)
    out["eta_of_curvature"] = _max(eta_r - c * bracket)
    # With R(X,Y) = [nabla_X, nabla_Y] - nabla_[X,Y] the xi-term enters with a
    # minus sign; the printed plus sign belongs to the opposite convention.
    out["curvature_xi"] = _max(r13 - phi_r + shift_13)
    out["curvature_xi_0_4"] = _max(r04 - r04_phi + shift_04)
    out["curvature_xi_as_printed"] = _max(r13 - phi_r - shift_13)
    out["curvature_xi_0_4_as_printed"] = _max(r04 - r04_phi - shift_04)
    out["rho=-xi(alpha)"] = _max(rho + d_alpha @ xi)
    return out


INFORMATIONAL_KEYS = ("curvature_xi_as_printed", "curvature_xi_0_4_as_printed")


def hard_residual_max(residuals: dict[str, float]) -> float:
    return max(v for k, v in residuals.items() if k not in INFORMATIONAL_KEYS)


__all__ = [
    "CATALOG",
    "INFORMATIONAL_KEYS",
    "LcsStructure",
    "StructureError",
    "catalog",
    "from_catalog_name",
    "hard_residual_max",
    "validate_structure",
    "warped_product",
]
