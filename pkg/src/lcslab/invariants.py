"""Intrinsic curvature invariants of a submanifold: tau, k-Ricci and Theta_k.

All routines work in the orthonormal tangent frame of
:func:`submanifold_frame`, where the induced metric is the identity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .riemann import levi_civita, lower_curvature, riemann
from .submanifold import Immersion, InducedMetric, SubmanifoldFrame, submanifold_frame
from .tensor import TensorError, as_point

PLANE_TOL = 1e-9
IN_PLANE_TOL = 1e-8
THETA_SAMPLES = 512
THETA_STEPS = 20


def frame_curvature(imm: Immersion, u, frame: SubmanifoldFrame | None = None,
                    connection=None) -> np.ndarray:
    """``R(e_i, e_j, e_k, e_l)`` of the induced metric (or of ``connection``)."""
    p = as_point(u)
    frame = frame if frame is not None else submanifold_frame(imm, p)
    metric = InducedMetric(imm)
    conn = connection if connection is not None else levi_civita(metric)
    r04 = lower_curvature(riemann(conn, p).components, metric.at(p).components)
    c = frame.coefficients
    return np.einsum("abcd,ai,bj,ck,dl->ijkl", r04, c, c, c, c)


def pair_sum(r: np.ndarray) -> float:
    """``sum_{i<j} R(e_i, e_j, e_j, e_i)``."""
    m = r.shape[0]
    return float(sum(r[i, j, j, i] for i in range(m) for j in range(i + 1, m)))


def ricci_frame(r: np.ndarray) -> np.ndarray:
    """``Ric(e_j, e_k) = sum_i R(e_i, e_j, e_k, e_i)``, symmetrized."""
    ric = np.einsum("ijki->jk", r)
    return 0.5 * (ric + ric.T)


def scalar_curvature(imm: Immersion, u, frame: SubmanifoldFrame | None = None) -> float:
    """``tau = sum_{i<j} K_ij`` over an orthonormal tangent frame."""
    return pair_sum(frame_curvature(imm, u, frame))


def scalar_by_trace(r: np.ndarray) -> float:
    """Half the double trace of the frame curvature; equals :func:`pair_sum`."""
    return 0.5 * float(np.trace(ricci_frame(r)))


def _sectional(r: np.ndarray, x: np.ndarray, y: np.ndarray) -> float:
    gram = (x @ x) * (y @ y) - (x @ y) ** 2
    return float(np.einsum("ijkl,i,j,k,l->", r, x, y, y, x) / gram)


@dataclass
class PlaneSection:
    """k-plane of the tangent space, spanned by orthonormal frame-coefficient rows."""

    point: np.ndarray
    basis: np.ndarray
    curvature: np.ndarray

    def __post_init__(self):
        self.basis = np.atleast_2d(np.asarray(self.basis, dtype=float))
        if not 2 <= self.k <= self.curvature.shape[0]:
            raise TensorError(f"plane dimension k={self.k} must satisfy 2 <= k <= m")
        gram = self.basis @ self.basis.T
        if np.max(np.abs(gram - np.eye(self.k))) > PLANE_TOL:
            raise TensorError("plane spanning set is not orthonormal")

    @property
    def k(self) -> int:
        return self.basis.shape[0]

    def ricci_form(self) -> np.ndarray:
        """``Q[a, b] = sum_j R(b_a, b_j, b_j, b_b)`` on the spanning set."""
        r = np.einsum("ijkl,ai,bl->ajkb", self.curvature, self.basis, self.basis)
        q = np.einsum("ajkb,cj,ck->ab", r, self.basis, self.basis)
        return 0.5 * (q + q.T)


def k_ricci(plane: PlaneSection, x) -> float:
    """Sum of K(X, e_j) over an orthonormal completion of X inside the plane."""
    x = np.asarray(x, dtype=float)
    if abs(x @ x - 1.0) > IN_PLANE_TOL:
        raise TensorError("k-Ricci needs a unit vector")
    inside = plane.basis.T @ (plane.basis @ x)
    if np.linalg.norm(x - inside) > IN_PLANE_TOL:
        raise TensorError("vector does not lie in the plane")
    completion = [x]
    for b in plane.basis:
        v = b.copy()
        for _ in range(2):
            for e in completion:
                v = v - (v @ e) * e
        nv = np.linalg.norm(v)
        if nv > 1e-6 and len(completion) < plane.k:
            completion.append(v / nv)
    return float(sum(_sectional(plane.curvature, x, e) for e in completion[1:]))


@dataclass
class ThetaResult:
    value: float
    k: int
    exact: bool
    minimizer: np.ndarray | None = None
    samples: int = 0
    note: str = ""


def _plane_minimum(r: np.ndarray, basis: np.ndarray) -> float:
    q = PlaneSection(np.zeros(0), basis, r).ricci_form()
    return float(np.linalg.eigvalsh(q)[0])


def _givens(m: int, p: int, q: int, angle: float) -> np.ndarray:
    g = np.eye(m)
    c, s = np.cos(angle), np.sin(angle)
    g[p, p] = g[q, q] = c
    g[p, q], g[q, p] = -s, s
    return g


def theta_from_curvature(r: np.ndarray, k: int, seed: int = 0, samples: int = THETA_SAMPLES,
                         steps: int = THETA_STEPS) -> ThetaResult:
    """``Theta_k = inf_{L, X} Ric_L(X) / (k - 1)``.

    For each plane the infimum over unit X in L is exact (smallest
    eigenvalue of the restricted Ricci form).  For ``k = m`` there is only
    one plane, so the result is exact.  For ``k < m`` planes are sampled
    (seeded Gaussian frames orthonormalized by QR, then coordinate rotations
    with halving angle); the value is an upper bound on the infimum.
    """
    m = r.shape[0]
    if not 2 <= k <= m:
        raise TensorError(f"Theta_k needs 2 <= k <= m, got k={k}, m={m}")
    if k == m:
        ric = ricci_frame(r)
        w, v = np.linalg.eigh(ric)
        return ThetaResult(float(w[0]) / (m - 1), k, True, v[:, 0], 0,
                           "exact: smallest eigenvalue of the Ricci operator")
    best, best_basis = np.inf, None
    for i in range(samples):
        rng = np.random.default_rng([seed, i])
        qmat, _ = np.linalg.qr(rng.standard_normal((m, k)))
        basis = qmat.T
        val = _plane_minimum(r, basis)
        if val < best:
            best, best_basis = val, basis
    angle = 0.5
    for _ in range(steps):
        for p in range(m):
            for q in range(p + 1, m):
                for sign in (1.0, -1.0):
                    trial = best_basis @ _givens(m, p, q, sign * angle).T
                    val = _plane_minimum(r, trial)
                    if val < best:
                        best, best_basis = val, trial
        angle *= 0.5
    return ThetaResult(best / (k - 1), k, False, best_basis, samples,
                       f"upper bound: {samples} sampled planes, {steps} refinement steps")


def theta_k(imm: Immersion, u, k: int, seed: int = 0, frame: SubmanifoldFrame | None = None,
            samples: int = THETA_SAMPLES) -> ThetaResult:
    return theta_from_curvature(frame_curvature(imm, u, frame), k, seed=seed, samples=samples)
