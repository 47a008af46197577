"""Points, dense tensors and tensor fields over a single chart.

Tensor axes keep their position when an index is raised or lowered; each
axis is tagged ``"u"`` (contravariant) or ``"d"`` (covariant) in
:attr:`Tensor.kinds`, so ``R^l_{kij}`` is stored with kinds ``"uddd"``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .expr import Taylor

SINGULAR_DET = 1e-12


class TensorError(ValueError):
    pass


class SingularMetricError(TensorError):
    pass


@dataclass(frozen=True)
class Point:
    coords: np.ndarray

    def __post_init__(self):
        coords = np.array(self.coords, dtype=float).reshape(-1)
        if coords.size == 0:
            raise TensorError("a point needs at least one coordinate")
        if not np.all(np.isfinite(coords)):
            raise TensorError(f"non-finite point coordinates {coords}")
        coords.setflags(write=False)
        object.__setattr__(self, "coords", coords)

    @property
    def dim(self) -> int:
        return self.coords.shape[0]

    def __iter__(self):
        return iter(self.coords)


def as_point(p) -> Point:
    return p if isinstance(p, Point) else Point(p)


class Tensor:
    """Dense components at one point; first axis order is the slot order."""

    __slots__ = ("kinds", "components")

    def __init__(self, kinds: str, components):
        components = np.array(components, dtype=float)
        if set(kinds) - {"u", "d"}:
            raise TensorError(f"slot kinds must be 'u' or 'd', got {kinds!r}")
        if components.ndim != len(kinds):
            raise TensorError(f"{len(kinds)} slots but components have {components.ndim} axes")
        if components.ndim and len(set(components.shape)) != 1:
            raise TensorError(f"components must be dim^rank, got shape {components.shape}")
        if not np.all(np.isfinite(components)):
            raise TensorError("non-finite tensor components")
        components.setflags(write=False)
        self.kinds = kinds
        self.components = components

    @property
    def valence(self) -> tuple[int, int]:
        return self.kinds.count("u"), self.kinds.count("d")

    @property
    def rank(self) -> int:
        return len(self.kinds)

    @property
    def dim(self) -> int | None:
        return self.components.shape[0] if self.rank else None

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.components, dtype=dtype)

    def _same_frame(self, other: "Tensor"):
        if not isinstance(other, Tensor) or other.kinds != self.kinds or other.components.shape != self.components.shape:
            raise TensorError("tensors must share valence, slot order and dimension")

    def __add__(self, other: "Tensor") -> "Tensor":
        self._same_frame(other)
        return Tensor(self.kinds, self.components + other.components)

    def __sub__(self, other: "Tensor") -> "Tensor":
        self._same_frame(other)
        return Tensor(self.kinds, self.components - other.components)

    def __mul__(self, scalar: float) -> "Tensor":
        return Tensor(self.kinds, self.components * float(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> "Tensor":
        return Tensor(self.kinds, -self.components)

    def __repr__(self) -> str:
        return f"Tensor({self.kinds!r}, dim={self.dim})"


def contract(t: Tensor, slot_up: int, slot_down: int) -> Tensor:
    """Trace over one contravariant and one covariant slot (absolute positions)."""
    for slot in (slot_up, slot_down):
        if not 0 <= slot < t.rank:
            raise TensorError(f"slot {slot} out of range for rank {t.rank}")
    if t.kinds[slot_up] != "u" or t.kinds[slot_down] != "d":
        raise TensorError(
            f"slot kinds mismatch: need an upper and a lower slot, got "
            f"{t.kinds[slot_up]!r} and {t.kinds[slot_down]!r}"
        )
    comps = np.trace(t.components, axis1=slot_up, axis2=slot_down)
    kinds = "".join(k for i, k in enumerate(t.kinds) if i not in (slot_up, slot_down))
    return Tensor(kinds, comps)


def invert_metric(g) -> np.ndarray:
    g = np.asarray(g, dtype=float)
    det = np.linalg.det(g)
    if abs(det) < SINGULAR_DET:
        raise SingularMetricError(f"metric determinant {det:.3e} below {SINGULAR_DET}")
    return np.linalg.inv(g)


def raise_lower(t: Tensor, slot: int, metric, inverse_metric, direction: str) -> Tensor:
    """Move the index at ``slot`` with the supplied metric; axis order is kept."""
    g = np.asarray(metric, dtype=float)
    g_inv = np.asarray(inverse_metric, dtype=float)
    if abs(np.linalg.det(g)) < SINGULAR_DET:
        raise SingularMetricError("metric is singular at the working point")
    if not 0 <= slot < t.rank:
        raise TensorError(f"slot {slot} out of range for rank {t.rank}")
    if direction == "down":
        if t.kinds[slot] != "u":
            raise TensorError("can only lower a contravariant slot")
        mover, kind = g, "d"
    elif direction == "up":
        if t.kinds[slot] != "d":
            raise TensorError("can only raise a covariant slot")
        mover, kind = g_inv, "u"
    else:
        raise TensorError(f"direction must be 'up' or 'down', got {direction!r}")
    comps = np.moveaxis(np.tensordot(mover, t.components, axes=([1], [slot])), 0, slot)
    return Tensor(t.kinds[:slot] + kind + t.kinds[slot + 1:], comps)


class TensorField:
    """Tensor-valued function on a chart.

    ``of_coords`` maps a vector of coordinate jets (or any jets standing in
    for coordinates, e.g. an immersion evaluated along a parameter chart) to
    the components as a :class:`Taylor` array or plain array.
    """

    def __init__(self, kinds: str, dim: int, of_coords: Callable):
        self.kinds = kinds
        self.dim = dim
        self.of_coords = of_coords

    @property
    def valence(self) -> tuple[int, int]:
        return self.kinds.count("u"), self.kinds.count("d")

    def jet(self, point, order: int) -> Taylor:
        point = as_point(point)
        if point.dim != self.dim:
            raise TensorError(f"point has dimension {point.dim}, field has {self.dim}")
        coords = Taylor.variables(point.coords, order)
        out = self.of_coords(coords)
        if not isinstance(out, Taylor):
            out = Taylor.constant(out, coords.basis)
        return out

    def at(self, point) -> Tensor:
        return Tensor(self.kinds, self.jet(point, 0).value)

    def __call__(self, point) -> Tensor:
        return self.at(point)
