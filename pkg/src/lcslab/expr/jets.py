"""Truncated multivariate Taylor arithmetic.

A :class:`Taylor` stores, for each entry of a numpy array, the Taylor
coefficients (in the monomial basis, *not* divided-out derivatives) of a
smooth function around a base point, up to total degree ``order``.  The
elementary functions are applied by composing with their univariate series at
the base value, so every derivative is exact up to floating point rounding.

The trailing axis of ``coef`` indexes monomials; leading axes are the tensor
shape.  Arrays of jets (metric components, Christoffel symbols, ...) are
multiplied and contracted with :func:`jeinsum`.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError, NonFiniteError


class JetBasis:
    """Monomials of total degree <= order in ``nvars`` variables."""

    def __init__(self, nvars: int, order: int):
        self.nvars = nvars
        self.order = order
        monomials: list[tuple[int, ...]] = []
        for degree in range(order + 1):
            for combo in itertools.combinations_with_replacement(range(nvars), degree):
                exps = [0] * nvars
                for v in combo:
                    exps[v] += 1
                monomials.append(tuple(exps))
        self.monomials = tuple(monomials)
        self.size = len(monomials)
        self.degree = np.array([sum(m) for m in monomials], dtype=int)
        self.index = {m: i for i, m in enumerate(monomials)}
        self.unit = [self.index[tuple(int(j == v) for j in range(nvars))] for v in range(nvars)] if order >= 1 else []

        left, right, target, pair_degree = [], [], [], []
        for i, a in enumerate(monomials):
            for j, b in enumerate(monomials):
                d = self.degree[i] + self.degree[j]
                if d <= order:
                    left.append(i)
                    right.append(j)
                    target.append(self.index[tuple(x + y for x, y in zip(a, b))])
                    pair_degree.append(d)
        self._left = np.array(left, dtype=int)
        self._right = np.array(right, dtype=int)
        self._target = np.array(target, dtype=int)
        self._pair_degree = np.array(pair_degree, dtype=int)
        self._scatter: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}

        self._deriv = []
        for v in range(nvars):
            src, dst, fac = [], [], []
            for i, a in enumerate(monomials):
                if a[v] > 0:
                    lowered = list(a)
                    lowered[v] -= 1
                    src.append(i)
                    dst.append(self.index[tuple(lowered)])
                    fac.append(float(a[v]))
            self._deriv.append((np.array(src, dtype=int), np.array(dst, dtype=int), np.array(fac)))

    def pairs(self, order: int):
        """Index pairs and a scatter matrix for products truncated at ``order``."""
        if order not in self._scatter:
            keep = self._pair_degree <= order
            left, right, target = self._left[keep], self._right[keep], self._target[keep]
            scatter = np.zeros((len(target), self.size))
            scatter[np.arange(len(target)), target] = 1.0
            self._scatter[order] = (left, right, scatter)
        return self._scatter[order]

    def mask(self, order: int) -> np.ndarray:
        return (self.degree <= order).astype(float)

    def __repr__(self) -> str:
        return f"JetBasis(nvars={self.nvars}, order={self.order})"


@lru_cache(maxsize=None)
def jet_basis(nvars: int, order: int) -> JetBasis:
    return JetBasis(nvars, order)


class Taylor:
    """Array of truncated Taylor polynomials sharing one :class:`JetBasis`."""

    __slots__ = ("coef", "basis", "order")
    __array_ufunc__ = None  # make ndarray <op> Taylor defer to our reflected ops

    def __init__(self, coef: np.ndarray, basis: JetBasis, order: int | None = None):
        self.coef = coef
        self.basis = basis
        self.order = basis.order if order is None else order

    # construction -------------------------------------------------------

    @classmethod
    def variables(cls, point, order: int) -> "Taylor":
        """Seed jets x_i = p_i + dx_i for every coordinate of ``point``."""
        point = np.asarray(point, dtype=float)
        n = point.shape[0]
        basis = jet_basis(n, order)
        coef = np.zeros((n, basis.size))
        coef[:, 0] = point
        for v in range(n if order >= 1 else 0):
            coef[v, basis.unit[v]] = 1.0
        return cls(coef, basis, order)

    @classmethod
    def constant(cls, value, basis: JetBasis, order: int | None = None) -> "Taylor":
        value = np.asarray(value, dtype=float)
        coef = np.zeros(value.shape + (basis.size,))
        coef[..., 0] = value
        return cls(coef, basis, order)

    def _like(self, coef: np.ndarray, order: int | None = None) -> "Taylor":
        return Taylor(coef, self.basis, self.order if order is None else order)

    # array protocol -------------------------------------------------------

    @property
    def shape(self) -> tuple[int, ...]:
        return self.coef.shape[:-1]

    @property
    def ndim(self) -> int:
        return self.coef.ndim - 1

    @property
    def value(self) -> np.ndarray:
        return self.coef[..., 0]

    def __getitem__(self, key) -> "Taylor":
        if not isinstance(key, tuple):
            key = (key,)
        if len(key) > self.ndim or any(k is Ellipsis for k in key):
            raise IndexError("jet index must address tensor axes only")
        return self._like(self.coef[key])

    def __len__(self) -> int:
        return self.shape[0]

    def __iter__(self):
        for i in range(self.shape[0]):
            yield self[i]

    def transpose(self, *axes) -> "Taylor":
        if len(axes) == 1 and isinstance(axes[0], (tuple, list)):
            axes = tuple(axes[0])
        if not axes:
            axes = tuple(reversed(range(self.ndim)))
        return self._like(np.transpose(self.coef, tuple(axes) + (self.ndim,)))

    def reshape(self, *shape) -> "Taylor":
        if len(shape) == 1 and isinstance(shape[0], tuple):
            shape = shape[0]
        return self._like(self.coef.reshape(tuple(shape) + (self.basis.size,)))

    def sum(self, axis=None) -> "Taylor":
        if axis is None:
            axis = tuple(range(self.ndim))
        if isinstance(axis, int):
            axis = (axis,)
        axis = tuple(a % self.ndim for a in axis)
        return self._like(self.coef.sum(axis=axis))

    def __repr__(self) -> str:
        return f"Taylor(shape={self.shape}, nvars={self.basis.nvars}, order={self.order})"

    # derivatives -----------------------------------------------------------

    def deriv(self, var: int) -> "Taylor":
        if self.order < 1:
            raise ValueError("cannot differentiate an order-0 jet")
        src, dst, fac = self.basis._deriv[var]
        coef = np.zeros_like(self.coef)
        coef[..., dst] = self.coef[..., src] * fac
        return self._like(coef, self.order - 1)

    def grad(self) -> "Taylor":
        """Partial derivatives stacked on a new *leading* axis."""
        parts = [self.deriv(v).coef for v in range(self.basis.nvars)]
        return self._like(np.stack(parts, axis=0), self.order - 1)

    def gradient_value(self) -> np.ndarray:
        """First derivatives at the base point, derivative axis last."""
        return np.stack([self.coef[..., u] for u in self.basis.unit], axis=-1)

    def hessian_value(self) -> np.ndarray:
        """Second derivatives at the base point, exactly symmetric."""
        n = self.basis.nvars
        out = np.zeros(self.shape + (n, n))
        for i in range(n):
            for j in range(i, n):
                exps = [0] * n
                exps[i] += 1
                exps[j] += 1
                c = self.coef[..., self.basis.index[tuple(exps)]]
                if i == j:
                    out[..., i, i] = 2.0 * c
                else:
                    out[..., i, j] = c
                    out[..., j, i] = c
        return out

    # arithmetic ------------------------------------------------------------

    def _check(self, other: "Taylor"):
        if other.basis is not self.basis:
            raise ValueError("jets over different bases cannot be combined")

    def __add__(self, other):
        if isinstance(other, Taylor):
            self._check(other)
            order = min(self.order, other.order)
            coef = self.coef + other.coef
            if order < self.basis.order:
                coef = coef * self.basis.mask(order)
            return self._like(coef, order)
        other = np.asarray(other, dtype=float)
        coef = np.broadcast_to(self.coef, np.broadcast_shapes(self.shape, other.shape) + (self.basis.size,)).copy()
        coef[..., 0] += other
        return self._like(coef)

    __radd__ = __add__

    def __neg__(self):
        return self._like(-self.coef)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Taylor):
            self._check(other)
            order = min(self.order, other.order)
            left, right, scatter = self.basis.pairs(order)
            a, b = np.broadcast_arrays(self.coef, other.coef)
            coef = (a[..., left] * b[..., right]) @ scatter
            return self._like(coef, order)
        other = np.asarray(other, dtype=float)
        return self._like(self.coef * other[..., None])

    __rmul__ = __mul__

    def reciprocal(self) -> "Taylor":
        x = self.value
        if np.any(x == 0):
            raise DomainError("division", 0.0)
        return self._series("division", lambda k: (-1.0) ** k / x ** (k + 1), factorial=False)

    def __truediv__(self, other):
        if isinstance(other, Taylor):
            return self * other.reciprocal()
        other = np.asarray(other, dtype=float)
        if np.any(other == 0):
            raise DomainError("division", 0.0)
        return self._like(self.coef / other[..., None])

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, exponent):
        if isinstance(exponent, Taylor):
            return (exponent * self.log()).exp()
        p = float(exponent)
        if p.is_integer() and abs(p) <= 64:
            return self._int_power(int(p))
        x = self.value
        if np.any(x <= 0):
            raise DomainError("power", float(np.min(x)))
        return self._series("power", lambda k: _falling(p, k) * x ** (p - k))

    def __rpow__(self, base):
        base = float(base)
        if base <= 0:
            raise DomainError("power", base)
        return (self * math.log(base)).exp()

    def _int_power(self, p: int) -> "Taylor":
        if p < 0:
            return self.reciprocal()._int_power(-p)
        result = None
        square = self
        while p:
            if p & 1:
                result = square if result is None else result * square
            p >>= 1
            if p:
                square = square * square
        if result is None:
            return Taylor.constant(np.ones(self.shape), self.basis, self.order)
        return result

    # elementary functions --------------------------------------------------

    def _series(self, name: str, derivative, factorial: bool = True) -> "Taylor":
        """Compose with a univariate function given its k-th derivative at x0.

        With ``factorial=False`` the callable already returns the k-th
        series coefficient.
        """
        delta = self._like(self.coef.copy())
        delta.coef[..., 0] = 0.0
        c0 = np.asarray(derivative(0), dtype=float)
        coef = np.zeros_like(self.coef)
        coef[..., 0] = c0
        power = None
        for k in range(1, self.order + 1):
            power = delta if power is None else power * delta
            ck = np.asarray(derivative(k), dtype=float)
            if not factorial:
                coef = coef + power.coef * ck[..., None]
            else:
                coef = coef + power.coef * (ck / math.factorial(k))[..., None]
        if not np.all(np.isfinite(coef)):
            raise NonFiniteError(f"{name} produced a non-finite derivative")
        return self._like(coef)

    def exp(self):
        ex = np.exp(self.value)
        return self._series("exp", lambda k: ex)

    def log(self):
        x = self.value
        if np.any(x <= 0):
            raise DomainError("log", float(np.min(x)))
        return self._series(
            "log",
            lambda k: np.log(x) if k == 0 else (-1.0) ** (k - 1) * math.factorial(k - 1) / x**k,
        )

    def sqrt(self):
        x = self.value
        if np.any(x < 0):
            raise DomainError("sqrt", float(np.min(x)))
        if self.order >= 1 and np.any(x == 0):
            raise DomainError("sqrt", 0.0)
        return self._series("sqrt", lambda k: _falling(0.5, k) * x ** (0.5 - k))

    def sin(self):
        s, c = np.sin(self.value), np.cos(self.value)
        return self._series("sin", lambda k: (s, c, -s, -c)[k % 4])

    def cos(self):
        s, c = np.sin(self.value), np.cos(self.value)
        return self._series("cos", lambda k: (c, -s, -c, s)[k % 4])

    def tan(self):
        if np.any(np.cos(self.value) == 0):
            raise DomainError("tan", float(self.value.flat[0]))
        return self.sin() / self.cos()

    def sinh(self):
        s, c = np.sinh(self.value), np.cosh(self.value)
        return self._series("sinh", lambda k: (s, c)[k % 2])

    def cosh(self):
        s, c = np.sinh(self.value), np.cosh(self.value)
        return self._series("cosh", lambda k: (c, s)[k % 2])

    def tanh(self):
        return self.sinh() / self.cosh()


def _falling(p: float, k: int) -> float:
    out = 1.0
    for j in range(k):
        out *= p - j
    return out


def stack(items, axis: int = 0, basis: JetBasis | None = None) -> Taylor:
    """Stack jets (or plain numbers, promoted to constants) along ``axis``."""
    items = list(items)
    if basis is None:
        for item in items:
            if isinstance(item, Taylor):
                basis = item.basis
                break
    if basis is None:
        raise ValueError("stack needs at least one jet or an explicit basis")
    order = min((it.order for it in items if isinstance(it, Taylor)), default=basis.order)
    coefs = []
    for it in items:
        if isinstance(it, Taylor):
            if it.basis is not basis:
                raise ValueError("jets over different bases cannot be stacked")
            coefs.append(it.coef)
        else:
            coefs.append(Taylor.constant(it, basis).coef)
    coef = np.stack(coefs, axis=axis if axis >= 0 else axis - 1)
    if order < basis.order:
        coef = coef * basis.mask(order)
    return Taylor(coef, basis, order)


def as_taylor(x, basis: JetBasis) -> Taylor:
    return x if isinstance(x, Taylor) else Taylor.constant(x, basis)


def _parse_subscripts(subscripts: str):
    lhs, out = subscripts.replace(" ", "").split("->")
    return lhs.split(","), out


def jeinsum(subscripts: str, *operands):
    """``numpy.einsum`` over tensor axes with jet multiplication of entries.

    Operands may be :class:`Taylor` or plain arrays.  More than two operands
    are contracted left to right.
    """
    inputs, output = _parse_subscripts(subscripts)
    if len(inputs) != len(operands):
        raise ValueError("operand count does not match subscripts")
    if len(operands) == 1:
        return _einsum2(inputs[0], None, None, None, output, operands[0])
    spec, current = inputs[0], operands[0]
    for k in range(1, len(operands)):
        later = "".join(inputs[k + 1:]) + output
        keep = "".join(c for c in dict.fromkeys(spec + inputs[k]) if c in later)
        target = output if k == len(operands) - 1 else keep
        current = _einsum2(spec, inputs[k], current, operands[k], target, None)
        spec = target
    return current


def _einsum2(sa, sb, a, b, out, single):
    if single is not None:
        if isinstance(single, Taylor):
            return single._like(np.einsum(f"{sa}Z->{out}Z", single.coef))
        return np.einsum(f"{sa}->{out}", single)
    ja, jb = isinstance(a, Taylor), isinstance(b, Taylor)
    if not ja and not jb:
        return np.einsum(f"{sa},{sb}->{out}", a, b)
    if ja and not jb:
        return a._like(np.einsum(f"{sa}Z,{sb}->{out}Z", a.coef, np.asarray(b, dtype=float)))
    if jb and not ja:
        return b._like(np.einsum(f"{sa},{sb}Z->{out}Z", np.asarray(a, dtype=float), b.coef))
    a._check(b)
    order = min(a.order, b.order)
    left, right, scatter = a.basis.pairs(order)
    outer = np.einsum(f"{sa}Y,{sb}Z->{out}YZ", a.coef[..., :], b.coef[..., :])
    coef = outer[..., left, right] @ scatter
    return a._like(coef, order)


def inverse(matrix: Taylor, value_inverse: np.ndarray | None = None) -> Taylor:
    """Inverse of a square jet matrix by the terminating Neumann series."""
    g0 = matrix.value
    g0_inv = np.linalg.inv(g0) if value_inverse is None else value_inverse
    nil = matrix - g0  # no constant term, so nil**(order+1) vanishes
    step = jeinsum("ij,jk->ik", -g0_inv, nil)
    result = Taylor.constant(g0_inv, matrix.basis, matrix.order)
    term = result
    for _ in range(matrix.order):
        term = jeinsum("ij,jk->ik", step, term)
        result = result + term
    return result


@dataclass(frozen=True)
class Jet2:
    """Value, gradient and (exactly symmetric) Hessian of a scalar."""

    value: float
    gradient: np.ndarray
    hessian: np.ndarray

    @classmethod
    def from_taylor(cls, t: Taylor) -> "Jet2":
        if t.ndim != 0 or t.order < 2:
            raise ValueError("Jet2 needs a scalar jet of order >= 2")
        return cls(float(t.value), t.gradient_value(), t.hessian_value())
