"""The K-Heisenberg group, its Koranyi gauge and metric, and the point at infinity.

A point is a pair ``(zeta, v)`` with ``zeta`` in K^(n-1) and ``v`` purely
imaginary.  :class:`HPoint` stores ``zeta`` as an array of shape
``(..., n-1, dim)`` and ``v`` as ``(..., dim)``; leading axes are batch axes,
so every function here works on one point or on a whole sample at once.

The group law is

    (zeta, v) * (zeta', v') = (zeta + zeta', v + v' + 2 omega(zeta, zeta'))

with ``omega = Im sum_i conj(zeta'_i) zeta_i``.  For K = R the imaginary part
is trivial, ``v`` is the one-element zero vector and the Koranyi metric is the
Euclidean one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import algebra as alg
from .algebra import DIMS, FieldMismatchError, ShapeMismatchError, check_field


class _Infinity:
    """The remote point added to compactify the group."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    def __reduce__(self):
        return (_Infinity, ())


INF = _Infinity()


def is_inf(p) -> bool:
    return p is INF


@dataclass(frozen=True, eq=False)
class HPoint:
    field: str
    zeta: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        check_field(self.field)
        d = DIMS[self.field]
        z = np.array(self.zeta, dtype=float)
        v = np.array(self.v, dtype=float)
        if z.ndim < 2 or z.shape[-1] != d or z.shape[-2] < 1:
            raise ShapeMismatchError(f"zeta must have shape (..., n-1, {d}), got {z.shape}")
        if v.shape[-1:] != (d,) or v.shape[:-1] != z.shape[:-2]:
            raise ShapeMismatchError(f"v shape {v.shape} does not match zeta shape {z.shape}")
        if np.any(v[..., 0] != 0.0):
            raise ValueError("vertical coordinate v must be purely imaginary")
        z.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "zeta", z)
        object.__setattr__(self, "v", v)

    @property
    def m(self) -> int:
        """Length of the horizontal vector (n - 1)."""
        return self.zeta.shape[-2]

    @property
    def n(self) -> int:
        return self.m + 1

    @property
    def batch_shape(self) -> tuple:
        return self.zeta.shape[:-2]

    def __len__(self):
        if not self.batch_shape:
            raise TypeError("unbatched HPoint has no length")
        return self.batch_shape[0]

    def __getitem__(self, idx) -> "HPoint":
        if not self.batch_shape:
            raise TypeError("unbatched HPoint is not indexable")
        return HPoint(self.field, self.zeta[idx], self.v[idx])

    def allclose(self, other, atol: float = 1e-12) -> bool:
        if is_inf(other):
            return False
        same_space(self, other)
        return bool(
            np.allclose(self.zeta, other.zeta, rtol=0.0, atol=atol)
            and np.allclose(self.v, other.v, rtol=0.0, atol=atol)
        )

    def __repr__(self):
        if self.batch_shape:
            return f"HPoint({self.field}, n={self.n}, batch={self.batch_shape})"
        z = ", ".join(str(alg.KNum(self.field, c)) for c in self.zeta)
        return f"HPoint(zeta=[{z}], v={alg.KNum(self.field, self.v)})"


def point(field: str, zeta, v=None) -> HPoint:
    """Build an HPoint from nested coefficient lists; ``v`` defaults to 0."""
    d = DIMS[check_field(field)]
    z = np.asarray(zeta, dtype=float)
    if z.ndim == 1:
        z = z.reshape(-1, d)
    if v is None:
        v = np.zeros(z.shape[:-2] + (d,))
    return HPoint(field, z, v)


def stack(points) -> HPoint:
    points = list(points)
    f = points[0].field
    for p in points:
        same_space(points[0], p)
    return HPoint(f, np.stack([p.zeta for p in points]), np.stack([p.v for p in points]))


def same_space(p: HPoint, q: HPoint):
    if p.field != q.field:
        raise FieldMismatchError(f"points live over {p.field} and {q.field}")
    if p.m != q.m:
        raise ShapeMismatchError(f"points live in dimensions n={p.n} and n={q.n}")


def origin(field: str, n: int, batch: tuple = ()) -> HPoint:
    d = DIMS[check_field(field)]
    return HPoint(field, np.zeros(batch + (n - 1, d)), np.zeros(batch + (d,)))


def unit_horizontal(field: str, n: int, i: int = 0, scale: float = 1.0) -> HPoint:
    """The point (scale * e_i, 0)."""
    p = origin(field, n)
    z = np.array(p.zeta)
    z[i, 0] = scale
    return HPoint(field, z, p.v)


def unit_vertical(field: str, n: int, i: int = 1, scale: float = 1.0) -> HPoint:
    """The point (0, scale * f_i); f_1 is the first imaginary unit."""
    if field == "R":
        raise ValueError("Im(R) is trivial; there is no vertical unit point")
    p = origin(field, n)
    v = np.array(p.v)
    v[i] = scale
    return HPoint(field, p.zeta, v)


# ---------------------------------------------------------------------------
# group law
# ---------------------------------------------------------------------------


def h_mul(p: HPoint, q: HPoint) -> HPoint:
    same_space(p, q)
    return HPoint(
        p.field,
        p.zeta + q.zeta,
        p.v + q.v + 2.0 * alg.omega(p.zeta, q.zeta),
    )


def h_inv(p: HPoint) -> HPoint:
    return HPoint(p.field, -p.zeta, -p.v)


def h_split(p: HPoint) -> tuple[HPoint, HPoint]:
    """Horizontal and vertical factors ``((zeta, 0), (0, v))`` of ``p``."""
    return (
        HPoint(p.field, p.zeta, np.zeros_like(p.v)),
        HPoint(p.field, np.zeros_like(p.zeta), p.v),
    )


def dilate(p: HPoint, delta) -> HPoint:
    delta = np.asarray(delta, dtype=float)
    return HPoint(p.field, delta[..., None, None] * p.zeta, (delta**2)[..., None] * p.v)


def conjugate(p: HPoint) -> HPoint:
    """The involution J: (zeta, v) -> (conj zeta, -v)."""
    return HPoint(p.field, alg.conj(p.zeta), -p.v)


def horizontal_sqnorm(p: HPoint) -> np.ndarray:
    return alg.sqnorm(p.zeta).sum(axis=-1)


def gauge_argument(p: HPoint) -> np.ndarray:
    """The K-number A(p) = -||zeta||^2 + v."""
    a = np.array(p.v, copy=True)
    a[..., 0] = -horizontal_sqnorm(p)
    return a


# ---------------------------------------------------------------------------
# gauge and metric
# ---------------------------------------------------------------------------


def koranyi_gauge(p: HPoint):
    """(||zeta||^4 + |v|^2)^(1/4); returns a float for an unbatched point."""
    g = (horizontal_sqnorm(p) ** 2 + alg.sqnorm(p.v)) ** 0.25
    return float(g) if np.ndim(g) == 0 else g


def koranyi_gauge_via_A(p: HPoint):
    """The same gauge evaluated as |A(p)|^(1/2)."""
    g = np.sqrt(alg.norm(gauge_argument(p)))
    return float(g) if np.ndim(g) == 0 else g


def koranyi_dist(p, q):
    """Koranyi distance |q^-1 * p|, extended by d(p, INF) = inf, d(INF, INF) = 0."""
    if is_inf(p) or is_inf(q):
        return 0.0 if (is_inf(p) and is_inf(q)) else math.inf
    return koranyi_gauge(h_mul(h_inv(q), p))
