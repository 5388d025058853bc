"""Generator transformations of the boundary, cross-ratios and inversion checks.

A :class:`MoebiusMap` is a word in the generators

* ``Translate(a)``      p -> a * p
* ``Rotate(U)``         (zeta, v) -> (U zeta, v),  U in O(n-1), U(n-1), Sp(n-1)
* ``RotateQuat(mu)``    (zeta, v) -> (mu zeta mu^-1, mu v mu^-1), K = H
* ``RotateOct(mu)``     (zeta, v) -> (zeta conj(mu), mu v conj(mu)), K = O
* ``Dilate(delta)``     (zeta, v) -> (delta zeta, delta^2 v)
* ``Conjugate()``       (zeta, v) -> (conj zeta, -v)
* ``Invert()``          (zeta, v) -> (zeta A^-1, conj(v) |A|^-2),  A = -||zeta||^2 + v

Words compose like functions: the rightmost generator is applied first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from itertools import permutations
from typing import Callable, Sequence

import numpy as np

from . import algebra as alg
from .algebra import DIMS
from .heisenberg import (
    INF,
    HPoint,
    conjugate,
    dilate,
    gauge_argument,
    h_inv,
    h_mul,
    is_inf,
    koranyi_dist,
    origin,
    unit_horizontal,
)
from .sampling import random_points


class DegenerateInputError(ValueError):
    """Coincident points, or a point at o or infinity where one is not allowed."""


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Translate:
    by: HPoint

    def __call__(self, p):
        return INF if is_inf(p) else h_mul(self.by, p)


@dataclass(frozen=True, eq=False)
class Rotate:
    matrix: np.ndarray

    def __post_init__(self):
        u = np.array(self.matrix, dtype=float)
        if u.ndim != 3 or u.shape[0] != u.shape[1]:
            raise ValueError(f"rotation matrix must have shape (m, m, dim), got {u.shape}")
        if u.shape[-1] == 8:
            raise ValueError("matrix rotations are not defined over O; use RotateOct")
        if not is_unitary(u, tol=1e-10):
            raise ValueError("rotation matrix is not unitary to 1e-10")
        u.setflags(write=False)
        object.__setattr__(self, "matrix", u)

    def __call__(self, p):
        if is_inf(p):
            return INF
        uz = alg.mul(self.matrix, p.zeta[..., None, :, :]).sum(axis=-2)
        return HPoint(p.field, uz, p.v)


@dataclass(frozen=True, eq=False)
class RotateQuat:
    mu: np.ndarray

    def __post_init__(self):
        mu = np.array(self.mu, dtype=float).reshape(-1)
        if mu.shape != (4,) or abs(alg.norm(mu) - 1.0) > 1e-10:
            raise ValueError("RotateQuat needs a unit quaternion")
        mu.setflags(write=False)
        object.__setattr__(self, "mu", mu)

    def __call__(self, p):
        if is_inf(p):
            return INF
        mi = alg.inv(self.mu)
        z = alg.mul(alg.mul(self.mu, p.zeta), mi)
        v = alg.im(alg.mul(alg.mul(self.mu, p.v), mi))
        return HPoint(p.field, z, v)


@dataclass(frozen=True, eq=False)
class RotateOct:
    mu: np.ndarray

    def __post_init__(self):
        mu = np.array(self.mu, dtype=float).reshape(-1)
        if mu.shape != (8,) or mu[0] != 0.0 or abs(alg.norm(mu) - 1.0) > 1e-10:
            raise ValueError("RotateOct needs a unit imaginary octonion")
        mu.setflags(write=False)
        object.__setattr__(self, "mu", mu)

    def __call__(self, p):
        if is_inf(p):
            return INF
        return _oct_rotation(self.mu, p)


def _oct_rotation(lam: np.ndarray, p: HPoint) -> HPoint:
    # (lam v) conj(lam) is unambiguous by alternativity
    lc = alg.conj(lam)
    z = alg.mul(p.zeta, lc)
    v = alg.im(alg.mul(alg.mul(lam, p.v), lc))
    return HPoint(p.field, z, v)


@dataclass(frozen=True)
class Dilate:
    delta: float

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError(f"dilation factor must be positive, got {self.delta}")

    def __call__(self, p):
        return INF if is_inf(p) else dilate(p, self.delta)


@dataclass(frozen=True)
class Conjugate:
    def __call__(self, p):
        return INF if is_inf(p) else conjugate(p)


@dataclass(frozen=True)
class Invert:
    def __call__(self, p, *, field: str | None = None, n: int | None = None):
        if is_inf(p):
            if field is None or n is None:
                raise ValueError("Invert(INF) needs the field and n of the target space")
            return origin(field, n)
        a = gauge_argument(p)
        a2 = alg.sqnorm(a)
        if np.any(a2 == 0):
            if p.batch_shape:
                raise DegenerateInputError("cannot invert a batch containing the origin")
            return INF
        z = alg.mul(p.zeta, alg.inv(a)[..., None, :])
        v = alg.conj(p.v) / a2[..., None]
        return HPoint(p.field, z, v)


Generator = Translate | Rotate | RotateQuat | RotateOct | Dilate | Conjugate | Invert


def is_unitary(u: np.ndarray, tol: float = 1e-10) -> bool:
    """Check U* U = 1 for a K-matrix stored as (m, m, dim)."""
    u = np.asarray(u, dtype=float)
    m = u.shape[0]
    # (U* U)_kj = sum_i conj(U_ik) U_ij = inner(column j, column k)
    gram = alg.inner(
        np.transpose(u, (1, 0, 2))[:, None, :, :], np.transpose(u, (1, 0, 2))[None, :, :, :]
    )
    target = np.zeros_like(gram)
    target[np.arange(m), np.arange(m), 0] = 1.0
    return bool(np.max(np.abs(gram - target)) <= tol)


# ---------------------------------------------------------------------------
# words
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MoebiusMap:
    word: tuple = ()
    field: str | None = None
    n: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "word", tuple(self.word))

    @classmethod
    def identity(cls, field=None, n=None) -> "MoebiusMap":
        return cls((), field, n)

    @classmethod
    def of(cls, *gens, field=None, n=None) -> "MoebiusMap":
        return cls(tuple(gens), field, n)

    def __call__(self, p):
        return apply_map(self, p)

    def __len__(self):
        return len(self.word)


def apply_map(m: MoebiusMap, p, *, field: str | None = None, n: int | None = None):
    """Apply the word right-to-left to a point, a batch of points, or INF."""
    if not is_inf(p):
        field, n = p.field, p.n
        if m.field is not None and m.field != field:
            raise alg.FieldMismatchError(f"map over {m.field} applied to point over {field}")
    field = field or m.field
    n = n or m.n
    for g in reversed(m.word):
        if isinstance(g, Invert):
            p = g(p, field=field, n=n)
        else:
            p = g(p)
    return p


def compose(m1: MoebiusMap, m2: MoebiusMap) -> MoebiusMap:
    """The map ``m1 o m2`` (apply ``m2`` first)."""
    if m1.field and m2.field and m1.field != m2.field:
        raise alg.FieldMismatchError(f"cannot compose maps over {m1.field} and {m2.field}")
    if m1.n and m2.n and m1.n != m2.n:
        raise alg.ShapeMismatchError(f"cannot compose maps for n={m1.n} and n={m2.n}")
    return MoebiusMap(m1.word + m2.word, m1.field or m2.field, m1.n or m2.n)


def fixes_infinity(m: MoebiusMap, field: str | None = None, n: int | None = None) -> bool:
    return is_inf(apply_map(m, INF, field=field, n=n))


def random_rotation(field: str, n: int, seed=None) -> np.ndarray:
    """Random element of O(n-1), U(n-1) or Sp(n-1) by Gram-Schmidt over K."""
    if field == "O":
        raise ValueError("no matrix rotations over O; octonionic rotations are RotateOct")
    rng = np.random.default_rng(seed)
    d, m = DIMS[alg.check_field(field)], n - 1
    cols = rng.normal(size=(m, m, d))  # cols[j] is column j, shape (m, d)
    out = []
    for j in range(m):
        c = cols[j]
        for q in out:
            # projection onto unit q is q * <c, q> (right scalar multiplication)
            c = c - alg.mul(q, alg.inner(c, q)[None, :])
        c = c / math.sqrt(alg.sqnorm(c).sum())
        out.append(c)
    return np.transpose(np.stack(out), (1, 0, 2))


def random_unit(rng, field: str, imaginary: bool = False) -> np.ndarray:
    x = rng.normal(size=DIMS[field])
    if imaginary:
        x[0] = 0.0
    return x / alg.norm(x)


def random_generator(rng, field: str, n: int, include_invert: bool = True):
    kinds = ["translate", "dilate"]
    if field != "O":
        kinds.append("rotate")
    if field in ("R", "C"):
        kinds.append("conjugate")
    if field == "H":
        kinds.append("rotate_quat")
    if field == "O":
        kinds.append("rotate_oct")
    if include_invert:
        kinds.append("invert")
    kind = kinds[rng.integers(len(kinds))]
    if kind == "translate":
        return Translate(random_points(rng, field, n, None, radii=(1.0,)))
    if kind == "dilate":
        return Dilate(float(np.exp(rng.uniform(np.log(0.25), np.log(4.0)))))
    if kind == "rotate":
        return Rotate(random_rotation(field, n, rng))
    if kind == "conjugate":
        return Conjugate()
    if kind == "rotate_quat":
        return RotateQuat(random_unit(rng, "H"))
    if kind == "rotate_oct":
        return RotateOct(random_unit(rng, "O", imaginary=True))
    return Invert()


def random_word(rng, field: str, n: int, max_length: int = 6, include_invert: bool = True):
    length = int(rng.integers(1, max_length + 1))
    gens = [random_generator(rng, field, n, include_invert) for _ in range(length)]
    return MoebiusMap(tuple(gens), field, n)


def normalizing_word(a, b, field: str, n: int) -> MoebiusMap:
    """A word ``w`` with ``w(a) = o`` and ``w(b) = INF`` for distinct a, b."""
    if is_inf(a) and is_inf(b):
        raise DegenerateInputError("the two points must be distinct")
    if is_inf(b):
        return MoebiusMap((Translate(h_inv(a)),), field, n)
    head = MoebiusMap((Invert(), Translate(h_inv(b))), field, n)
    if is_inf(a):
        return head
    a1 = apply_map(head, a)
    if is_inf(a1):
        raise DegenerateInputError("the two points must be distinct")
    return compose(MoebiusMap((Translate(h_inv(a1)),), field, n), head)


# ---------------------------------------------------------------------------
# cross-ratios
# ---------------------------------------------------------------------------


def _distance_fn(metric) -> Callable:
    if metric is None:
        return koranyi_dist
    if hasattr(metric, "dist"):
        return metric.dist
    return metric


@dataclass(frozen=True)
class CrossRatioPair:
    x1: object
    x2: object


def cross_ratio(metric, p1, p2, p3, p4):
    """|X|(p1,p2,p3,p4) = d(p4,p2)/d(p4,p1) * d(p3,p1)/d(p3,p2).

    A factor pair involving INF is dropped (their ratio counts as 1).
    """
    d = _distance_fn(metric)
    pts = (p1, p2, p3, p4)
    if sum(is_inf(p) for p in pts) > 1:
        raise DegenerateInputError("a quadruple may contain at most one INF")
    for i in range(4):
        for j in range(i + 1, 4):
            if is_inf(pts[i]) or is_inf(pts[j]):
                continue
            if np.any(np.asarray(d(pts[i], pts[j])) == 0):
                raise DegenerateInputError(f"points {i + 1} and {j + 1} coincide")
    num = [(p4, p2), (p3, p1)]
    den = [(p4, p1), (p3, p2)]
    value = 1.0
    for a, b in num:
        if not (is_inf(a) or is_inf(b)):
            value = value * d(a, b)
    for a, b in den:
        if not (is_inf(a) or is_inf(b)):
            value = value / d(a, b)
    return value


def cross_ratio_pair(metric, quadruple: Sequence) -> CrossRatioPair:
    p1, p2, p3, p4 = quadruple
    return CrossRatioPair(
        cross_ratio(metric, p1, p2, p3, p4), cross_ratio(metric, p1, p3, p2, p4)
    )


# index orders matching six_values entry by entry
SIX_PERMUTATIONS = (
    (0, 1, 2, 3),
    (0, 2, 1, 3),
    (0, 2, 3, 1),
    (0, 3, 2, 1),
    (0, 1, 3, 2),
    (0, 3, 1, 2),
)

# orbits under which |X| is unchanged
SYMMETRIES = ((0, 1, 2, 3), (1, 0, 3, 2), (2, 3, 0, 1), (3, 2, 1, 0))


def six_values(cr: CrossRatioPair) -> list:
    x1, x2 = cr.x1, cr.x2
    for x in (x1, x2):
        if np.any(~np.isfinite(x)) or np.any(np.asarray(x) <= 0):
            raise DegenerateInputError("cross-ratio components must be finite and positive")
    return [x1, x2, 1 / x2, x1 / x2, 1 / x1, x2 / x1]


def all_cross_ratios(metric, quadruple) -> dict:
    """|X| for all 24 orderings of the quadruple, keyed by index tuple."""
    return {
        perm: cross_ratio(metric, *(quadruple[i] for i in perm))
        for perm in permutations(range(4))
    }


# ---------------------------------------------------------------------------
# similarity factor and inversion identities
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NotASimilarity:
    reason: str
    spread: float = math.inf
    witness: tuple | None = None

    def __bool__(self):
        return False


def similarity_factor(
    m: MoebiusMap,
    metric=None,
    *,
    field: str = "C",
    n: int = 2,
    samples: int = 64,
    seed=0,
    tol: float = 1e-8,
):
    """Common ratio d(m p, m q) / d(p, q) over sampled pairs, or NotASimilarity."""
    if not fixes_infinity(m, field, n):
        return NotASimilarity("map does not fix infinity")
    d = _distance_fn(metric)
    rng = np.random.default_rng(seed)
    p = random_points(rng, field, n, samples)
    q = random_points(rng, field, n, samples)
    base = np.asarray(d(p, q), dtype=float)
    while np.any(base == 0):
        bad = base == 0
        q = _replace(q, bad, random_points(rng, field, n, int(bad.sum())))
        base = np.asarray(d(p, q), dtype=float)
    ratio = np.asarray(d(apply_map(m, p), apply_map(m, q)), dtype=float) / base
    mean = float(np.mean(ratio))
    dev = np.abs(ratio - mean)
    spread = float((ratio.max() - ratio.min()) / mean)
    if spread < tol:
        return mean
    k = int(np.argmax(dev))
    return NotASimilarity("ratio is not constant", spread, (p[k], q[k]))


def _replace(batch: HPoint, mask, fresh: HPoint) -> HPoint:
    z = np.array(batch.zeta)
    v = np.array(batch.v)
    z[mask] = fresh.zeta
    v[mask] = fresh.v
    return HPoint(batch.field, z, v)


@dataclass
class InversionReport:
    beta_squared: float
    pointwise_residual: float
    two_point_residual: float
    sphere_residual: float
    samples: int
    tol: float
    witness: dict = dc_field(default_factory=dict)

    @property
    def max_residual(self) -> float:
        return max(self.pointwise_residual, self.two_point_residual, self.sphere_residual)

    @property
    def passed(self) -> bool:
        return self.max_residual < self.tol


def _sphere_points(d, field, n, directions: HPoint, radius: float) -> HPoint:
    """Scale each direction by a dilation so that d(o, .) == radius."""
    o = origin(field, n)
    lo = np.full(len(directions), -40.0)
    hi = np.full(len(directions), 40.0)
    for _ in range(120):
        mid = 0.5 * (lo + hi)
        r = np.asarray(d(o, dilate(directions, np.exp2(mid))))
        big = r > radius
        hi = np.where(big, mid, hi)
        lo = np.where(big, lo, mid)
    return dilate(directions, np.exp2(0.5 * (lo + hi)))


def verify_inversion_identities(
    metric=None, *, field: str = "C", n: int = 2, samples: int = 1000, seed=0, tol=1e-10
) -> InversionReport:
    """Check d(o,p) d(o,Ip) = beta^2 and the two-point inversion identity."""
    d = _distance_fn(metric)
    inv = Invert()
    o = origin(field, n)
    p0 = unit_horizontal(field, n)
    beta2 = float(d(o, p0) * d(o, inv(p0)))
    rng = np.random.default_rng(seed)
    p = random_points(rng, field, n, samples)
    q = random_points(rng, field, n, samples)
    ip, iq = inv(p), inv(q)
    dop, doq = np.asarray(d(o, p)), np.asarray(d(o, q))

    r1 = np.abs(dop * np.asarray(d(o, ip)) - beta2) / beta2
    rhs = np.asarray(d(p, q)) * beta2 / (dop * doq)
    r2 = np.abs(np.asarray(d(ip, iq)) - rhs) / rhs

    radius = math.sqrt(beta2)
    s = _sphere_points(d, field, n, random_points(rng, field, n, samples), radius)
    on_sphere = np.abs(np.asarray(d(o, s)) - radius) / radius
    r3 = np.abs(np.asarray(d(o, inv(s))) - radius) / radius + on_sphere

    k1, k2, k3 = int(np.argmax(r1)), int(np.argmax(r2)), int(np.argmax(r3))
    witness = {
        "pointwise": {"p": p[k1], "residual": float(r1[k1])},
        "two_point": {"p": p[k2], "q": q[k2], "residual": float(r2[k2])},
        "sphere": {"p": s[k3], "residual": float(r3[k3])},
    }
    return InversionReport(
        beta2, float(r1.max()), float(r2.max()), float(r3.max()), samples, tol, witness
    )


def verify_inversion_decomposition(p: HPoint) -> float:
    """Coordinate sup-norm gap between I(p) and D_{1/|A|} J R_{-A/|A|} J (p^-1)."""
    if p.batch_shape:
        raise ValueError("verify_inversion_decomposition takes a single point")
    a = gauge_argument(p)
    abs_a = float(alg.norm(a))
    if abs_a == 0:
        raise DegenerateInputError("the decomposition is undefined at the origin")
    lam = -a / abs_a
    x = conjugate(h_inv(p))
    x = HPoint(p.field, alg.mul(lam, x.zeta), x.v)
    x = dilate(conjugate(x), 1.0 / abs_a)
    lhs = Invert()(p)
    return float(max(np.max(np.abs(lhs.zeta - x.zeta)), np.max(np.abs(lhs.v - x.v))))
