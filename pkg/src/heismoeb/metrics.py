"""Candidate metrics on the boundary and exponent fitting.

Every model exposes ``dist(p, q)`` with the conventions d(p, INF) = inf and
d(INF, INF) = 0, and evaluates batches of finite points elementwise.  Most
models are left-invariant and given by a gauge, d(p, q) = gauge(q^-1 * p).

The Carnot-Caratheodory distance on the complex Heisenberg group (n = 2) is
computed from the explicit family of geodesics issuing from the origin.  With
the group law used here a horizontal curve gains vertical coordinate
t = -4 * (signed area swept in the zeta-plane), so a geodesic ending at
(z, t) projects to a circular arc through 0 and z with turning angle theta
solving

    (theta - sin theta) / (2 sin^2(theta / 2)) = |t| / |z|^2,

and its length is |z| theta / (2 sin(theta / 2)).  The left side is
increasing on (0, 2 pi), so theta is found by bisection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Callable

import numpy as np

from . import algebra as alg
from .heisenberg import (
    HPoint,
    h_inv,
    h_mul,
    horizontal_sqnorm,
    is_inf,
    koranyi_gauge,
    origin,
    unit_horizontal,
)
from .moebius import Dilate, MoebiusMap, NotASimilarity, similarity_factor


class SolverError(RuntimeError):
    """The geodesic bisection failed to bracket or converge."""


class NotDilationCompatible(ValueError):
    """Some dilation does not act as a similarity of the model."""

    def __init__(self, delta: float, spread: float):
        super().__init__(f"D_{delta:g} is not a similarity (ratio spread {spread:.3g})")
        self.delta = delta
        self.spread = spread


class ModelFieldError(ValueError):
    """The model is not defined over the requested field or dimension."""


def _as_scalar(x):
    return float(x) if np.ndim(x) == 0 else x


class MetricModel:
    kind = "abstract"
    tol = 1e-8
    left_invariant = True

    def supports(self, field: str, n: int) -> bool:
        return True

    def check_space(self, field: str, n: int):
        if not self.supports(field, n):
            raise ModelFieldError(f"{self.descriptor()} is not defined for K={field}, n={n}")

    def gauge(self, x: HPoint):
        raise NotImplementedError

    def _dist(self, p: HPoint, q: HPoint):
        return self.gauge(h_mul(h_inv(q), p))

    def dist(self, p, q):
        if is_inf(p) or is_inf(q):
            return 0.0 if (is_inf(p) and is_inf(q)) else math.inf
        self.check_space(p.field, p.n)
        return _as_scalar(self._dist(p, q))

    __call__ = dist

    def descriptor(self) -> str:
        return self.kind

    def to_json(self) -> dict:
        return {"kind": self.kind}

    def __repr__(self):
        return self.descriptor()


class KoranyiPower(MetricModel):
    """beta * d_H ** alpha.  Exponents above 1 are allowed as counterexample probes."""

    kind = "koranyi_power"

    def __init__(self, alpha: float = 1.0, beta: float = 1.0):
        if not alpha > 0 or not beta > 0:
            raise ValueError("koranyi_power needs alpha > 0 and beta > 0")
        self.alpha = float(alpha)
        self.beta = float(beta)

    @property
    def in_range(self) -> bool:
        return self.alpha <= 1.0

    def gauge(self, x):
        return self.beta * np.asarray(koranyi_gauge(x)) ** self.alpha

    def descriptor(self):
        return f"koranyi_power(alpha={self.alpha:g},beta={self.beta:g})"

    def to_json(self):
        return {"kind": self.kind, "alpha": self.alpha, "beta": self.beta}


class EuclideanR(MetricModel):
    kind = "euclidean_r"

    def __init__(self, n: int | None = None):
        self.n = n

    def supports(self, field, n):
        return field == "R" and (self.n is None or self.n == n)

    def _dist(self, p, q):
        return np.sqrt(alg.sqnorm(p.zeta - q.zeta).sum(axis=-1))

    def gauge(self, x):
        return np.sqrt(horizontal_sqnorm(x))

    def descriptor(self):
        return "euclidean_r" if self.n is None else f"euclidean_r(n={self.n})"

    def to_json(self):
        out = {"kind": self.kind}
        if self.n is not None:
            out["n"] = self.n
        return out


GAUGE_NORMS = ("default", "scaled16")


def reference_gauge(x: HPoint, gauge_norm: str = "default"):
    """Koranyi gauge, or the rescaled (||zeta||^4 + 16 |v|^2)^(1/4)."""
    if gauge_norm == "default":
        return koranyi_gauge(x)
    if gauge_norm == "scaled16":
        return _as_scalar((horizontal_sqnorm(x) ** 2 + 16.0 * alg.sqnorm(x.v)) ** 0.25)
    raise ValueError(f"unknown gauge normalization {gauge_norm!r}")


class CCH1(MetricModel):
    """Carnot-Caratheodory distance on the complex Heisenberg group, n = 2.

    ``gauge_norm`` only selects the Koranyi-type gauge that CC values are
    compared against; the CC distance itself does not depend on it.
    """

    kind = "cc_h1"
    tol = 1e-6

    def __init__(self, gauge_norm: str = "default"):
        if gauge_norm not in GAUGE_NORMS:
            raise ValueError(f"gauge_norm must be one of {GAUGE_NORMS}")
        self.gauge_norm = gauge_norm

    def supports(self, field, n):
        return field == "C" and n == 2

    def gauge(self, x):
        return cc_from_origin(x)

    def reference(self, x):
        return reference_gauge(x, self.gauge_norm)

    def descriptor(self):
        return "cc_h1" if self.gauge_norm == "default" else f"cc_h1(gauge_norm={self.gauge_norm})"

    def to_json(self):
        return {"kind": self.kind, "gauge_norm": self.gauge_norm}


class CustomGauge(MetricModel):
    """A user metric, given either as a gauge or as a two-point distance.

    With ``gauge`` the distance is gauge(q^-1 * p).  With ``distance`` the
    callable is used directly and ``left_invariant`` is only a declaration,
    which the classifier checks by sampling.
    """

    kind = "custom"

    def __init__(
        self,
        name: str,
        gauge: Callable | None = None,
        distance: Callable | None = None,
        left_invariant: bool = True,
        params: dict | None = None,
        fields: tuple = alg.FIELDS,
    ):
        if (gauge is None) == (distance is None):
            raise ValueError("give exactly one of gauge= or distance=")
        self.name = name
        self._gauge = gauge
        self._distance = distance
        self.left_invariant = bool(left_invariant) if distance is not None else True
        self.params = dict(params or {})
        self.fields = tuple(fields)

    def supports(self, field, n):
        return field in self.fields

    def gauge(self, x):
        if self._gauge is None:
            return self._distance(x, origin(x.field, x.n, x.batch_shape))
        return self._gauge(x)

    def _dist(self, p, q):
        if self._distance is not None:
            return self._distance(p, q)
        return self._gauge(h_mul(h_inv(q), p))

    def descriptor(self):
        if not self.params:
            return f"custom:{self.name}"
        args = ",".join(f"{k}={v:g}" for k, v in sorted(self.params.items()))
        return f"custom:{self.name}({args})"

    def to_json(self):
        return {"kind": self.kind, "name": self.name, **self.params}


class Scaled(MetricModel):
    """c * model."""

    def __init__(self, model: MetricModel, c: float):
        if not c > 0:
            raise ValueError("scale must be positive")
        self.model = model
        self.c = float(c)
        self.kind = model.kind
        self.tol = model.tol
        self.left_invariant = model.left_invariant

    def supports(self, field, n):
        return self.model.supports(field, n)

    def gauge(self, x):
        return self.c * np.asarray(self.model.gauge(x))

    def _dist(self, p, q):
        return self.c * np.asarray(self.model._dist(p, q))

    def descriptor(self):
        return f"{self.c:g}*{self.model.descriptor()}"

    def to_json(self):
        return {"kind": "scaled", "c": self.c, "model": self.model.to_json()}


# ---------------------------------------------------------------------------
# built-in custom gauges
# ---------------------------------------------------------------------------


def weighted_koranyi(weight: float) -> CustomGauge:
    """(||zeta||^4 + weight^2 |v|^2)^(1/4): satisfies (G) but not (Eq) unless weight = 1."""
    w2 = float(weight) ** 2

    def g(x):
        return (horizontal_sqnorm(x) ** 2 + w2 * alg.sqnorm(x.v)) ** 0.25

    return CustomGauge("weighted_koranyi", gauge=g, params={"weight": float(weight)})


def rotation_broken(eps: float = 0.1) -> CustomGauge:
    """max(||zeta||, |v|^(1/2)) + eps |Re zeta_1|, which no rotation preserves."""

    def g(x):
        base = np.maximum(np.sqrt(horizontal_sqnorm(x)), alg.norm(x.v) ** 0.5)
        return base + eps * np.abs(x.zeta[..., 0, 0])

    return CustomGauge("rotation_broken", gauge=g, params={"eps": float(eps)})


def discontinuous() -> CustomGauge:
    """Koranyi gauge plus 1 on the punctured horizontal plane."""

    def g(x):
        jump = (alg.sqnorm(x.v) == 0) & (horizontal_sqnorm(x) > 0)
        return np.asarray(koranyi_gauge(x)) + jump

    return CustomGauge("discontinuous", gauge=g)


CUSTOM_BUILDERS = {
    "weighted_koranyi": lambda cfg: weighted_koranyi(cfg.get("weight", 0.25)),
    "rotation_broken": lambda cfg: rotation_broken(cfg.get("eps", 0.1)),
    "discontinuous": lambda cfg: discontinuous(),
}


def metric_eval(model: MetricModel, p, q):
    return model.dist(p, q)


# ---------------------------------------------------------------------------
# Carnot-Caratheodory distance
# ---------------------------------------------------------------------------


def _theta_minus_sin(th):
    small = th < 1e-2
    t2 = th * th
    series = th * t2 / 6.0 * (1 - t2 / 20.0 * (1 - t2 / 42.0 * (1 - t2 / 72.0)))
    return np.where(small, series, th - np.sin(th))


def _twist_area(th):
    """(theta - sin theta) / (2 sin^2(theta/2)); increasing on (0, 2 pi)."""
    s = np.sin(th / 2)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(th > 0, _theta_minus_sin(th) / (2 * s * s), 0.0)


def cc_from_origin(p: HPoint, max_iter: int = 200):
    """Sub-Riemannian distance from the origin to ``p`` (K = C, n = 2 only).

    The horizontal frame is the left-invariant one dual to the group law,
    normalized so that cc_from_origin((zeta, 0)) = |zeta|.
    """
    if p.field != "C" or p.n != 2:
        raise ModelFieldError("the CC distance is implemented for K = C, n = 2 only")
    c = np.sqrt(horizontal_sqnorm(p))
    t = np.abs(p.v[..., 1])
    c, t = np.broadcast_arrays(np.atleast_1d(c), np.atleast_1d(t))
    out = np.empty_like(c, dtype=float)

    horiz = t == 0
    vert = (c == 0) & ~horiz
    out[horiz] = c[horiz]
    out[vert] = np.sqrt(math.pi * t[vert])

    gen = ~(horiz | vert)
    if np.any(gen):
        cg, tg = c[gen], t[gen]
        target = tg / (cg * cg)
        lo = np.zeros_like(cg)
        hi = np.full_like(cg, 2 * math.pi)
        for _ in range(max_iter):
            mid = 0.5 * (lo + hi)
            below = _twist_area(mid) < target
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
            if np.all(hi - lo <= 4 * np.finfo(float).eps * hi + 1e-300):
                break
        else:
            worst = int(np.argmax((hi - lo) / hi))
            raise SolverError(
                f"bisection did not converge in {max_iter} steps "
                f"(|zeta|={cg[worst]!r}, |t|={tg[worst]!r}, bracket={lo[worst]!r}..{hi[worst]!r})"
            )
        th = 0.5 * (lo + hi)
        s = np.sin(th / 2)
        with np.errstate(divide="ignore", invalid="ignore"):
            arc = np.where(th > 1e-8, th / (2 * s), 1.0 + th * th / 24.0)
            by_length = cg * arc
            by_area = np.sqrt(tg * th * th / (2 * _theta_minus_sin(th)))
        out[gen] = np.where(th <= math.pi, by_length, by_area)
    return _as_scalar(out.reshape(np.shape(p.v[..., 1])))


def cc_ratio_extremes(points: HPoint, gauge_norm: str = "default") -> tuple[float, float]:
    """(min, max) of cc_from_origin / reference gauge over a batch of points."""
    r = np.asarray(cc_from_origin(points)) / np.asarray(reference_gauge(points, gauge_norm))
    return float(r.min()), float(r.max())


# ---------------------------------------------------------------------------
# exponent fitting
# ---------------------------------------------------------------------------


@dataclass
class FitResult:
    alpha: float
    beta: float
    residual: float
    subadditive: bool = True
    factors: dict = dc_field(default_factory=dict)


DILATION_EXPONENTS = tuple(range(-8, 9))


def estimate_alpha_beta(
    model: MetricModel, *, field: str = "C", n: int = 2, samples: int = 64, seed=0
) -> FitResult:
    """Fit K(D_delta) = delta^alpha over delta = 2^-8 .. 2^8; beta = d(o, (e1, 0))."""
    model.check_space(field, n)
    deltas, factors = [], []
    for k in DILATION_EXPONENTS:
        delta = 2.0**k
        f = similarity_factor(
            MoebiusMap.of(Dilate(delta), field=field, n=n),
            model,
            field=field,
            n=n,
            samples=samples,
            seed=seed,
            tol=max(model.tol, 1e-8),
        )
        if isinstance(f, NotASimilarity):
            raise NotDilationCompatible(delta, f.spread)
        deltas.append(delta)
        factors.append(f)
    x = np.log(deltas)
    y = np.log(factors)
    alpha = float(np.dot(x, y) / np.dot(x, x))
    predicted = np.exp2(np.array(DILATION_EXPONENTS) * alpha)
    residual = float(np.max(np.abs(np.array(factors) - predicted) / predicted))
    beta = float(model.dist(origin(field, n), unit_horizontal(field, n)))

    rng = np.random.default_rng(seed)
    d1, d2 = rng.uniform(0.01, 100.0, size=(2, 256))
    subadditive = bool(np.all((d1 + d2) ** alpha <= (d1**alpha + d2**alpha) * (1 + 1e-12)))
    return FitResult(
        alpha, beta, residual, subadditive, {f"{k}": f for k, f in zip(DILATION_EXPONENTS, factors)}
    )
