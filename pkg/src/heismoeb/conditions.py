"""Sampling checkers for the rigidity conditions and the implication audit.

Each checker returns a :class:`ConditionReport` with a verdict of ``pass``,
``fail`` or ``inconclusive``.  Failing reports always carry a witness.  The
random streams depend only on ``(seed, model, field, n, condition)``, so a
report is reproducible byte for byte and independent of execution order.

Condition names::

    Sim           similarities of the Koranyi metric are similarities of d
    TopHeuristic  Koranyi-convergent sequences converge in d (sampled)
    Inv           the inversion is a Moebius map of d
    AlphaHoelder  d <= beta_1 2^((4-alpha)/4) d_H^alpha
    G             d^(4/a)(o,p) = d^(4/a)(o,(zeta,0)) + d^(4/a)(o,(0,v))
    PL            the four-term parallelogram form of G
    Eq            d(o,(e1,0)) = d(o,(0,f1))
    BiLip         d and d_H^alpha are bi-Lipschitz equivalent
    AlphaMet      d = beta d_H^alpha with alpha in (0, 1]
    Ptol          Ptolemy's inequality
    Circ          the horizontal real line is a Ptolemaean circle
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import algebra as alg
from .heisenberg import (
    INF,
    HPoint,
    dilate,
    gauge_argument,
    h_inv,
    h_mul,
    h_split,
    koranyi_gauge,
    origin,
    stack,
    unit_horizontal,
    unit_vertical,
)
from .metrics import (
    CCH1,
    KoranyiPower,
    MetricModel,
    NotDilationCompatible,
    estimate_alpha_beta,
)
from .moebius import (
    Conjugate,
    Dilate,
    Invert,
    MoebiusMap,
    RotateOct,
    RotateQuat,
    Rotate,
    Translate,
    apply_map,
    normalizing_word,
    random_rotation,
    random_unit,
    random_word,
    verify_inversion_identities,
    verify_inversion_decomposition,
)
from .sampling import dyadic_points, random_points, stream

CONDITIONS = (
    "Sim",
    "TopHeuristic",
    "Inv",
    "AlphaHoelder",
    "G",
    "PL",
    "Eq",
    "BiLip",
    "AlphaMet",
    "Ptol",
    "Circ",
)
VERDICTS = ("pass", "fail", "inconclusive")


@dataclass
class ConditionReport:
    condition: str
    verdict: str
    model: str
    field: str
    n: int
    samples: int
    seed: int
    constants: dict = dc_field(default_factory=dict)
    witness: dict | None = None
    notes: list = dc_field(default_factory=list)

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ValueError(f"bad verdict {self.verdict!r}")
        if self.verdict == "fail" and not self.witness:
            raise ValueError("a failing report needs a witness")

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_dict(self) -> dict:
        from .jsonio import to_jsonable

        return {
            "condition": self.condition,
            "verdict": self.verdict,
            "model": self.model,
            "field": self.field,
            "n": self.n,
            "samples": self.samples,
            "seed": self.seed,
            "constants": to_jsonable(self.constants),
            "witness": to_jsonable(self.witness),
            "notes": list(self.notes),
        }


def _rng(seed, model, field, n, condition):
    return stream(seed, model.descriptor(), field, n, condition)


def _tol(model, tol):
    return model.tol if tol is None else tol


def _check_alpha(alpha):
    if not 0 < alpha <= 1:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")


def _pairs(rng, field, n, size, spread=4):
    """Sampled pairs with distinct members."""
    p = random_points(rng, field, n, size, spread=spread)
    q = random_points(rng, field, n, size, spread=spread)
    same = np.asarray(koranyi_gauge(h_mul(h_inv(q), p))) == 0
    if np.any(same):
        q = h_mul(q, unit_horizontal(field, n))
    return p, q


def _at(batch: HPoint, k: int):
    return batch[int(k)]


def _arr(x):
    return np.asarray(x, dtype=float)


def _vacuous(condition, model, field, n, samples, seed):
    return ConditionReport(
        condition, "pass", model.descriptor(), field, n, samples, seed,
        notes=["holds vacuously for K = R"],
    )


# ---------------------------------------------------------------------------
# (Sim)
# ---------------------------------------------------------------------------


def _isometries(rng, field, n):
    maps = []
    for i in range(4):
        maps.append((f"translate[{i}]", Translate(random_points(rng, field, n, None))))
    if field != "O":
        for i in range(4):
            maps.append((f"rotate[{i}]", Rotate(random_rotation(field, n, rng))))
    if field == "H":
        for i in range(2):
            maps.append((f"rotate_quat[{i}]", RotateQuat(random_unit(rng, "H"))))
    if field == "O":
        for i in range(4):
            maps.append((f"rotate_oct[{i}]", RotateOct(random_unit(rng, "O", imaginary=True))))
    if field in ("R", "C"):
        maps.append(("conjugate", Conjugate()))
    return maps


SIM_DILATIONS = (0.5, 2.0, 3.0, 10.0)


def check_sim_invariance(
    model: MetricModel, *, field="C", n=2, samples=256, seed=0, tol=None
) -> ConditionReport:
    """Isometries must preserve d; each dilation must scale it by one constant.

    The conjugation J is included for K = R and C only: for H and O it is
    not an isometry of the Koranyi metric itself.
    """
    model.check_space(field, n)
    tol = _tol(model, tol)
    rng = _rng(seed, model, field, n, "Sim")
    p, q = _pairs(rng, field, n, samples)
    base = _arr(model.dist(p, q))
    worst, worst_dev = None, -1.0
    factors = {}
    for label, g in _isometries(rng, field, n):
        r = _arr(model.dist(g(p), g(q))) / base
        dev = np.abs(r - 1.0)
        k = int(np.argmax(dev))
        if dev[k] > worst_dev:
            worst_dev = float(dev[k])
            worst = {"map": label, "generator": MoebiusMap.of(g, field=field, n=n),
                     "p": _at(p, k), "q": _at(q, k), "ratio": float(r[k])}
    for delta in SIM_DILATIONS:
        r = _arr(model.dist(dilate(p, delta), dilate(q, delta))) / base
        mean = float(r.mean())
        factors[f"{delta:g}"] = mean
        dev = np.abs(r - mean) / mean
        k = int(np.argmax(dev))
        if dev[k] > worst_dev:
            worst_dev = float(dev[k])
            worst = {"map": f"dilate[{delta:g}]", "generator": MoebiusMap.of(Dilate(delta)),
                     "p": _at(p, k), "q": _at(q, k), "ratio": float(r[k]), "mean_ratio": mean}
    worst["deviation"] = worst_dev
    verdict = "pass" if worst_dev < tol else "fail"
    notes = [] if field in ("R", "C") else ["J omitted: not a Koranyi isometry for H and O"]
    return ConditionReport(
        "Sim", verdict, model.descriptor(), field, n, samples, seed,
        constants={"dilation_factors": factors, "max_deviation": worst_dev},
        witness=worst if verdict == "fail" else None,
        notes=notes,
    )


# ---------------------------------------------------------------------------
# (Top), heuristically
# ---------------------------------------------------------------------------

TOP_STEPS = 24


def _top_directions(rng, field, n, size):
    d = alg.DIMS[field]
    dirs = {"horizontal": unit_horizontal(field, n)}
    if field != "R":
        dirs["vertical"] = unit_vertical(field, n)
    z = rng.integers(-8, 9, size=(size, n - 1, d)) / 8.0
    z[:, 0, 0] = np.where(np.all(z == 0, axis=(1, 2)), 1.0, z[:, 0, 0])
    v = rng.integers(-2, 3, size=(size, d)) / 2.0
    v[:, 0] = 0.0
    dirs["generic"] = HPoint(field, z, v)
    return dirs


def check_top_heuristic(
    model: MetricModel, *, field="C", n=2, samples=32, seed=0, tol=None
) -> ConditionReport:
    """Follow p * D_{2^-k}(u) -> p for dyadic p, u and k = 1..24.

    All coordinates stay dyadic, so the group products are exact and any
    failure to converge comes from the model, not from rounding.  Passing
    needs every normalized sequence d(p_k, p) / d(p_1, p) to be
    nonincreasing and below 0.05 at the end; a sequence whose last eight
    terms stay above 0.5 is a non-convergence witness.
    """
    model.check_space(field, n)
    rng = _rng(seed, model, field, n, "TopHeuristic")
    base = dyadic_points(rng, field, n, samples)
    dirs = _top_directions(rng, field, n, samples)
    status, witness, tails = "pass", None, {}
    for name, u in dirs.items():
        seq = np.stack(
            [_arr(model.dist(h_mul(base, dilate(u, 2.0**-k)), base)) * np.ones(samples)
             for k in range(1, TOP_STEPS + 1)],
            axis=-1,
        )
        with np.errstate(divide="ignore", invalid="ignore"):
            r = seq / seq[:, :1]
        finite = np.all(np.isfinite(r), axis=1)
        stuck = ~finite | (r[:, -8:].min(axis=1) >= 0.5)
        monotone = np.all(np.diff(r, axis=1) <= 1e-9, axis=1)
        converged = finite & monotone & (r[:, -1] <= 0.05)
        tails[name] = float(np.nanmax(r[:, -1]))
        if np.any(stuck):
            k = int(np.argmax(stuck))
            status = "fail"
            witness = {"direction": name, "base": _at(base, k),
                       "step": u if not u.batch_shape else _at(u, k),
                       "distances": seq[k].tolist()}
            break
        if not np.all(converged) and status == "pass":
            k = int(np.argmin(converged))
            status = "inconclusive"
            witness = {"direction": name, "base": _at(base, k),
                       "step": u if not u.batch_shape else _at(u, k),
                       "distances": seq[k].tolist()}
    return ConditionReport(
        "TopHeuristic", status, model.descriptor(), field, n, samples, seed,
        constants={"final_ratio": tails, "steps": TOP_STEPS},
        witness=witness,
        notes=["sampled heuristic: a pass does not certify continuity"],
    )


# ---------------------------------------------------------------------------
# (Inv)
# ---------------------------------------------------------------------------


def check_inv(model: MetricModel, *, field="C", n=2, samples=256, seed=0, tol=None) -> ConditionReport:
    model.check_space(field, n)
    tol = _tol(model, tol)
    rng = _rng(seed, model, field, n, "Inv")
    rep = verify_inversion_identities(
        model, field=field, n=n, samples=samples, seed=int(rng.integers(2**63)), tol=tol
    )
    verdict = "pass" if rep.passed else "fail"
    worst = max(rep.witness.items(), key=lambda kv: kv[1]["residual"])
    return ConditionReport(
        "Inv", verdict, model.descriptor(), field, n, samples, seed,
        constants={
            "beta_squared": rep.beta_squared,
            "pointwise_residual": rep.pointwise_residual,
            "two_point_residual": rep.two_point_residual,
            "sphere_residual": rep.sphere_residual,
        },
        witness={"identity": worst[0], **worst[1]} if verdict == "fail" else None,
    )


# ---------------------------------------------------------------------------
# (alpha-Hoel)
# ---------------------------------------------------------------------------


def _beta1(model, field, n):
    o = origin(field, n)
    values = [float(model.dist(o, unit_horizontal(field, n)))]
    if field != "R":
        values.append(float(model.dist(o, unit_vertical(field, n))))
    return max(values)


HOELDER_BANDS = (-8, 0, 8)


def check_alpha_holder(
    model: MetricModel, alpha: float, *, field="C", n=2, samples=256, seed=0, tol=None
) -> ConditionReport:
    """Test d <= beta_1 2^((4-alpha)/4) d_H^alpha and probe uniformity across scales.

    The ratio sup is also computed on three dilation bands 2^-8, 1, 2^8 of
    one base sample; sups differing by more than 5% are flagged non_uniform.
    """
    _check_alpha(alpha)
    model.check_space(field, n)
    tol = _tol(model, tol)
    rng = _rng(seed, model, field, n, "AlphaHoelder")
    beta1 = _beta1(model, field, n)
    const = 2.0 ** ((4.0 - alpha) / 4.0)
    bound = beta1 * const
    p, q = _pairs(rng, field, n, samples, spread=8)
    ratio = _arr(model.dist(p, q)) / _arr(koranyi_gauge(h_mul(h_inv(q), p))) ** alpha
    k = int(np.argmax(ratio))
    bp, bq = _pairs(rng, field, n, samples, spread=0)
    band = {}
    for e in HOELDER_BANDS:
        s = 2.0**e
        x, y = dilate(bp, s), dilate(bq, s)
        band[str(e)] = float(np.max(
            _arr(model.dist(x, y)) / _arr(koranyi_gauge(h_mul(h_inv(y), x))) ** alpha
        ))
    non_uniform = max(band.values()) / min(band.values()) > 1.05
    ok = float(ratio[k]) <= bound * (1 + tol)
    notes = ["ratio d / d_H^alpha changes with scale"] if non_uniform else []
    return ConditionReport(
        "AlphaHoelder", "pass" if ok else "fail", model.descriptor(), field, n, samples, seed,
        constants={"alpha": alpha, "beta1": beta1, "holder_constant": const, "bound": bound,
                   "empirical_sup": float(ratio[k]), "band_sups": band,
                   "non_uniform": non_uniform},
        witness=None if ok else {"p": _at(p, k), "q": _at(q, k), "ratio": float(ratio[k])},
        notes=notes,
    )


# ---------------------------------------------------------------------------
# (G), (P-L), (Eq)
# ---------------------------------------------------------------------------


def check_G(
    model: MetricModel, alpha: float, *, field="C", n=2, samples=256, seed=0, tol=None
) -> ConditionReport:
    """Residual of d^(4/a)(o,p) = d^(4/a)(o,(zeta,0)) + d^(4/a)(o,(0,v)).

    Models declared non-left-invariant also get the literal two-point
    reading d((zeta,0),(0,v)) reported alongside.
    """
    model.check_space(field, n)
    if field == "R":
        return _vacuous("G", model, field, n, samples, seed)
    _check_alpha(alpha)
    tol = _tol(model, tol)
    rng = _rng(seed, model, field, n, "G")
    p = random_points(rng, field, n, samples, spread=4)
    o = origin(field, n, (samples,))
    h, w = h_split(p)
    e = 4.0 / alpha
    full = _arr(model.dist(o, p))
    res = np.abs(1.0 - (_arr(model.dist(o, h)) / full) ** e - (_arr(model.dist(o, w)) / full) ** e)
    k = int(np.argmax(res))
    constants = {"alpha": alpha, "max_residual": float(res[k])}
    if not model.left_invariant:
        lit = np.abs(1.0 - (_arr(model.dist(o, h)) / full) ** e - (_arr(model.dist(h, w)) / full) ** e)
        constants["literal_reading_residual"] = float(lit.max())
    ok = res[k] < tol
    return ConditionReport(
        "G", "pass" if ok else "fail", model.descriptor(), field, n, samples, seed,
        constants=constants,
        witness=None if ok else {"p": _at(p, k), "residual": float(res[k])},
    )


def check_PL(
    model: MetricModel, alpha: float, *, field="C", n=2, samples=256, seed=0, tol=None
) -> ConditionReport:
    """Four-term identity over p*q, p^-1*q, p*q^-1, p^-1*q^-1 with |x| = d(o, x)."""
    model.check_space(field, n)
    if field == "R":
        return _vacuous("PL", model, field, n, samples, seed)
    _check_alpha(alpha)
    tol = _tol(model, tol)
    rng = _rng(seed, model, field, n, "PL")
    p, q = _pairs(rng, field, n, samples)
    o = origin(field, n, (samples,))
    e = 4.0 / alpha
    prods = [h_mul(p, q), h_mul(h_inv(p), q), h_mul(p, h_inv(q)), h_mul(h_inv(p), h_inv(q))]
    full = [_arr(model.dist(o, x)) for x in prods]
    scale = np.max(full, axis=0)
    lhs = sum((f / scale) ** e for f in full)
    hz = [_arr(model.dist(o, h_split(x)[0])) / scale for x in prods]
    vt = [_arr(model.dist(o, h_split(x)[1])) / scale for x in prods]
    rhs = 2.0 * (hz[0] ** e + hz[1] ** e) + sum(x**e for x in vt)
    res = np.abs(lhs - rhs) / lhs
    k = int(np.argmax(res))
    ok = res[k] < tol
    return ConditionReport(
        "PL", "pass" if ok else "fail", model.descriptor(), field, n, samples, seed,
        constants={"alpha": alpha, "max_residual": float(res[k])},
        witness=None if ok else {"p": _at(p, k), "q": _at(q, k), "residual": float(res[k])},
    )


def check_eq(model: MetricModel, *, field="C", n=2, seed=0, tol=1e-10) -> ConditionReport:
    model.check_space(field, n)
    if field == "R":
        return _vacuous("Eq", model, field, n, 1, seed)
    o = origin(field, n)
    a = float(model.dist(o, unit_horizontal(field, n)))
    b = float(model.dist(o, unit_vertical(field, n)))
    ok = abs(a - b) < tol * max(a, b)
    return ConditionReport(
        "Eq", "pass" if ok else "fail", model.descriptor(), field, n, 1, seed,
        constants={"horizontal": a, "vertical": b},
        witness=None if ok else {"horizontal": a, "vertical": b, "gap": abs(a - b)},
    )


# ---------------------------------------------------------------------------
# (biLip), (alpha-Met)
# ---------------------------------------------------------------------------


def _spread_for(size):
    return max(4, math.ceil(math.log2(max(size, 2))))


def check_biLip(
    model: MetricModel, alpha: float, *, field="C", n=2, samples=256, seed=0, tol=None
) -> ConditionReport:
    """Empirical inf and sup of d / d_H^alpha, and their stability when doubling.

    The doubled sample also widens the dilation spread (about log2 of the
    sample count), so a ratio that drifts with scale shows up as instability.
    The unit points (e1, 0) and (0, f1) are always included.
    """
    _check_alpha(alpha)
    model.check_space(field, n)
    rng = _rng(seed, model, field, n, "BiLip")

    def ratios(p, q):
        return _arr(model.dist(p, q)) / _arr(koranyi_gauge(h_mul(h_inv(q), p))) ** alpha

    o = origin(field, n)
    anchors = [unit_horizontal(field, n)] + ([unit_vertical(field, n)] if field != "R" else [])
    fixed = np.array([float(model.dist(o, a)) for a in anchors])
    p1, q1 = _pairs(rng, field, n, samples, spread=_spread_for(samples))
    p2, q2 = _pairs(rng, field, n, samples, spread=_spread_for(2 * samples))
    r1 = np.concatenate([fixed, ratios(p1, q1)])
    r2 = np.concatenate([r1, ratios(p2, q2)])
    lo1, hi1, lo2, hi2 = r1.min(), r1.max(), r2.min(), r2.max()
    finite = bool(np.all(np.isfinite(r2)) and lo2 > 0)
    stab = float(max(hi2 / hi1, lo1 / lo2)) if finite else math.inf
    ok = finite and stab < 1.05
    witness = None
    if not ok:
        k = int(np.argmax(np.abs(np.log(np.where(r2 > 0, r2, np.nan) / np.nanmedian(r2)))))
        k -= len(fixed)
        pp, qq = (p1, q1) if k < samples else (p2, q2)
        k = k if k < samples else k - samples
        witness = {"p": _at(pp, k), "q": _at(qq, k), "ratio_range": [float(lo2), float(hi2)],
                   "stability": stab}
    return ConditionReport(
        "BiLip", "pass" if ok else "fail", model.descriptor(), field, n, samples, seed,
        constants={"alpha": alpha, "beta2": float(lo2), "beta1": float(hi2), "stability": stab},
        witness=witness,
    )


def fit_alpha_met(
    model: MetricModel, *, field="C", n=2, samples=256, seed=0, tol=1e-8
) -> ConditionReport:
    """Fit alpha from dilation factors, beta = d(o,(e1,0)), then test d = beta d_H^alpha."""
    model.check_space(field, n)
    rng = _rng(seed, model, field, n, "AlphaMet")
    try:
        fit = estimate_alpha_beta(model, field=field, n=n, samples=64, seed=int(rng.integers(2**63)))
    except NotDilationCompatible as exc:
        return ConditionReport(
            "AlphaMet", "fail", model.descriptor(), field, n, samples, seed,
            witness={"delta": exc.delta, "spread": exc.spread},
            notes=[str(exc)],
        )
    p, q = _pairs(rng, field, n, samples)
    pred = fit.beta * _arr(koranyi_gauge(h_mul(h_inv(q), p))) ** fit.alpha
    res = np.abs(_arr(model.dist(p, q)) - pred) / pred
    k = int(np.argmax(res))
    in_range = 0 < fit.alpha <= 1 + 1e-9
    ok = bool(res[k] < tol and in_range)
    notes = [] if in_range else [f"fitted exponent {fit.alpha:.6g} lies outside (0, 1]"]
    return ConditionReport(
        "AlphaMet", "pass" if ok else "fail", model.descriptor(), field, n, samples, seed,
        constants={"alpha": fit.alpha, "beta": fit.beta, "fit_residual": fit.residual,
                   "residual": float(res[k])},
        witness=None if ok else {"p": _at(p, k), "q": _at(q, k), "residual": float(res[k]),
                                 "alpha": fit.alpha},
        notes=notes,
    )


# ---------------------------------------------------------------------------
# (Ptol), (Circ)
# ---------------------------------------------------------------------------


def _line_points(field, n, t):
    t = np.asarray(t, dtype=float)
    z = np.zeros(t.shape + (n - 1, alg.DIMS[field]))
    z[..., 0, 0] = t
    return HPoint(field, z, np.zeros(t.shape + (alg.DIMS[field],)))


def _circle_quadruples(rng, field, n, count):
    """Images of four points of the horizontal line under random Moebius words."""
    quads = [[], [], [], []]
    for _ in range(count):
        t = np.sort(rng.uniform(-10, 10, size=4))
        w = random_word(rng, field, n, max_length=4)
        img = apply_map(w, _line_points(field, n, t))
        for i in range(4):
            quads[i].append(img[i])
    return [stack(c) for c in quads]


def ptolemy_slack(model, p, q, r, s):
    """Minimum over the three pairings of (sum of the other two - this) / largest."""
    a = _arr(model.dist(p, q)) * _arr(model.dist(r, s))
    b = _arr(model.dist(p, r)) * _arr(model.dist(q, s))
    c = _arr(model.dist(p, s)) * _arr(model.dist(q, r))
    big = np.maximum(np.maximum(a, b), c)
    return np.minimum(np.minimum(b + c - a, a + c - b), a + b - c) / big


def check_ptolemaean(
    model: MetricModel, *, field="C", n=2, samples=256, seed=0, tol=1e-10
) -> ConditionReport:
    """Ptolemy's inequality on generic quadruples and on quadruples from R-circles."""
    model.check_space(field, n)
    rng = _rng(seed, model, field, n, "Ptol")
    half = max(1, samples // 2)
    gen = [random_points(rng, field, n, samples - half, spread=2) for _ in range(4)]
    circ = _circle_quadruples(rng, field, n, half)
    slack_g = ptolemy_slack(model, *gen) if samples - half else np.array([])
    slack_c = ptolemy_slack(model, *circ)
    slack = np.concatenate([slack_g, slack_c])
    k = int(np.argmin(slack))
    ok = bool(slack[k] >= -tol)
    witness = None
    if not ok:
        src, j = (gen, k) if k < len(slack_g) else (circ, k - len(slack_g))
        witness = {"quadruple": [_at(x, j) for x in src], "slack": float(slack[k]),
                   "source": "generic" if src is gen else "r_circle"}
    return ConditionReport(
        "Ptol", "pass" if ok else "fail", model.descriptor(), field, n, samples, seed,
        constants={"min_slack": float(slack[k])},
        witness=witness,
    )


def _separated_parameters(rng, count):
    """Sorted parameters with gaps of at least 1e-3, starting with (0, 1, 2, 3)."""
    out = [np.array([0.0, 1.0, 2.0, 3.0])]
    while len(out) < count:
        t = np.sort(rng.uniform(-10, 10, size=4))
        if np.min(np.diff(t)) >= 1e-3:
            out.append(t)
    return np.stack(out)


def _drop_inf(model, a, b):
    if a is INF or b is INF:
        return 1.0
    return _arr(model.dist(a, b))


def ptolemy_equality_residual(model, p, q, r, s):
    """|d(p,r)d(q,s) - d(p,q)d(r,s) - d(p,s)d(q,r)| / d(p,r)d(q,s), INF factors dropped."""
    big = _drop_inf(model, p, r) * _drop_inf(model, q, s)
    rest = _drop_inf(model, p, q) * _drop_inf(model, r, s) + _drop_inf(model, p, s) * _drop_inf(model, q, r)
    return np.abs(big - rest) / big


def triangle_argument_residual(model, p, q, r, s, field, n):
    """Send q -> o and r -> INF, then compare the three distances among o, p', s'.

    Returns (d1 + d2 - d3) / d3 with d3 the largest; zero exactly when the
    normalized points are additive along the line through o.
    """
    w = normalizing_word(q, r, field, n)
    o = origin(field, n)
    p1, s1 = apply_map(w, p), apply_map(w, s)
    ds = sorted([float(model.dist(o, p1)), float(model.dist(o, s1)), float(model.dist(p1, s1))])
    return (ds[0] + ds[1] - ds[2]) / ds[2]


def check_ptolemaean_circle(
    model: MetricModel, *, field="C", n=2, samples=256, seed=0, tol=1e-9
) -> ConditionReport:
    """Ptolemy equality for separated quadruples on the horizontal line plus INF.

    A quarter of the samples use INF as the third point (parameters s < p < q).
    """
    model.check_space(field, n)
    rng = _rng(seed, model, field, n, "Circ")
    n_fin = max(1, samples - samples // 4)
    t = _separated_parameters(rng, n_fin)
    pts = [_line_points(field, n, t[:, i]) for i in range(4)]
    res_fin = ptolemy_equality_residual(model, *pts)
    n_inf = samples - n_fin
    res_inf = np.array([])
    if n_inf:
        u = np.sort(rng.uniform(-10, 10, size=(n_inf, 3)), axis=1)
        s, p, q = (_line_points(field, n, u[:, i]) for i in range(3))
        res_inf = np.atleast_1d(ptolemy_equality_residual(model, p, q, INF, s))
    res = np.concatenate([np.atleast_1d(res_fin), res_inf])
    k = int(np.argmax(res))
    ok = bool(res[k] < tol)
    kq = min(k, n_fin - 1)
    quad = [_at(x, kq) for x in pts]
    tri = triangle_argument_residual(model, *quad, field, n)
    constants = {"max_residual": float(res[k]), "collinear_residual": float(res_fin[0]),
                 "triangle_argument_residual": tri}
    witness = None
    if not ok:
        if k < n_fin:
            witness = {"quadruple": quad, "parameters": t[k].tolist(), "residual": float(res[k])}
        else:
            j = k - n_fin
            witness = {"quadruple": [_line_points(field, n, u[j, 1]), _line_points(field, n, u[j, 2]),
                                     INF, _line_points(field, n, u[j, 0])],
                       "residual": float(res[k])}
    return ConditionReport(
        "Circ", "pass" if ok else "fail", model.descriptor(), field, n, samples, seed,
        constants=constants, witness=witness,
    )


# ---------------------------------------------------------------------------
# the inversion computation for Koranyi powers, link by link
# ---------------------------------------------------------------------------


@dataclass
class ChainReport:
    model: str
    field: str
    n: int
    samples: int
    seed: int
    links: dict
    conclusion_residual: float
    decomposition_residual: float
    tol: float = 1e-9
    witness: dict | None = None

    @property
    def max_residual(self) -> float:
        return max(max(self.links.values()), self.conclusion_residual)

    @property
    def passed(self) -> bool:
        return self.max_residual < self.tol

    def to_dict(self):
        from .jsonio import to_jsonable

        return to_jsonable({
            "model": self.model, "field": self.field, "n": self.n, "samples": self.samples,
            "seed": self.seed, "links": self.links, "conclusion_residual": self.conclusion_residual,
            "decomposition_residual": self.decomposition_residual, "tol": self.tol,
            "max_residual": self.max_residual, "passed": self.passed, "witness": self.witness,
        })


def _with(field, zeta, v):
    return HPoint(field, zeta, v)


def chain_links(model: KoranyiPower, p: HPoint) -> dict:
    """Each expression of the inversion distance computation, evaluated on its own."""
    field, n = p.field, p.n
    o = origin(field, n, p.batch_shape)
    alpha = model.alpha
    a = gauge_argument(p)
    abs_a = alg.norm(a)
    a_bar = alg.conj(a)
    shrink = abs_a**-alpha
    out = {}
    out["d(I(p),o)"] = _arr(model.dist(Invert()(p), o))
    out["explicit"] = _arr(model.dist(
        _with(field, alg.mul(p.zeta, (a_bar / (abs_a**2)[..., None])[..., None, :]),
              alg.conj(p.v) / (abs_a**2)[..., None]), o))
    out["dilated"] = _arr(model.dist(
        dilate(_with(field, alg.mul(p.zeta, (a_bar / abs_a[..., None])[..., None, :]),
                     alg.conj(p.v)), 1.0 / abs_a), o))
    out["rotated"] = shrink * _arr(model.dist(
        _with(field, alg.mul((a / abs_a[..., None])[..., None, :], alg.conj(p.zeta)), p.v), o))
    out["reflected"] = shrink * _arr(model.dist(_with(field, -alg.conj(p.zeta), p.v), o))
    out["negated"] = shrink * _arr(model.dist(_with(field, -p.zeta, -p.v), o))
    out["inverse"] = shrink * _arr(model.dist(h_inv(p), o))
    out["translated"] = shrink * _arr(model.dist(h_mul(p, h_inv(p)), p))
    out["d(o,p)"] = shrink * _arr(model.dist(o, p))
    one = unit_horizontal(field, n)
    d1 = float(model.dist(origin(field, n), one))
    out["normalized"] = d1**2 / _arr(model.dist(o, p))
    return out


def verify_theorem12_chain(
    model: KoranyiPower, *, field="C", n=2, samples=256, seed=0, tol=1e-9
) -> ChainReport:
    """Relative residual of every link against d(I(p), o), plus the conclusion.

    The conclusion is d^2(o,p) = d^2(o,(e1,0)) |A(p)|^alpha
    = d^2(o,(e1,0)) d_H^(2 alpha)(o,p).  The decomposition residual is the
    coordinate gap between I(p) and its expression through p^-1.
    """
    if not isinstance(model, KoranyiPower):
        raise TypeError("the chain is stated for Koranyi powers only")
    model.check_space(field, n)
    rng = _rng(seed, model, field, n, "chain")
    p = random_points(rng, field, n, samples, spread=2)
    links = chain_links(model, p)
    ref = links["d(I(p),o)"]
    per_link = {k: np.abs(v - ref) / ref for k, v in links.items() if k != "d(I(p),o)"}
    o = origin(field, n, (samples,))
    d1 = float(model.dist(origin(field, n), unit_horizontal(field, n)))
    dop2 = _arr(model.dist(o, p)) ** 2
    via_a = d1**2 * alg.norm(gauge_argument(p)) ** model.alpha
    via_h = d1**2 * _arr(koranyi_gauge(p)) ** (2 * model.alpha)
    concl = np.maximum(np.abs(dop2 - via_a), np.abs(dop2 - via_h)) / dop2
    decomp = np.array([verify_inversion_decomposition(p[i]) for i in range(samples)])
    scale = np.maximum(1.0, np.max(np.abs(np.concatenate(
        [Invert()(p).zeta.reshape(samples, -1), Invert()(p).v], axis=1)), axis=1))
    decomp = decomp / scale
    worst_link = max(per_link, key=lambda k: per_link[k].max())
    k = int(np.argmax(per_link[worst_link]))
    return ChainReport(
        model.descriptor(), field, n, samples, seed,
        {name: float(r.max()) for name, r in per_link.items()},
        float(concl.max()), float(decomp.max()), tol,
        {"link": worst_link, "p": _at(p, k), "residual": float(per_link[worst_link][k])},
    )


# ---------------------------------------------------------------------------
# counterexample search
# ---------------------------------------------------------------------------


def find_triangle_violation(
    model: MetricModel, *, field="C", n=2, max_samples=10**6, batch=50_000, seed=0, tol=1e-10
):
    """Random search for d(p,r) > d(p,q) + d(q,r); returns a witness dict or None.

    Middle points are drawn near the segment between the outer points, where
    violations of a power above 1 concentrate.
    """
    model.check_space(field, n)
    rng = _rng(seed, model, field, n, "triangle")
    tried = 0
    while tried < max_samples:
        m = min(batch, max_samples - tried)
        p = random_points(rng, field, n, m)
        r = random_points(rng, field, n, m)
        t = rng.uniform(0, 1, size=m)
        mid = dilate(h_mul(h_inv(p), r), t)
        q = h_mul(p, HPoint(field, mid.zeta, np.zeros_like(mid.v)))
        q = h_mul(q, dilate(random_points(rng, field, n, m), 0.1))
        dpr, dpq, dqr = _arr(model.dist(p, r)), _arr(model.dist(p, q)), _arr(model.dist(q, r))
        slack = (dpq + dqr - dpr) / dpr
        k = int(np.argmin(slack))
        if slack[k] < -tol:
            return {"p": _at(p, k), "q": _at(q, k), "r": _at(r, k),
                    "slack": float(slack[k]), "tried": tried + k + 1}
        tried += m
    return None


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------

AUDIT_RULES = (
    ("real_sim_top_gives_alpha_met", ("Sim", "TopHeuristic"), "AlphaMet", ("R",)),
    ("sim_top_gives_alpha_hoelder", ("Sim", "TopHeuristic"), "AlphaHoelder", None),
    ("sim_top_inv_gives_alpha_met", ("Sim", "TopHeuristic", "Inv"), "AlphaMet", None),
    ("sim_top_g_gives_bilip", ("Sim", "TopHeuristic", "G"), "BiLip", None),
    ("sim_top_g_eq_gives_alpha_met", ("Sim", "TopHeuristic", "G", "Eq"), "AlphaMet", None),
    ("alpha_met_gives_ptol", ("AlphaMet",), "Ptol", None),
)


@dataclass
class ClassificationMatrix:
    rows: list
    columns: tuple
    cells: dict
    fits: dict
    violations: list
    unresolved: list
    seed: int
    samples: int
    not_metric: dict = dc_field(default_factory=dict)

    def verdict(self, row, column) -> str:
        return self.cells[(row, column)].verdict

    def to_dict(self) -> dict:
        from .jsonio import to_jsonable

        return {
            "rows": list(self.rows),
            "columns": list(self.columns),
            "cells": [self.cells[(r, c)].to_dict() for r in self.rows for c in self.columns],
            "fits": to_jsonable(self.fits),
            "violations": to_jsonable(self.violations),
            "unresolved": to_jsonable(self.unresolved),
            "not_metric": to_jsonable(self.not_metric),
            "seed": self.seed,
            "samples": self.samples,
        }

    def to_text(self) -> str:
        head = ["model"] + list(self.columns)
        body = [[r] + [self.cells[(r, c)].verdict for c in self.columns] for r in self.rows]
        widths = [max(len(line[i]) for line in [head] + body) for i in range(len(head))]
        fmt = "  ".join(f"{{:<{w}}}" for w in widths)
        lines = [fmt.format(*head), fmt.format(*("-" * w for w in widths))]
        lines += [fmt.format(*line) for line in body]
        for r in self.rows:
            if r in self.not_metric:
                lines.append(f"not a metric (audit skipped): {r}")
        lines.append(f"audit violations: {len(self.violations)}")
        for v in self.violations:
            lines.append(f"  {v['row']}: {v['rule']}")
        return "\n".join(lines)


def _row_label(model, field, n):
    return f"{model.descriptor()} [{field}, n={n}]"


def _invariance_declaration(model, field, n, samples, seed):
    """Sampled left-invariance check for models given by a two-point distance."""
    rng = stream(seed, model.descriptor(), field, n, "left_invariance")
    p, q = _pairs(rng, field, n, samples)
    a = random_points(rng, field, n, samples)
    base = _arr(model.dist(p, q))
    moved = _arr(model.dist(h_mul(a, p), h_mul(a, q)))
    return float(np.max(np.abs(moved - base) / base))


def _run_cell(model, cond, field, n, samples, seed, alpha):
    kw = dict(field=field, n=n, seed=seed)
    try:
        if cond == "Sim":
            return check_sim_invariance(model, samples=samples, **kw)
        if cond == "TopHeuristic":
            return check_top_heuristic(model, samples=max(8, samples // 8), **kw)
        if cond == "Inv":
            return check_inv(model, samples=samples, **kw)
        if cond == "Eq":
            return check_eq(model, **kw)
        if cond == "AlphaMet":
            return fit_alpha_met(model, samples=samples, **kw)
        if cond == "Ptol":
            return check_ptolemaean(model, samples=samples, **kw)
        if cond == "Circ":
            return check_ptolemaean_circle(model, samples=samples, **kw)
        if alpha is None:
            raise ValueError("no dilation exponent could be fitted for this model")
        fn = {"AlphaHoelder": check_alpha_holder, "G": check_G, "PL": check_PL,
              "BiLip": check_biLip}[cond]
        return fn(model, alpha, samples=samples, **kw)
    except Exception as exc:  # any checker error becomes an inconclusive cell
        return ConditionReport(
            cond, "inconclusive", model.descriptor(), field, n, samples, seed,
            notes=[f"{type(exc).__name__}: {exc}"],
        )


def _audit(row, field, cells, fit_alpha):
    violations, unresolved = [], []

    def v(c):
        return cells[c].verdict

    for name, hyps, concl, fields in AUDIT_RULES:
        if fields is not None and field not in fields:
            continue
        if all(v(h) == "pass" for h in hyps):
            if v(concl) == "fail":
                violations.append({"row": row, "rule": name, "conclusion": concl})
            elif v(concl) == "inconclusive":
                unresolved.append({"row": row, "rule": name, "conclusion": concl})
    if v("Sim") == "pass" and {v("G"), v("PL")} == {"pass", "fail"}:
        violations.append({"row": row, "rule": "g_iff_pl", "conclusion": "G,PL"})
    if v("AlphaMet") == "pass" and v("Circ") == "pass":
        a = cells["AlphaMet"].constants.get("alpha")
        if a is None or abs(a - 1.0) > 1e-8:
            violations.append({"row": row, "rule": "alpha_met_circ_gives_alpha_one",
                               "conclusion": f"alpha={a}"})
    return violations, unresolved


def run_classification(
    models, *, fields=("C",), n=2, samples=256, seed=0, workers=1
) -> ClassificationMatrix:
    """Run every checker on every supported (model, field) pair and audit the implications.

    The exponent fitted by ``estimate_alpha_beta`` feeds the checkers that
    take alpha.  Models given by a two-point distance and declared
    left-invariant are tested for it first; a false declaration is recorded
    as a violation.  The implications presuppose a metric, so rows where a
    random search finds a triangle-inequality violation are kept in the
    matrix but left out of the audit.
    """
    models = list(models)
    if not models:
        raise ValueError("no models to classify")
    jobs = []
    rows, fits, violations, unresolved, not_metric = [], {}, [], [], {}
    for model in models:
        for field in fields:
            nn = 2 if field == "O" else n
            if not model.supports(field, nn):
                continue
            row = _row_label(model, field, nn)
            rows.append(row)
            alpha = None
            try:
                fit = estimate_alpha_beta(model, field=field, n=nn, samples=64, seed=seed)
                fits[row] = {"alpha": fit.alpha, "beta": fit.beta, "residual": fit.residual}
                if 0 < fit.alpha <= 1 + 1e-9:
                    alpha = min(fit.alpha, 1.0)
            except NotDilationCompatible as exc:
                fits[row] = {"error": str(exc)}
            if getattr(model, "_distance", None) is not None and model.left_invariant:
                drift = _invariance_declaration(model, field, nn, samples, seed)
                if drift > model.tol:
                    violations.append({"row": row, "rule": "declared_left_invariant",
                                       "conclusion": f"translation drift {drift:.3g}"})
            tri = find_triangle_violation(model, field=field, n=nn, max_samples=20 * samples,
                                          batch=4 * samples, seed=seed)
            if tri is not None:
                not_metric[row] = tri
            for cond in CONDITIONS:
                jobs.append((row, model, cond, field, nn, alpha))

    def work(job):
        row, model, cond, field, nn, alpha = job
        return (row, cond), _run_cell(model, cond, field, nn, samples, seed, alpha)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = dict(pool.map(work, jobs))
    else:
        results = dict(map(work, jobs))
    for row in rows:
        if row in not_metric:
            continue
        field = row.split("[")[-1].split(",")[0]
        row_cells = {c: results[(row, c)] for c in CONDITIONS}
        v, u = _audit(row, field, row_cells, fits[row].get("alpha"))
        violations += v
        unresolved += u
    return ClassificationMatrix(
        rows, CONDITIONS, results, fits, violations, unresolved, seed, samples, not_metric
    )


DEFAULT_ZOO = (
    KoranyiPower(1.0, 1.0),
    KoranyiPower(0.5, 1.0),
    KoranyiPower(1.0, 2.0),
    CCH1(),
)
