"""Seeded point samplers shared by the checkers and verification suites."""

from __future__ import annotations

import zlib

import numpy as np

from .algebra import DIMS
from .heisenberg import HPoint, dilate


def stream(seed: int, *labels) -> np.random.Generator:
    """Independent generator for ``(seed, *labels)``, stable across runs and workers."""
    key = [int(seed) & 0xFFFFFFFFFFFFFFFF]
    for label in labels:
        key.append(label if isinstance(label, int) else zlib.crc32(str(label).encode()))
    return np.random.default_rng(np.random.SeedSequence(key))


def random_points(
    rng: np.random.Generator,
    field: str,
    n: int,
    size: int | None,
    radii=(1.0, 10.0),
    spread: int = 0,
) -> HPoint:
    """Points with coordinates uniform in [-R, R], R drawn from ``radii``.

    With ``spread > 0`` every point is additionally dilated by 2^k for an
    integer k uniform in [-spread, spread].  ``size=None`` gives one
    unbatched point.
    """
    d = DIMS[field]
    shape = () if size is None else (size,)
    r = np.asarray(radii, dtype=float)[rng.integers(len(radii), size=shape)]
    z = rng.uniform(-1.0, 1.0, size=shape + (n - 1, d)) * np.asarray(r)[..., None, None]
    v = rng.uniform(-1.0, 1.0, size=shape + (d,)) * np.asarray(r)[..., None]
    v[..., 0] = 0.0
    p = HPoint(field, z, v)
    if spread:
        k = rng.integers(-spread, spread + 1, size=shape)
        p = dilate(p, np.exp2(k.astype(float)))
    return p


def dyadic_points(rng: np.random.Generator, field: str, n: int, size: int) -> HPoint:
    """Points whose coordinates are multiples of 1/8 in [-8, 8].

    Group products of such points with dyadic perturbations are exact in
    floating point, which the convergence heuristic relies on.
    """
    d = DIMS[field]
    z = rng.integers(-64, 65, size=(size, n - 1, d)) / 8.0
    v = rng.integers(-64, 65, size=(size, d)) / 8.0
    v[:, 0] = 0.0
    return HPoint(field, z, v)
