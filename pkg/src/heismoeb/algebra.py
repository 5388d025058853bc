"""Arithmetic in the normed division algebras R, C, H and O.

Elements are stored as real coefficient vectors over the standard basis
``(1, i, j, k, ...)``.  Multiplication is obtained from real multiplication by
repeated Cayley-Dickson doubling,

    (a, b) * (c, d) = (a c - conj(d) b,  d a + b conj(c)),

so no multiplication table is hard-coded.  The array-level helpers (``mul``,
``conj``, ``inner``, ...) operate on the last axis and broadcast over any
leading batch axes; :class:`KNum` and :class:`KVector` are thin typed wrappers
around them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

FIELDS = ("R", "C", "H", "O")
DIMS = {"R": 1, "C": 2, "H": 4, "O": 8}
BASIS_NAMES = {
    "R": ("1",),
    "C": ("1", "i"),
    "H": ("1", "i", "j", "k"),
    "O": ("1", "e1", "e2", "e3", "e4", "e5", "e6", "e7"),
}


class FieldMismatchError(ValueError):
    """Operands belong to different algebras."""


class ShapeMismatchError(ValueError):
    """Vector operands have incompatible lengths."""


def check_field(field: str) -> str:
    if field not in DIMS:
        raise ValueError(f"unknown field tag {field!r}; expected one of {FIELDS}")
    return field


def field_of_dim(dim: int) -> str:
    for f, d in DIMS.items():
        if d == dim:
            return f
    raise ValueError(f"no division algebra of real dimension {dim}")


# ---------------------------------------------------------------------------
# array-level kernels
# ---------------------------------------------------------------------------


def conj(x: np.ndarray) -> np.ndarray:
    out = -np.asarray(x, dtype=float)
    out[..., 0] = -out[..., 0]
    return out


def mul(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    d = x.shape[-1]
    if d != y.shape[-1]:
        raise FieldMismatchError(f"cannot multiply dimension {d} by {y.shape[-1]}")
    if d == 1:
        return x * y
    h = d // 2
    a, b = x[..., :h], x[..., h:]
    c, e = y[..., :h], y[..., h:]
    return np.concatenate(
        [mul(a, c) - mul(conj(e), b), mul(e, a) + mul(b, conj(c))], axis=-1
    )


def sqnorm(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return np.einsum("...i,...i->...", x, x)


def norm(x: np.ndarray) -> np.ndarray:
    return np.sqrt(sqnorm(x))


def inv(x: np.ndarray) -> np.ndarray:
    n2 = sqnorm(x)
    if np.any(n2 == 0):
        raise ZeroDivisionError("inverse of zero in a division algebra")
    return conj(x) / n2[..., None]


def re(x: np.ndarray) -> np.ndarray:
    return np.asarray(x, dtype=float)[..., 0]


def im(x: np.ndarray) -> np.ndarray:
    out = np.array(x, dtype=float, copy=True)
    out[..., 0] = 0.0
    return out


def inner(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Hermitian form sum_i conj(b_i) a_i over the second-to-last axis.

    The form is right-linear in ``a`` and satisfies
    ``inner(U a, U b) == inner(a, b)`` for every U with U* U = 1, which is
    what makes left matrix rotations group automorphisms over H.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape[-2:] != b.shape[-2:]:
        raise ShapeMismatchError(f"vector shapes {a.shape[-2:]} and {b.shape[-2:]} differ")
    return mul(conj(b), a).sum(axis=-2)


def omega(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return im(inner(a, b))


def basis(field: str, i: int) -> np.ndarray:
    e = np.zeros(DIMS[check_field(field)])
    e[i] = 1.0
    return e


def multiplication_table(field: str) -> np.ndarray:
    """Structure constants ``T[i, j] = e_i * e_j`` generated from doubling."""
    d = DIMS[check_field(field)]
    eye = np.eye(d)
    return mul(eye[:, None, :], eye[None, :, :])


def nonassociative_witness(field: str = "O"):
    """First basis triple (i, j, k) with (e_i e_j) e_k != e_i (e_j e_k), or None."""
    d = DIMS[check_field(field)]
    eye = np.eye(d)
    for i in range(d):
        for j in range(d):
            for k in range(d):
                left = mul(mul(eye[i], eye[j]), eye[k])
                right = mul(eye[i], mul(eye[j], eye[k]))
                if not np.allclose(left, right):
                    return i, j, k
    return None


# ---------------------------------------------------------------------------
# typed wrappers
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class KNum:
    """An element of R, C, H or O."""

    field: str
    coeffs: np.ndarray

    def __post_init__(self):
        check_field(self.field)
        c = np.array(self.coeffs, dtype=float).reshape(-1)
        if c.shape != (DIMS[self.field],):
            raise ValueError(
                f"{self.field} needs {DIMS[self.field]} coefficients, got {c.shape[0]}"
            )
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def real(cls, field: str, r: float) -> "KNum":
        c = np.zeros(DIMS[check_field(field)])
        c[0] = r
        return cls(field, c)

    @classmethod
    def unit(cls, field: str, i: int) -> "KNum":
        return cls(field, basis(field, i))

    @property
    def dim(self) -> int:
        return DIMS[self.field]

    @property
    def re(self) -> float:
        return float(self.coeffs[0])

    def norm(self) -> float:
        return float(norm(self.coeffs))

    def conj(self) -> "KNum":
        return k_conj(self)

    def inv(self) -> "KNum":
        return k_inv(self)

    def is_imaginary(self) -> bool:
        return self.coeffs[0] == 0.0

    def allclose(self, other: "KNum", atol: float = 1e-12) -> bool:
        _same_field(self, other)
        return bool(np.allclose(self.coeffs, other.coeffs, rtol=0.0, atol=atol))

    def _coerce(self, other) -> "KNum":
        if isinstance(other, KNum):
            _same_field(self, other)
            return other
        if isinstance(other, (int, float, np.floating, np.integer)):
            return KNum.real(self.field, float(other))
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return KNum(self.field, self.coeffs + other.coeffs)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return KNum(self.field, self.coeffs - other.coeffs)

    def __rsub__(self, other):
        return -(self - other)

    def __neg__(self):
        return KNum(self.field, -self.coeffs)

    def __mul__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            return KNum(self.field, self.coeffs * float(other))
        if isinstance(other, KNum):
            return k_mul(self, other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            return KNum(self.field, self.coeffs * float(other))
        return NotImplemented

    def __truediv__(self, r):
        if isinstance(r, (int, float, np.floating, np.integer)):
            return KNum(self.field, self.coeffs / float(r))
        return NotImplemented

    def __str__(self):
        return f"{self.field}:[{','.join(repr(float(c)) for c in self.coeffs)}]"

    def __repr__(self):
        return f"KNum({self})"


@dataclass(frozen=True, eq=False)
class KVector:
    """A vector in K^(n-1), stored as an (n-1, dim) coefficient array."""

    field: str
    entries: np.ndarray

    def __post_init__(self):
        check_field(self.field)
        e = np.array(self.entries, dtype=float)
        if e.ndim == 1:
            e = e.reshape(-1, DIMS[self.field])
        if e.ndim != 2 or e.shape[1] != DIMS[self.field] or e.shape[0] < 1:
            raise ShapeMismatchError(f"bad KVector entries of shape {e.shape}")
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)

    @classmethod
    def of(cls, *nums: KNum) -> "KVector":
        if not nums:
            raise ShapeMismatchError("a KVector needs at least one entry")
        f = nums[0].field
        for x in nums:
            if x.field != f:
                raise FieldMismatchError("all entries of a KVector must share a field")
        return cls(f, np.stack([x.coeffs for x in nums]))

    def __len__(self):
        return self.entries.shape[0]

    def __getitem__(self, i) -> KNum:
        return KNum(self.field, self.entries[i])

    def norm(self) -> float:
        return float(np.sqrt(sqnorm(self.entries).sum()))


def _same_field(x, y):
    if x.field != y.field:
        raise FieldMismatchError(f"field mismatch: {x.field} vs {y.field}")


def k_mul(x: KNum, y: KNum) -> KNum:
    _same_field(x, y)
    return KNum(x.field, mul(x.coeffs, y.coeffs))


def k_conj(x: KNum) -> KNum:
    return KNum(x.field, conj(x.coeffs))


def k_inv(x: KNum) -> KNum:
    return KNum(x.field, inv(x.coeffs))


def k_decompose(x: KNum) -> tuple[float, KNum]:
    """Split ``x`` into its real part and its imaginary part ``(x - conj x)/2``."""
    return float(x.coeffs[0]), KNum(x.field, im(x.coeffs))


def _check_vectors(a: KVector, b: KVector):
    _same_field(a, b)
    if len(a) != len(b):
        raise ShapeMismatchError(f"vector lengths {len(a)} and {len(b)} differ")


def vec_inner(a: KVector, b: KVector) -> KNum:
    _check_vectors(a, b)
    return KNum(a.field, inner(a.entries, b.entries))


def symplectic_omega(a: KVector, b: KVector) -> KNum:
    _check_vectors(a, b)
    return KNum(a.field, omega(a.entries, b.entries))
