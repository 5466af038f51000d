"""Exact materialization of labels as Gaussian-integer matrices.

Every label maps to a Kronecker product of the four 2x2 generators
{I, iX, iZ, ZX} scaled by i^lam.  All entries stay in {0, +-1, +-i}, so
Hermiticity and Hurwitz-Radon orthogonality are plain equality tests --
no tolerances anywhere in this module.

Kronecker factors are combined left to right; coordinate 1 of a label is
the leftmost factor.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List

import numpy as np

from .f4 import OMEGA, OMEGA2, CodeVector


class NotInBasisError(ValueError):
    """Matrix is not in the signed-permutation tensor basis.

    Raised when factorization meets a block pattern outside the four
    generators, or when the leading scalar lands in {-1, -i} (the mirror
    half of the Pauli group rather than the chosen transversal).
    """


class GaussMatrix:
    """A matrix over the Gaussian integers, held as exact int64 parts."""

    __slots__ = ("re", "im")

    def __init__(self, re, im):
        self.re = np.asarray(re, dtype=np.int64)
        self.im = np.asarray(im, dtype=np.int64)
        if self.re.shape != self.im.shape or self.re.ndim != 2:
            raise ValueError("re/im must be equal-shape 2-d arrays")

    @classmethod
    def identity(cls, n: int) -> "GaussMatrix":
        return cls(np.eye(n, dtype=np.int64), np.zeros((n, n), dtype=np.int64))

    @classmethod
    def zeros(cls, n: int) -> "GaussMatrix":
        z = np.zeros((n, n), dtype=np.int64)
        return cls(z, z.copy())

    @property
    def dim(self) -> int:
        return self.re.shape[0]

    @property
    def shape(self):
        return self.re.shape

    def __eq__(self, other) -> bool:
        if not isinstance(other, GaussMatrix):
            return NotImplemented
        return bool(np.array_equal(self.re, other.re) and np.array_equal(self.im, other.im))

    def __hash__(self):
        return hash(self.key())

    def key(self) -> bytes:
        return self.re.tobytes() + self.im.tobytes()

    def __add__(self, other: "GaussMatrix") -> "GaussMatrix":
        return GaussMatrix(self.re + other.re, self.im + other.im)

    def __neg__(self) -> "GaussMatrix":
        return GaussMatrix(-self.re, -self.im)

    def __matmul__(self, other: "GaussMatrix") -> "GaussMatrix":
        # (a+bi)(c+di) = (ac - bd) + (ad + bc)i, all in exact integers
        return GaussMatrix(
            self.re @ other.re - self.im @ other.im,
            self.re @ other.im + self.im @ other.re,
        )

    def kron(self, other: "GaussMatrix") -> "GaussMatrix":
        return GaussMatrix(
            np.kron(self.re, other.re) - np.kron(self.im, other.im),
            np.kron(self.re, other.im) + np.kron(self.im, other.re),
        )

    def ctranspose(self) -> "GaussMatrix":
        return GaussMatrix(self.re.T.copy(), -self.im.T)

    def times_i(self) -> "GaussMatrix":
        return GaussMatrix(-self.im, self.re)

    def is_zero(self) -> bool:
        return not (self.re.any() or self.im.any())

    def to_complex(self) -> np.ndarray:
        return self.re.astype(np.complex128) + 1j * self.im

    def debug_strings(self) -> List[str]:
        """Row-major "a+bi" entry strings, for fixtures and error text."""
        out = []
        for a, b in zip(self.re.ravel(), self.im.ravel()):
            out.append(f"{int(a)}{int(b):+d}i")
        return out

    def __repr__(self):
        return f"GaussMatrix(dim={self.dim})"


def _g(re, im) -> GaussMatrix:
    return GaussMatrix(np.array(re), np.array(im))


_Z2 = [[0, 0], [0, 0]]
I2 = _g([[1, 0], [0, 1]], _Z2)
iX = _g(_Z2, [[0, 1], [1, 0]])
iZ = _g(_Z2, [[1, 0], [0, -1]])
ZX = _g([[0, 1], [-1, 0]], _Z2)
X = _g([[0, 1], [1, 0]], _Z2)
Z = _g([[1, 0], [0, -1]], _Z2)
iXZ = _g(_Z2, [[0, -1], [1, 0]])

_FACTOR_OF = {0: I2, 1: iX, OMEGA: iZ, OMEGA2: ZX}


def matrix_from_label(v: CodeVector) -> GaussMatrix:
    """i^lam times the Kronecker product of the per-coordinate generators."""
    out = GaussMatrix.identity(1)
    if v.lam:
        out = out.times_i()
    for x in v.xi:
        out = out.kron(_FACTOR_OF[x])
    return out


def _split_blocks(t: GaussMatrix):
    h = t.dim // 2
    return (
        GaussMatrix(t.re[:h, :h], t.im[:h, :h]),
        GaussMatrix(t.re[:h, h:], t.im[:h, h:]),
        GaussMatrix(t.re[h:, :h], t.im[h:, :h]),
        GaussMatrix(t.re[h:, h:], t.im[h:, h:]),
    )


def label_from_matrix(t: GaussMatrix) -> CodeVector:
    """Invert the label map by peeling Kronecker factors off block structure.

    O(dim^2) per level, and pinpoints the offending factor on failure
    instead of reporting a blind search miss.
    """
    n = t.dim
    m = 0
    while (1 << m) < n:
        m += 1
    if (1 << m) != n:
        raise NotInBasisError(f"dimension {n} is not a power of two")

    xi = []
    rest = t
    for k in range(1, m + 1):
        t00, t01, t10, t11 = _split_blocks(rest)
        diag_zero = t00.is_zero() and t11.is_zero()
        off_zero = t01.is_zero() and t10.is_zero()
        if off_zero and not diag_zero:
            if t11 == t00:
                xi.append(0)
                rest = t00
            elif t11 == -t00:
                xi.append(OMEGA)
                rest = GaussMatrix(t00.im, -t00.re)  # -i * t00
            else:
                raise NotInBasisError(f"factor {k}: diagonal blocks differ by more than a sign")
        elif diag_zero and not off_zero:
            if t10 == t01:
                xi.append(1)
                rest = GaussMatrix(t01.im, -t01.re)  # -i * t01
            elif t10 == -t01:
                xi.append(OMEGA2)
                rest = t01
            else:
                raise NotInBasisError(f"factor {k}: off-diagonal blocks differ by more than a sign")
        else:
            raise NotInBasisError(f"factor {k}: block pattern is neither diagonal nor anti-diagonal")

    re, im = int(rest.re[0, 0]), int(rest.im[0, 0])
    if (re, im) == (1, 0):
        lam = 0
    elif (re, im) == (0, 1):
        lam = 1
    else:
        raise NotInBasisError(
            f"leading scalar {re}{im:+d}i is outside the chosen sign transversal"
        )
    return CodeVector(lam, tuple(xi))


def is_hermitian(t: GaussMatrix) -> bool:
    return t.ctranspose() == t


def hr_orthogonal_matrix(a: GaussMatrix, b: GaussMatrix) -> bool:
    """Exact evaluation of the Hurwitz-Radon condition A^H B + B^H A = 0."""
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    return (a.ctranspose() @ b + b.ctranspose() @ a).is_zero()


def clifford_generators(m: int) -> List[GaussMatrix]:
    """The 2m anti-commuting, skew-Hermitian, unitary generators.

    Generator s (1-based) has s-1 leading Z factors, then iXZ (first m) or
    X (last m), then identity padding; everything is scaled by i.
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    gens = []
    for middle in (iXZ, X):
        for s in range(1, m + 1):
            g = GaussMatrix.identity(1)
            for _ in range(s - 1):
                g = g.kron(Z)
            g = g.kron(middle)
            for _ in range(m - s):
                g = g.kron(I2)
            gens.append(g.times_i())
    return gens


@dataclass
class BasisReport:
    m: int
    size: int
    size_ok: bool
    rank: int
    rank_ok: bool
    union_size: int
    union_ok: bool

    @property
    def passed(self) -> bool:
        return self.size_ok and self.rank_ok and self.union_ok


def _rank_mod_p(rows: np.ndarray, p: int) -> int:
    a = (rows.astype(np.int64) % p).copy()
    nrows, ncols = a.shape
    rank = 0
    for col in range(ncols):
        pivot = None
        for r in range(rank, nrows):
            if a[r, col] % p:
                pivot = r
                break
        if pivot is None:
            continue
        a[[rank, pivot]] = a[[pivot, rank]]
        inv = pow(int(a[rank, col]), p - 2, p)
        a[rank] = (a[rank] * inv) % p
        for r in range(nrows):
            if r != rank and a[r, col]:
                a[r] = (a[r] - a[r, col] * a[rank]) % p
        rank += 1
        if rank == nrows:
            break
    return rank


def _rank_fraction(rows: np.ndarray) -> int:
    a = [[Fraction(int(x)) for x in row] for row in rows]
    nrows = len(a)
    ncols = len(a[0]) if nrows else 0
    rank = 0
    for col in range(ncols):
        pivot = next((r for r in range(rank, nrows) if a[r][col]), None)
        if pivot is None:
            continue
        a[rank], a[pivot] = a[pivot], a[rank]
        inv = 1 / a[rank][col]
        a[rank] = [x * inv for x in a[rank]]
        for r in range(nrows):
            if r != rank and a[r][col]:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[rank])]
        rank += 1
        if rank == nrows:
            break
    return rank


def exact_integer_rank(rows: np.ndarray) -> int:
    """Exact rank of an integer matrix.

    Full rank modulo a prime certifies full rank over the rationals (a
    nonzero minor mod p is a nonzero integer minor); anything short of
    full rank falls back to exact fraction elimination.
    """
    r = _rank_mod_p(rows, 2_147_483_647)
    if r == min(rows.shape):
        return r
    return _rank_fraction(rows)


def verify_basis(m: int) -> BasisReport:
    """Check cardinality, real-linear independence, and the signed-union count.

    Cost is the rank of a 2^(2m+1)-square integer matrix, so m is capped
    at 3.
    """
    if not 1 <= m <= 3:
        raise ValueError(f"m must be in 1..3, got {m}")
    from .f4 import enumerate_labels

    labels = enumerate_labels(m)
    mats = [matrix_from_label(v) for v in labels]
    expected = 2 ** (2 * m + 1)

    keys = {t.key() for t in mats}
    size_ok = len(keys) == expected == len(mats)

    rows = np.stack([np.concatenate([t.re.ravel(), t.im.ravel()]) for t in mats])
    rank = exact_integer_rank(rows)
    rank_ok = rank == expected

    union = keys | {(-t).key() for t in mats}
    union_ok = len(union) == 2 ** (2 * m + 2)

    return BasisReport(
        m=m,
        size=len(keys),
        size_ok=size_ok,
        rank=rank,
        rank_ok=rank_ok,
        union_size=len(union),
        union_ok=union_ok,
    )
