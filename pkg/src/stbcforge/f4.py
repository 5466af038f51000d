"""Arithmetic on the label space indexing signed Pauli tensor matrices.

A label packs one GF(2) phase bit together with a length-m word over
GF(4) = {0, 1, w, W} where W = w^2 = w + 1.  GF(4) symbols are stored as
the integers 0..3 so that addition is bitwise XOR and every label is its
own additive inverse.  There are 2^(2m+1) labels for a given m.

Text form used throughout the JSON/CLI surface: ``lam|x1x2...xm`` with
digits from {0, 1, w, W}, e.g. ``1|wW0``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Tuple

OMEGA = 2
OMEGA2 = 3

#: safety rail for exhaustive enumeration; keeps matrices at most 64x64
MAX_M = 6

_TEXT_OF = {0: "0", 1: "1", OMEGA: "w", OMEGA2: "W"}
_VALUE_OF = {t: v for v, t in _TEXT_OF.items()}

# Multiplication is deliberately not part of the public surface -- the
# designs only ever add labels.  The table backs the test-suite.
_F4_MUL = (
    (0, 0, 0, 0),
    (0, 1, 2, 3),
    (0, 2, 3, 1),
    (0, 3, 1, 2),
)


def f4_from_text(ch: str) -> int:
    try:
        return _VALUE_OF[ch]
    except KeyError:
        raise ValueError(f"invalid GF(4) digit {ch!r}; expected one of 0, 1, w, W") from None


def f4_to_text(value: int) -> str:
    try:
        return _TEXT_OF[value]
    except KeyError:
        raise ValueError(f"invalid GF(4) value {value!r}; expected an integer in 0..3") from None


@dataclass(frozen=True)
class CodeVector:
    """One element of the label space: a phase bit plus m GF(4) symbols.

    ``m = 0`` is allowed: it carries only the phase bit and corresponds to
    the one-antenna seed used by the recursive constructions.
    """

    lam: int
    xi: Tuple[int, ...]

    def __post_init__(self) -> None:
        if self.lam not in (0, 1):
            raise ValueError(f"phase bit must be 0 or 1, got {self.lam!r}")
        if not isinstance(self.xi, tuple):
            object.__setattr__(self, "xi", tuple(self.xi))
        for x in self.xi:
            if x not in (0, 1, 2, 3):
                raise ValueError(f"GF(4) symbols must be integers in 0..3, got {x!r}")

    @property
    def m(self) -> int:
        return len(self.xi)

    def __add__(self, other: "CodeVector") -> "CodeVector":
        return add(self, other)

    def to_text(self) -> str:
        return f"{self.lam}|" + "".join(_TEXT_OF[x] for x in self.xi)

    @classmethod
    def from_text(cls, text: str) -> "CodeVector":
        head, sep, tail = text.partition("|")
        if sep != "|" or head not in ("0", "1"):
            raise ValueError(f"malformed label {text!r}; expected 'lam|symbols' with lam in 0/1")
        return cls(int(head), tuple(f4_from_text(ch) for ch in tail))

    def __str__(self) -> str:
        return self.to_text()

    def canonical_index(self) -> int:
        """Position in the canonical enumeration (phase-major, then the
        GF(4) word read as a base-4 number, first symbol most significant)."""
        word = 0
        for x in self.xi:
            word = word * 4 + x
        return self.lam * (4 ** len(self.xi)) + word


def zero(m: int) -> CodeVector:
    return CodeVector(0, (0,) * m)


def weight(v: CodeVector) -> int:
    """Hamming weight: nonzero coordinates counted across both parts."""
    return (v.lam != 0) + sum(x != 0 for x in v.xi)


def add(u: CodeVector, v: CodeVector) -> CodeVector:
    if u.m != v.m:
        raise ValueError(f"length mismatch: {u.m} vs {v.m} GF(4) symbols")
    return CodeVector(u.lam ^ v.lam, tuple(a ^ b for a, b in zip(u.xi, v.xi)))


def hr_orthogonal(u: CodeVector, v: CodeVector) -> bool:
    """Hurwitz-Radon orthogonality test in the label domain.

    The matrices behind two distinct labels anti-commute in the Hermitian
    sense exactly when the weight of the label sum is odd.
    """
    return weight(add(u, v)) % 2 == 1


def enumerate_labels(m: int, max_m: int = MAX_M) -> List[CodeVector]:
    """All 2^(2m+1) labels in canonical order (phase-major, word ascending)."""
    if not 1 <= m <= max_m:
        raise ValueError(f"m must be in 1..{max_m}, got {m}")
    out = []
    for lam in (0, 1):
        for word in range(4**m):
            xi = []
            w = word
            for _ in range(m):
                xi.append(w % 4)
                w //= 4
            out.append(CodeVector(lam, tuple(reversed(xi))))
    return out


@dataclass(frozen=True)
class FgdTranslates:
    """The three coset translates behind the fast-group-decodable family.

    ``lam_flip`` toggles the phase bit, ``last`` adds xi1 on the final
    coordinate, ``mixed`` spreads xi2 over every coordinate with a parity
    bit keyed to m.
    """

    lam_flip: CodeVector
    mixed: CodeVector
    last: CodeVector


def fgd_translates(m: int, xi1: int, xi2: int) -> FgdTranslates:
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if xi1 == 0 or xi2 == 0 or xi1 == xi2:
        raise ValueError("xi1 and xi2 must be distinct nonzero GF(4) values")
    return FgdTranslates(
        lam_flip=CodeVector(1, (0,) * m),
        mixed=CodeVector(1 if m % 2 == 0 else 0, (xi2,) * m),
        last=CodeVector(0, (0,) * (m - 1) + (xi1,)),
    )
