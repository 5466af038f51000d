"""The central design value: a set of labels plus a symbol-group partition.

A design for 2^m antennas lists K distinct labels (one per real symbol)
and partitions the symbol indices 1..K into decoding groups.  A separate,
optional encoding partition records which symbols are drawn jointly by
the encoder; absent, every real symbol is encoded independently.  The
design materializes into a linear dispersion matrix by weighting each
label's exact matrix with its real symbol.

Interchange format (JSON, canonical key order):

    {"version": 1, "name": ..., "m": ..., "vectors": ["0|0w", ...],
     "groups": [[1, 2], ...], "encoding_groups": [[...], ...],
     "provenance": [...]}

``encoding_groups`` is omitted when it equals ``groups``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .f4 import CodeVector, add, hr_orthogonal, weight
from .pauli import GaussMatrix, hr_orthogonal_matrix, matrix_from_label

SCHEMA_VERSION = 1


class DesignSyntaxError(ValueError):
    """Malformed design text: bad JSON, bad types, bad label digits."""


class DesignSemanticError(ValueError):
    """Well-formed text describing an invalid design (duplicates, bad partition)."""


Groups = Tuple[Tuple[int, ...], ...]


def _normalize_groups(groups, k: int, what: str) -> Groups:
    try:
        norm = tuple(tuple(int(i) for i in g) for g in groups)
    except (TypeError, ValueError):
        raise DesignSemanticError(f"{what} must be a sequence of index sequences") from None
    seen = set()
    for g in norm:
        if not g:
            raise DesignSemanticError(f"{what} contains an empty group")
        for i in g:
            if not 1 <= i <= k:
                raise DesignSemanticError(f"{what} index {i} out of range 1..{k}")
            if i in seen:
                raise DesignSemanticError(f"{what} index {i} appears twice")
            seen.add(i)
    if len(seen) != k:
        missing = sorted(set(range(1, k + 1)) - seen)
        raise DesignSemanticError(f"{what} does not cover indices {missing}")
    return norm


@dataclass(frozen=True)
class Design:
    """K distinct labels for 2^m antennas with a decoding-group partition.

    ``groups`` holds 1-based symbol indices; symbol i binds to vector i in
    list order.  ``encoding_groups`` (None means "same as groups") records
    joint encoding; it is what fast-decodable codes use to tie symbols that
    share a complex constellation.
    """

    m: int
    vectors: Tuple[CodeVector, ...]
    groups: Groups
    name: str = ""
    provenance: Tuple[dict, ...] = ()
    encoding_groups: Optional[Groups] = None

    def __post_init__(self):
        object.__setattr__(self, "vectors", tuple(self.vectors))
        object.__setattr__(self, "provenance", tuple(self.provenance))
        if self.m < 0:
            raise DesignSemanticError(f"m must be >= 0, got {self.m}")
        if not self.vectors:
            raise DesignSemanticError("design needs at least one vector")
        for v in self.vectors:
            if v.m != self.m:
                raise DesignSemanticError(
                    f"vector {v} has {v.m} GF(4) symbols, expected {self.m}"
                )
        if len(set(self.vectors)) != len(self.vectors):
            dupes = sorted({v.to_text() for v in self.vectors if self.vectors.count(v) > 1})
            raise DesignSemanticError(f"duplicate vectors: {dupes}")
        object.__setattr__(self, "groups", _normalize_groups(self.groups, self.k, "groups"))
        if self.encoding_groups is not None:
            norm = _normalize_groups(self.encoding_groups, self.k, "encoding_groups")
            object.__setattr__(self, "encoding_groups", norm)

    @property
    def k(self) -> int:
        return len(self.vectors)

    @property
    def n_antennas(self) -> int:
        return 2**self.m

    @property
    def g(self) -> int:
        return len(self.groups)

    def effective_encoding_groups(self) -> Groups:
        """Joint-encoding atoms; default is independent real symbols."""
        if self.encoding_groups is not None:
            return self.encoding_groups
        return tuple((i,) for i in range(1, self.k + 1))

    def with_name(self, name: str) -> "Design":
        return replace(self, name=name)


def rate(design: Design) -> Fraction:
    """Code rate K / (2N) in complex symbols per channel use, exact."""
    return Fraction(design.k, 2 * design.n_antennas)


def validate_g_group(design: Design) -> Tuple[bool, List[Tuple[int, int]]]:
    """Check that every cross-group symbol pair is HR-orthogonal.

    Returns (ok, violations) with violations as 1-based (k, l) index pairs.
    """
    violations = []
    for gi in range(len(design.groups)):
        for gj in range(gi + 1, len(design.groups)):
            for a in design.groups[gi]:
                for b in design.groups[gj]:
                    if not hr_orthogonal(design.vectors[a - 1], design.vectors[b - 1]):
                        violations.append((min(a, b), max(a, b)))
    return (not violations, violations)


def weight_matrices(design: Design) -> Tuple[GaussMatrix, ...]:
    return tuple(matrix_from_label(v) for v in design.vectors)


def materialize(design: Design, x: Sequence[float]) -> np.ndarray:
    """Evaluate sum_i x_i A_i as a complex matrix from the exact A_i."""
    if len(x) != design.k:
        raise ValueError(f"expected {design.k} symbol values, got {len(x)}")
    n = design.n_antennas
    out = np.zeros((n, n), dtype=np.complex128)
    for xi, a in zip(x, weight_matrices(design)):
        out += xi * a.to_complex()
    return out


def validate_g_group_matrix(design: Design) -> bool:
    """Same check as validate_g_group but in the matrix domain; exact."""
    mats = weight_matrices(design)
    for gi in range(len(design.groups)):
        for gj in range(gi + 1, len(design.groups)):
            for a in design.groups[gi]:
                for b in design.groups[gj]:
                    if not hr_orthogonal_matrix(mats[a - 1], mats[b - 1]):
                        return False
    return True


def subdesign(design: Design, indices: Sequence[int], name: str = "") -> Design:
    """Restriction to a 1-based index subset; groups restrict and renumber."""
    idx = sorted(set(int(i) for i in indices))
    for i in idx:
        if not 1 <= i <= design.k:
            raise ValueError(f"index {i} out of range 1..{design.k}")
    pos = {old: new + 1 for new, old in enumerate(idx)}
    vectors = tuple(design.vectors[i - 1] for i in idx)

    def restrict(groups: Groups) -> Groups:
        out = []
        for g in groups:
            kept = tuple(pos[i] for i in g if i in pos)
            if kept:
                out.append(kept)
        return tuple(out)

    enc = design.encoding_groups
    return Design(
        m=design.m,
        vectors=vectors,
        groups=restrict(design.groups),
        name=name or (design.name + "/sub" if design.name else ""),
        provenance=design.provenance + ({"op": "subdesign", "indices": idx},),
        encoding_groups=restrict(enc) if enc is not None else None,
    )


def to_dict(design: Design) -> dict:
    out = {
        "version": SCHEMA_VERSION,
        "name": design.name,
        "m": design.m,
        "vectors": [v.to_text() for v in design.vectors],
        "groups": [list(g) for g in design.groups],
    }
    if design.encoding_groups is not None:
        out["encoding_groups"] = [list(g) for g in design.encoding_groups]
    out["provenance"] = list(design.provenance)
    return out


def serialize(design: Design) -> str:
    return json.dumps(to_dict(design), indent=2) + "\n"


def from_dict(obj: dict) -> Design:
    if not isinstance(obj, dict):
        raise DesignSyntaxError(f"expected a JSON object, got {type(obj).__name__}")
    version = obj.get("version")
    if version != SCHEMA_VERSION:
        raise DesignSyntaxError(f"unsupported schema version {version!r}")
    for key, typ in (("m", int), ("vectors", list), ("groups", list)):
        if key not in obj:
            raise DesignSyntaxError(f"missing required key {key!r}")
        if not isinstance(obj[key], typ):
            raise DesignSyntaxError(f"key {key!r} must be {typ.__name__}")
    vectors = []
    for pos, text in enumerate(obj["vectors"]):
        if not isinstance(text, str):
            raise DesignSyntaxError(f"vectors[{pos}] must be a string")
        try:
            vectors.append(CodeVector.from_text(text))
        except ValueError as e:
            raise DesignSyntaxError(f"vectors[{pos}]: {e}") from None
    return Design(
        m=obj["m"],
        vectors=tuple(vectors),
        groups=tuple(tuple(g) for g in obj["groups"]),
        name=obj.get("name", ""),
        provenance=tuple(obj.get("provenance", ())),
        encoding_groups=(
            tuple(tuple(g) for g in obj["encoding_groups"])
            if "encoding_groups" in obj
            else None
        ),
    )


def parse(text: str) -> Design:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise DesignSyntaxError(f"invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}") from None
    return from_dict(obj)
