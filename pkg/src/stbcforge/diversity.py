"""Full-diversity certification and constellation construction.

A code built from a design and per-symbol real constellations has full
diversity when every pairwise codeword difference matrix is nonsingular.
Differences are linear in the per-symbol value differences, so instead of
looping over codeword pairs we enumerate distinct difference tuples
(one value from each symbol's difference set) -- an exact cover of all
pairs at a fraction of the work.

Constellations are grown point by point: a candidate value for a new
point survives if every difference determinant it participates in stays
away from zero.  All but finitely many reals qualify, so a deterministic
low-discrepancy candidate stream converges in a handful of draws.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .design import Design, weight_matrices
from .pauli import GaussMatrix, hr_orthogonal_matrix

#: default cap on the codeword count for exhaustive verification
MAX_CODEWORDS = 1 << 16
#: default cap on enumerated difference tuples
MAX_DIFF_TUPLES = 1 << 26

_DET_RTOL = 1e-9
_GOLDEN = (math.sqrt(5) - 1) / 2


class EnumerationBoundError(RuntimeError):
    """Exhaustive verification would exceed the configured bounds.

    Raised instead of silently sampling."""


class CandidateBudgetError(RuntimeError):
    """The constellation builder ran out of candidate draws."""


@dataclass(frozen=True)
class Constellation:
    """Per-real-symbol value sets with per-symbol provenance.

    provenance[i] is one of "built", "regular-pam", "user".  Repeated
    values within a symbol are representable (so the verifier can name
    them in a failed certificate) but never produced by the builder.
    """

    values: Tuple[Tuple[float, ...], ...]
    provenance: Tuple[str, ...]

    def __post_init__(self):
        if len(self.values) != len(self.provenance):
            raise ValueError("values and provenance must have equal length")

    @property
    def sizes(self) -> Tuple[int, ...]:
        return tuple(len(v) for v in self.values)

    def to_dict(self) -> dict:
        return {
            "values": [list(v) for v in self.values],
            "provenance": list(self.provenance),
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "Constellation":
        return cls(
            values=tuple(tuple(float(x) for x in v) for v in obj["values"]),
            provenance=tuple(obj["provenance"]),
        )


def user_constellation(values: Sequence[Sequence[float]]) -> Constellation:
    vals = tuple(tuple(float(x) for x in v) for v in values)
    return Constellation(values=vals, provenance=("user",) * len(vals))


@dataclass
class DiversityCertificate:
    min_abs_det: float
    min_scaled: float
    argmin_pair: Optional[Tuple[Tuple[int, ...], Tuple[int, ...]]]
    pair_count: int
    evaluated_tuples: int
    tol: float

    @property
    def passed(self) -> bool:
        return self.pair_count == 0 or self.min_scaled > self.tol


def _diff_sets(values: Sequence[Sequence[float]]):
    """Per-symbol difference sets with one witness index pair per value.

    A zero difference from two distinct indices marks a degenerate
    constellation and its witness is kept in preference to (0, 0).
    """
    sets = []
    for vals in values:
        witness: Dict[float, Tuple[int, int]] = {}
        degenerate = False
        for a, va in enumerate(vals):
            for b, vb in enumerate(vals):
                d = va - vb
                if d == 0.0 and a != b and not degenerate:
                    witness[0.0] = (a, b)
                    degenerate = True
                elif d not in witness:
                    witness[d] = (a, b)
        sets.append((sorted(witness), witness, degenerate))
    return sets


def verify_full_diversity(
    design: Design,
    constellation: Constellation,
    tol: float = _DET_RTOL,
    max_codewords: int = MAX_CODEWORDS,
    max_diff_tuples: int = MAX_DIFF_TUPLES,
) -> DiversityCertificate:
    """Exhaustively certify min |det| over all distinct codeword pairs.

    The determinant of a codeword difference depends only on the tuple of
    per-symbol value differences, so the enumeration runs over difference
    tuples (all pairs are covered; repeated differences are folded).
    Scaling: each |det| is also compared against tol * scale^N with scale
    the largest entry magnitude of that difference matrix.
    """
    if len(constellation.values) != design.k:
        raise ValueError(f"need {design.k} symbol constellations, got {len(constellation.values)}")
    sizes = constellation.sizes
    total = math.prod(sizes)
    if total > max_codewords:
        raise EnumerationBoundError(
            f"{total} codewords exceed the bound of {max_codewords}; refusing to sample"
        )
    pair_count = total * (total - 1) // 2

    diff_sets = _diff_sets(constellation.values)
    n_tuples = math.prod(len(ds[0]) for ds in diff_sets)
    if n_tuples > max_diff_tuples:
        raise EnumerationBoundError(
            f"{n_tuples} difference tuples exceed the bound of {max_diff_tuples}"
        )

    mats = np.stack([a.to_complex() for a in weight_matrices(design)])
    n = design.n_antennas

    # a degenerate symbol (repeated value) gives two distinct codewords
    # with a zero difference matrix
    if all(0.0 in ds[1] for ds in diff_sets) and any(ds[2] for ds in diff_sets):
        u, v = [], []
        for ds in diff_sets:
            a, b = ds[1][0.0]
            u.append(a)
            v.append(b)
        return DiversityCertificate(
            min_abs_det=0.0,
            min_scaled=0.0,
            argmin_pair=(tuple(u), tuple(v)),
            pair_count=pair_count,
            evaluated_tuples=1,
            tol=tol,
        )

    min_det = (math.inf, None)
    min_scaled = math.inf
    evaluated = 0
    chunk = 8192
    diff_values = [ds[0] for ds in diff_sets]
    buf: List[Tuple[float, ...]] = []

    def flush(buf):
        nonlocal min_det, min_scaled, evaluated
        if not buf:
            return
        arr = np.array(buf)  # (B, K)
        deltas = np.tensordot(arr, mats, axes=(1, 0))  # (B, N, N)
        dets = np.abs(np.linalg.det(deltas))
        scales = np.max(np.abs(deltas).reshape(len(buf), -1), axis=1)
        scaled = np.where(scales > 0, dets / scales**n, 0.0)
        evaluated += len(buf)
        i = int(np.argmin(dets))
        if dets[i] < min_det[0]:
            min_det = (float(dets[i]), tuple(arr[i]))
        min_scaled = min(min_scaled, float(np.min(scaled)))

    for combo in itertools.product(*diff_values):
        if all(d == 0.0 for d in combo):
            continue
        buf.append(combo)
        if len(buf) >= chunk:
            flush(buf)
            buf = []
    flush(buf)

    if evaluated == 0:
        return DiversityCertificate(math.inf, math.inf, None, pair_count, 0, tol)

    u, v = [], []
    for d, ds in zip(min_det[1], diff_sets):
        a, b = ds[1][d]
        u.append(a)
        v.append(b)
    return DiversityCertificate(
        min_abs_det=min_det[0],
        min_scaled=min_scaled,
        argmin_pair=(tuple(u), tuple(v)),
        pair_count=pair_count,
        evaluated_tuples=evaluated,
        tol=tol,
    )


def _candidate_stream(seed: int):
    """Deterministic low-discrepancy rationals in [-2, 2].

    Golden-ratio stride with a seeded offset, snapped to multiples of
    1/1024 so every candidate is an exact dyadic rational.
    """
    offset = np.random.default_rng(seed).random()
    j = 0
    while True:
        t = (offset + j * _GOLDEN) % 1.0
        yield round((4.0 * t - 2.0) * 1024.0) / 1024.0
        j += 1


def build_constellations(
    design: Design,
    sizes: Sequence[int],
    seed: int = 0,
    tol: float = _DET_RTOL,
    fixed: Optional[Dict[int, Sequence[float]]] = None,
    max_candidates: int = 512,
    max_codewords: int = MAX_CODEWORDS,
) -> Constellation:
    """Grow per-symbol constellations that certify full diversity.

    Points are appended one symbol at a time.  A candidate for symbol i,
    point k must differ from that symbol's prior points and keep every
    difference determinant it joins above tol * scale^N; the involved
    differences run over all value-difference tuples of symbols < i times
    the differences against symbol i's prior points.  ``fixed`` pins full
    value sets for chosen symbols (1-based); those are laid down first and
    verified as a base code.  The result is re-verified before returning.
    """
    sizes = [int(q) for q in sizes]
    if len(sizes) != design.k:
        raise ValueError(f"need {design.k} sizes, got {len(sizes)}")
    if any(q < 1 for q in sizes):
        raise ValueError("sizes must be positive")
    if math.prod(sizes) > max_codewords:
        raise EnumerationBoundError(
            f"{math.prod(sizes)} codewords exceed the bound of {max_codewords}"
        )
    fixed = {int(i): tuple(float(x) for x in v) for i, v in (fixed or {}).items()}
    for i, vals in fixed.items():
        if not 1 <= i <= design.k:
            raise ValueError(f"fixed symbol {i} out of range")
        if len(vals) != sizes[i - 1]:
            raise ValueError(f"fixed symbol {i} needs {sizes[i - 1]} values, got {len(vals)}")
        if len(set(vals)) != len(vals):
            raise ValueError(f"fixed symbol {i} has repeated values")

    mats = [a.to_complex() for a in weight_matrices(design)]
    n = design.n_antennas
    # fixed symbols first so their joint code is the induction base
    order = sorted(fixed) + [i for i in range(1, design.k + 1) if i not in fixed]
    values: Dict[int, List[float]] = {i: list(fixed.get(i, ())) for i in range(1, design.k + 1)}
    provenance = {i: ("regular-pam" if i in fixed else "built") for i in range(1, design.k + 1)}

    def diffs_against_zero(sym: int) -> np.ndarray:
        vals = values[sym]
        out = {0.0}
        for a in vals:
            for b in vals:
                out.add(a - b)
        return np.array(sorted(out))

    def prefix_diff_matrices(upto: int) -> np.ndarray:
        """All difference matrices over the symbols placed before ``upto``."""
        placed = order[:upto]
        delta_sets = [diffs_against_zero(s) for s in placed]
        combos = itertools.product(*delta_sets) if delta_sets else [()]
        rows = []
        for combo in combos:
            d = np.zeros((n, n), dtype=complex)
            for s, val in zip(placed, combo):
                if val:
                    d = d + val * mats[s - 1]
            rows.append(d)
        return np.stack(rows)

    if fixed:
        # the fixed fragment is the induction base; it must be full
        # diversity on its own before anything is appended to it
        base = prefix_diff_matrices(len(fixed))
        nonzero = base[np.abs(base).reshape(len(base), -1).max(axis=1) > 0]
        if len(nonzero):
            dets = np.abs(np.linalg.det(nonzero))
            scales = np.max(np.abs(nonzero).reshape(len(nonzero), -1), axis=1)
            if not np.all(dets > tol * scales**n):
                raise ValueError("fixed constellation fragment is not full-diversity")

    stream = _candidate_stream(seed)
    for pos, sym in enumerate(order):
        if sym in fixed:
            continue
        base = prefix_diff_matrices(pos)
        a_new = mats[sym - 1]
        for _ in range(sizes[sym - 1]):
            prior = list(values[sym])
            accepted = None
            for _ in range(max_candidates):
                z = next(stream)
                if z in prior:
                    continue
                if not prior:
                    accepted = z
                    break
                shifts = np.array([a - z for a in prior])
                # every prefix difference combined with every new-point shift
                deltas = base[:, None, :, :] + shifts[None, :, None, None] * a_new
                deltas = deltas.reshape(-1, n, n)
                dets = np.abs(np.linalg.det(deltas))
                scales = np.max(np.abs(deltas).reshape(len(deltas), -1), axis=1)
                if np.all(dets > tol * scales**n):
                    accepted = z
                    break
            if accepted is None:
                raise CandidateBudgetError(
                    f"no candidate for symbol {sym} within {max_candidates} draws; "
                    "loosen tol or change the seed"
                )
            values[sym].append(accepted)

    result = Constellation(
        values=tuple(tuple(values[i]) for i in range(1, design.k + 1)),
        provenance=tuple(provenance[i] for i in range(1, design.k + 1)),
    )
    cert = verify_full_diversity(design, result, tol=tol, max_codewords=max_codewords)
    if not cert.passed:
        raise CandidateBudgetError(
            f"built constellation failed re-verification (min scaled det {cert.min_scaled:g})"
        )
    return result


def regular_pam(q: int) -> Tuple[float, ...]:
    """Symmetric PAM {+-1, +-3, ...} scaled to unit average energy."""
    raw = [2 * k - q + 1 for k in range(q)]
    energy = sum(v * v for v in raw) / q
    s = 1.0 / math.sqrt(energy)
    return tuple(v * s for v in raw)


def regular_pam_assignment(
    design: Design, symbols: Sequence[int], q: int
) -> Dict[int, Tuple[float, ...]]:
    """Assign unit-energy regular PAM to a mutually orthogonal symbol set.

    The selected symbols' weight matrices must satisfy, exactly,
    A_i^H A_j + A_j^H A_i = 2 I for i = j and 0 otherwise; the remaining
    symbols are meant to be completed via build_constellations(fixed=...).
    """
    idx = sorted(set(int(i) for i in symbols))
    mats = weight_matrices(design)
    eye = GaussMatrix.identity(design.n_antennas)
    for pos, i in enumerate(idx):
        a = mats[i - 1]
        if a.ctranspose() @ a != eye:
            raise ValueError(f"symbol {i}: weight matrix is not unitary")
        for j in idx[pos + 1 :]:
            if not hr_orthogonal_matrix(a, mats[j - 1]):
                raise ValueError(f"symbols ({i}, {j}) are not mutually orthogonal")
    pam = regular_pam(q)
    return {i: pam for i in idx}
