"""Small-scale channel simulation: QR zero structure and decode counting.

The real-equivalent system stacks, per symbol, the real and imaginary
parts of (weight matrix x channel) into one column.  Cross-group
orthogonality makes the Gram matrix block diagonal, so the upper factor
of the QR decomposition carries structural zeros: entry (l, k), l < k, is
zero for every channel whenever column k is orthogonal to all columns up
to l.  Those claims are verified numerically against seeded channels.

The conditional decoder enumerates exactly the candidate sets the cost
tree prescribes and must return the same argmin as flat enumeration; its
metric-evaluation counts realize the analyzer's closed forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .design import Design, weight_matrices
from .f4 import hr_orthogonal
from .decodability import Leaf, Node, Partition, analyze, column_order
from .diversity import regular_pam


def rayleigh_channel(n_tx: int, n_rx: int, rng: np.random.Generator) -> np.ndarray:
    """Unit-variance circularly-symmetric complex Gaussian channel matrix."""
    return (rng.standard_normal((n_tx, n_rx)) + 1j * rng.standard_normal((n_tx, n_rx))) / math.sqrt(2)


def real_vec(mat: np.ndarray) -> np.ndarray:
    """Column-stacked real part over imaginary part, as one real vector."""
    return np.concatenate([mat.real.ravel(order="F"), mat.imag.ravel(order="F")])


@dataclass
class RealEquivalentSystem:
    hmat: np.ndarray  # 2*N*N_r x K
    q: np.ndarray
    r: np.ndarray
    order: Tuple[int, ...]  # 1-based symbol index per column
    rank_deficient: bool
    diag_abs: np.ndarray


def real_equivalent(
    design: Design, h: np.ndarray, order: Optional[Sequence[int]] = None
) -> RealEquivalentSystem:
    """Stack the per-symbol real-equivalent columns and QR-factor them.

    ``order`` reorders columns (1-based symbol indices); the default is
    design symbol order.  Rank deficiency (more symbols than real
    dimensions, or a degenerate channel) is flagged, with the factors
    still returned.
    """
    if order is None:
        order = list(range(1, design.k + 1))
    order = [int(i) for i in order]
    if sorted(order) != list(range(1, design.k + 1)):
        raise ValueError(f"order must be a permutation of 1..{design.k}")
    mats = weight_matrices(design)
    cols = [real_vec(mats[i - 1].to_complex() @ h) for i in order]
    hmat = np.stack(cols, axis=1)
    q, r = np.linalg.qr(hmat)
    diag = np.abs(np.diag(r))
    scale = np.max(np.abs(r)) or 1.0
    deficient = design.k > hmat.shape[0] or bool(np.any(diag < 1e-12 * scale))
    return RealEquivalentSystem(
        hmat=hmat, q=q, r=r, order=tuple(order), rank_deficient=deficient, diag_abs=diag
    )


def claimed_zero_positions(design: Design, order: Sequence[int]) -> List[Tuple[int, int]]:
    """(l, k) 0-based positions of structural zeros of the upper factor.

    Entry (l, k) is claimed zero when column k is orthogonal to every
    column at positions 0..l; with group-sorted columns this reproduces
    the block pattern, and it is valid for any ordering.
    """
    vs = [design.vectors[i - 1] for i in order]
    out = []
    for k in range(len(vs)):
        for l in range(k):
            if all(hr_orthogonal(vs[j], vs[k]) for j in range(l + 1)):
                out.append((l, k))
            else:
                break
    return out


def control_positions(design: Design, order: Sequence[int]) -> List[Tuple[int, int]]:
    """Directly non-orthogonal pairs; generically nonzero in the upper factor."""
    vs = [design.vectors[i - 1] for i in order]
    return [
        (l, k)
        for k in range(len(vs))
        for l in range(k)
        if not hr_orthogonal(vs[l], vs[k])
    ]


@dataclass
class RStructureReport:
    design_name: str
    trials: int
    tol: float
    n_claimed: int
    max_claimed: float
    n_controls: int
    median_control: float
    passed: bool


def verify_r_structure(
    design: Design,
    trials: int = 100,
    tol: float = 1e-9,
    seed: int = 0,
    n_rx: Optional[int] = None,
    order: Optional[Sequence[int]] = None,
) -> RStructureReport:
    """Check every claimed zero of the upper factor over seeded channels.

    Entries are scale-normalized by the largest magnitude in the factor.
    Non-orthogonal pairs serve as negative controls; their median must
    stay well above the tolerance for the claims to mean anything.
    ``n_rx`` defaults to the smallest count giving the factor K rows.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    if n_rx is None:
        n_rx = max(1, -(-design.k // (2 * design.n_antennas)))
    if order is None:
        order = column_order(analyze(design).tree)
    rng = np.random.default_rng(seed)
    rows = min(2 * design.n_antennas * n_rx, design.k)
    claimed = [(l, k) for l, k in claimed_zero_positions(design, order) if l < rows]
    controls = [(l, k) for l, k in control_positions(design, order) if l < rows]
    max_claimed = 0.0
    control_vals: List[float] = []
    for _ in range(trials):
        h = rayleigh_channel(design.n_antennas, n_rx, rng)
        sys = real_equivalent(design, h, order=order)
        r = np.abs(sys.r) / (np.max(np.abs(sys.r)) or 1.0)
        for l, k in claimed:
            max_claimed = max(max_claimed, float(r[l, k]))
        for l, k in controls:
            control_vals.append(float(r[l, k]))
    median_control = float(np.median(control_vals)) if control_vals else math.inf
    passed = max_claimed < tol and (not control_vals or median_control > 1e-3)
    return RStructureReport(
        design_name=design.name,
        trials=trials,
        tol=tol,
        n_claimed=len(claimed),
        max_claimed=max_claimed,
        n_controls=len(controls),
        median_control=median_control,
        passed=passed,
    )


# ---------------------------------------------------------------------------
# candidate sets and decoding


_MIX_ANGLE = 0.7  # fixed generic rotation so no candidate coordinate degenerates


def _per_complex_points(m_size: int) -> np.ndarray:
    """M points in the plane for one complex symbol: square QAM when M is
    a perfect square, otherwise a rotated PAM line."""
    q = math.isqrt(m_size)
    if q * q == m_size:
        pam = regular_pam(q)
        return np.array([(a, b) for a in pam for b in pam])
    pam = regular_pam(m_size)
    c, s = math.cos(_MIX_ANGLE), math.sin(_MIX_ANGLE)
    return np.array([(v * c, v * s) for v in pam])


def atom_candidates(n_reals: int, m_size: int) -> np.ndarray:
    """Joint candidate tuples for one encoding atom of n_reals symbols.

    An atom of 2r reals enumerates m_size^r points (r complex symbols,
    mixed by a fixed rotation); a single real needs m_size to be a perfect
    square and uses sqrt(M)-PAM.
    """
    if n_reals == 1:
        q = math.isqrt(m_size)
        if q * q != m_size:
            raise ValueError(
                f"single-real atoms need a square constellation size, got {m_size}"
            )
        return np.array(regular_pam(q))[:, None]
    if n_reals % 2 != 0:
        raise ValueError(f"atoms must have 1 or an even number of reals, got {n_reals}")
    r = n_reals // 2
    pts = _per_complex_points(m_size)
    out = pts
    for _ in range(r - 1):
        a = np.repeat(out, len(pts), axis=0)
        b = np.tile(pts, (len(out), 1))
        out = np.concatenate([a, b], axis=1)
    if n_reals > 2:
        rot = np.eye(n_reals)
        for i in range(n_reals - 1):
            g = np.eye(n_reals)
            c, s = math.cos(_MIX_ANGLE), math.sin(_MIX_ANGLE)
            g[i, i] = c
            g[i, i + 1] = -s
            g[i + 1, i] = s
            g[i + 1, i + 1] = c
            rot = g @ rot
        out = out @ rot.T
    return out


def _product(parts: List[np.ndarray]) -> np.ndarray:
    out = parts[0]
    for p in parts[1:]:
        a = np.repeat(out, len(p), axis=0)
        b = np.tile(p, (len(out), 1))
        out = np.concatenate([a, b], axis=1)
    return out


class _CandidateTable:
    """Per-atom candidate tuples plus joint tables for symbol sets."""

    def __init__(self, design: Design, m_size: int):
        self.atoms = design.effective_encoding_groups()
        self.m_size = m_size
        self.by_atom = {atom: atom_candidates(len(atom), m_size) for atom in self.atoms}

    def atoms_within(self, symbols: Sequence[int]) -> List[Tuple[int, ...]]:
        want = set(symbols)
        found = [a for a in self.atoms if set(a) <= want]
        covered = {s for a in found for s in a}
        if covered != want:
            raise ValueError(f"symbol set {sorted(want)} splits an encoding atom")
        return found

    def joint(self, symbols: Sequence[int]) -> Tuple[np.ndarray, List[int]]:
        """(candidates P x n, symbol order) for a symbol set; atom-aligned."""
        atoms = self.atoms_within(symbols)
        table = _product([self.by_atom[a] for a in atoms])
        syms = [s for a in atoms for s in a]
        return table, syms

    def count(self, symbols: Sequence[int]) -> int:
        return math.prod(len(self.by_atom[a]) for a in self.atoms_within(symbols))


def tree_count(node: Node, table: _CandidateTable, mult: int = 1) -> int:
    """Metric evaluations the conditional decoder performs, in closed form."""
    if isinstance(node, Leaf):
        return mult * table.count(node.symbols)
    if isinstance(node, Partition):
        return sum(tree_count(c, table, mult) for c in node.children)
    return tree_count(node.child, table, mult * table.count(node.conditioned))


def _solve(node: Node, yres: np.ndarray, hmat: np.ndarray, table: _CandidateTable, k: int, tally: List[int]):
    """Batched exact minimization of the tree objective.

    yres: (B, D) residuals.  Returns (cost (B,), assign (B, K)) where the
    assign rows are filled on this node's symbols.  ``tally[0]``
    accumulates per-leaf candidate metric evaluations, the unit the cost
    model counts.
    """
    b = yres.shape[0]
    if isinstance(node, Leaf):
        cands, syms = table.joint(node.symbols)
        hl = hmat[:, [s - 1 for s in syms]]
        cols = hl @ cands.T  # (D, P)
        quad = np.sum(cols * cols, axis=0)
        scores = quad[None, :] - 2.0 * (yres @ cols)  # (B, P)
        tally[0] += scores.size
        idx = np.argmin(scores, axis=1)
        assign = np.zeros((b, k))
        assign[:, [s - 1 for s in syms]] = cands[idx]
        return scores[np.arange(b), idx], assign
    if isinstance(node, Partition):
        total = np.zeros(b)
        assign = np.zeros((b, k))
        for child in node.children:
            cost, sub = _solve(child, yres, hmat, table, k, tally)
            total += cost
            assign += sub
        return total, assign
    cands, syms = table.joint(node.conditioned)
    hc = hmat[:, [s - 1 for s in syms]]
    cols = hc @ cands.T  # (D, Pc)
    quad = np.sum(cols * cols, axis=0)
    term1 = quad[None, :] - 2.0 * (yres @ cols)  # (B, Pc)
    pc = len(cands)
    yres2 = (yres[:, None, :] - cols.T[None, :, :]).reshape(b * pc, -1)
    child_cost, child_assign = _solve(node.child, yres2, hmat, table, k, tally)
    total = term1 + child_cost.reshape(b, pc)
    idx = np.argmin(total, axis=1)
    assign = child_assign.reshape(b, pc, k)[np.arange(b), idx]
    assign[:, [s - 1 for s in syms]] = cands[idx]
    return total[np.arange(b), idx], assign


@dataclass
class DecodeCountReport:
    design_name: str
    m_size: int
    trials: int
    agreements: int
    conditional_count: int
    flat_count: int
    closed_form_count: int

    @property
    def all_agree(self) -> bool:
        return self.agreements == self.trials


def decode_count(
    design: Design,
    m_size: int,
    trials: int = 50,
    seed: int = 0,
    noise_sigma: float = 0.1,
    structure: Optional[Node] = None,
    n_rx: Optional[int] = None,
) -> DecodeCountReport:
    """Conditional-vs-flat ML decoding over noisy seeded trials.

    Per trial: draw a channel and a true codeword, add Gaussian noise,
    decode both ways, compare argmins exactly, and tally candidate-metric
    evaluations.  The conditional count per trial equals the closed form
    the cost tree prescribes.
    """
    if structure is None:
        structure = analyze(design).tree
    if n_rx is None:
        n_rx = design.n_antennas
    table = _CandidateTable(design, m_size)
    flat_tree = Leaf(tuple(range(1, design.k + 1)))
    closed_form = tree_count(structure, table)

    rng = np.random.default_rng(seed)
    agreements = 0
    cond_tally = [0]
    flat_tally = [0]
    for _ in range(trials):
        h = rayleigh_channel(design.n_antennas, n_rx, rng)
        sys = real_equivalent(design, h)
        hmat = sys.hmat
        x_true = np.zeros(design.k)
        for atom in table.atoms:
            cands = table.by_atom[atom]
            x_true[[s - 1 for s in atom]] = cands[rng.integers(len(cands))]
        y = hmat @ x_true + noise_sigma * rng.standard_normal(hmat.shape[0])
        _, cond = _solve(structure, y[None, :], hmat, table, design.k, cond_tally)
        _, flat = _solve(flat_tree, y[None, :], hmat, table, design.k, flat_tally)
        if np.array_equal(cond[0], flat[0]):
            agreements += 1
    return DecodeCountReport(
        design_name=design.name,
        m_size=m_size,
        trials=trials,
        agreements=agreements,
        conditional_count=cond_tally[0],
        flat_count=flat_tally[0],
        closed_form_count=closed_form * trials,
    )
