"""Catalog of multigroup / fast-decodable designs and the recursive builders.

Fixed designs: the 2x2 orthogonal design, the three rate-1 2x2 two-group
designs, the 4x4 quasi-orthogonal design, square orthogonal designs, the
rate-17/8 fast-group-decodable code, and two rate-2 fast-decodable codes.

Recursive builders lift a design for 2^m antennas to 2^(m+1) antennas:

* ``construction_a`` doubles every group (keeps the group count),
* ``construction_b`` interleaves the halves of a two-group design,
* ``construction_c`` splits a two-group design into four groups,

plus coordinate permutations, the k-step four-group recursion, the
arbitrary-group-count family, and the fast-group-decodable family with a
tunable rate.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .f4 import OMEGA, OMEGA2, CodeVector, add, enumerate_labels, fgd_translates, weight
from .design import Design, rate, validate_g_group

_OMEGA_POW = (1, OMEGA, OMEGA2)


class ConstructionError(ValueError):
    """A construction precondition failed; carries a witness where useful."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


def _require_valid(design: Design, op: str) -> None:
    ok, violations = validate_g_group(design)
    if not ok:
        raise ConstructionError(
            f"{op}: input design is not group decodable; offending pairs {violations[:4]}",
            witness=violations,
        )


def _require_even_within(design: Design, op: str) -> None:
    if design.g != 2:
        raise ConstructionError(f"{op}: input design must have exactly 2 groups, has {design.g}")
    for g in design.groups:
        for i, a in enumerate(g):
            for b in g[i + 1 :]:
                u, v = design.vectors[a - 1], design.vectors[b - 1]
                if weight(add(u, v)) % 2 != 0:
                    raise ConstructionError(
                        f"{op}: within-group pair ({a},{b}) has odd sum weight",
                        witness=(a, b),
                    )


def _append(v: CodeVector, x: int, flip: bool = False) -> CodeVector:
    return CodeVector(v.lam ^ (1 if flip else 0), v.xi + (x,))


def _lift_groups(groups, k: int):
    return tuple(tuple(g) + tuple(i + k for i in g) for g in groups)


def _copy_atoms(encoding, k: int):
    if encoding is None:
        return None
    return tuple(encoding) + tuple(tuple(i + k for i in g) for g in encoding)


# ---------------------------------------------------------------------------
# fixed designs


def trivial_design() -> Design:
    """The one-antenna design x1 + i x2; seed of every recursion."""
    return Design(
        m=0,
        vectors=(CodeVector(0, ()), CodeVector(1, ())),
        groups=((1,), (2,)),
        name="trivial",
        provenance=({"op": "trivial"},),
    )


def alamouti() -> Design:
    """2x2 orthogonal design: four mutually orthogonal singleton groups."""
    return Design(
        m=1,
        vectors=tuple(CodeVector(0, (x,)) for x in (0, 1, OMEGA, OMEGA2)),
        groups=((1,), (2,), (3,), (4,)),
        name="alamouti",
        provenance=({"op": "alamouti"},),
    )


def two_by_two(l: int) -> Design:
    """The three rate-1, two-group 2x2 designs, parametrized by l in 0..2.

    l=0 is the ABBA form; l=1 is diagonal and becomes the
    coordinate-interleaved code after an in-group change of variables
    (not applied here); l=2 is the (a, b; -b, a) form.  Vector order
    follows the displayed matrices so symbols bind positionally.
    """
    if l not in (0, 1, 2):
        raise ValueError(f"l must be 0, 1 or 2, got {l}")
    w = _OMEGA_POW[l]
    group1 = (CodeVector(0, (0,)), CodeVector(1, (w,)))
    if l == 2:
        group2 = (CodeVector(1, (0,)), CodeVector(0, (w,)))
    else:
        group2 = (CodeVector(0, (w,)), CodeVector(1, (0,)))
    return Design(
        m=1,
        vectors=group1 + group2,
        groups=((1, 2), (3, 4)),
        name=f"two_by_two_l{l}",
        provenance=({"op": "two_by_two", "l": l},),
    )


def quasi_orthogonal_4x4() -> Design:
    """Rate-1 four-group 4x4 design with two symbols per group."""
    w, W = OMEGA, OMEGA2
    vectors = (
        CodeVector(0, (0, 0)),
        CodeVector(1, (w, w)),
        CodeVector(0, (0, W)),
        CodeVector(1, (w, 1)),
        CodeVector(0, (W, 0)),
        CodeVector(1, (1, w)),
        CodeVector(0, (W, W)),
        CodeVector(1, (1, 1)),
    )
    return Design(
        m=2,
        vectors=vectors,
        groups=((1, 7), (2, 8), (3, 5), (4, 6)),
        name="quasi_orthogonal_4x4",
        provenance=({"op": "quasi_orthogonal_4x4"},),
    )


def square_od(m: int) -> Design:
    """Maximal-rate square orthogonal design: 2m+2 singleton groups.

    m=0 is allowed and gives the one-antenna design (needed as the seed of
    the arbitrary-group-count family).
    """
    if m < 0:
        raise ValueError(f"m must be >= 0, got {m}")
    vectors: List[CodeVector] = []
    for k in range(1, m + 1):
        lam = 1 if k % 2 == 0 else 0
        vectors.append(CodeVector(lam, (0,) * (m - k) + (OMEGA2,) + (OMEGA,) * (k - 1)))
    for k in range(1, m + 1):
        lam = 1 if k % 2 == 0 else 0
        vectors.append(CodeVector(lam, (0,) * (m - k) + (1,) + (OMEGA,) * (k - 1)))
    vectors.append(CodeVector(1 if m % 2 == 0 else 0, (OMEGA,) * m))
    vectors.append(CodeVector(0, (0,) * m))
    return Design(
        m=m,
        vectors=tuple(vectors),
        groups=tuple((i,) for i in range(1, len(vectors) + 1)),
        name=f"square_od_m{m}",
        provenance=({"op": "square_od", "m": m},),
    )


# ---------------------------------------------------------------------------
# recursive builders


def construction_a(design: Design, l: int) -> Design:
    """Group-doubling lift to 2^(m+1) antennas; group count and rate stay put.

    Each group keeps its vectors with a 0 appended and gains phase-flipped
    copies with w^l appended.  An even-sums-within-group property of the
    input survives the lift.
    """
    if l not in (0, 1, 2):
        raise ValueError(f"l must be 0, 1 or 2, got {l}")
    _require_valid(design, "construction_a")
    k = design.k
    w = _OMEGA_POW[l]
    vectors = tuple(_append(v, 0) for v in design.vectors) + tuple(
        _append(v, w, flip=True) for v in design.vectors
    )
    return Design(
        m=design.m + 1,
        vectors=vectors,
        groups=_lift_groups(design.groups, k),
        name=design.name + f"+A{l}" if design.name else f"A{l}",
        provenance=design.provenance + ({"op": "construction_a", "l": l},),
        encoding_groups=_copy_atoms(design.encoding_groups, k),
    )


def permute(design: Design, sigma: Sequence[int]) -> Design:
    """Apply a coordinate permutation to every vector; groups are untouched.

    ``sigma`` lists 1-based sources: new coordinate j reads old coordinate
    sigma[j-1].  Weights, sums, and hence decodability class are invariant.
    """
    sig = tuple(int(s) for s in sigma)
    if sorted(sig) != list(range(1, design.m + 1)):
        raise ValueError(f"sigma must be a permutation of 1..{design.m}, got {sig}")
    vectors = tuple(
        CodeVector(v.lam, tuple(v.xi[s - 1] for s in sig)) for v in design.vectors
    )
    if sig == tuple(range(1, design.m + 1)):
        return design
    return Design(
        m=design.m,
        vectors=vectors,
        groups=design.groups,
        name=design.name,
        provenance=design.provenance + ({"op": "permute", "sigma": list(sig)},),
        encoding_groups=design.encoding_groups,
    )


def construction_b(design: Design, l: int) -> Design:
    """Two-group lift that swaps half of each group across the pair.

    Requires a two-group input whose within-group sums all have even
    weight; the output satisfies the same condition, so the step chains.
    """
    if l not in (0, 1, 2):
        raise ValueError(f"l must be 0, 1 or 2, got {l}")
    _require_valid(design, "construction_b")
    _require_even_within(design, "construction_b")
    k = design.k
    w = _OMEGA_POW[l]
    vectors = tuple(_append(v, 0) for v in design.vectors) + tuple(
        _append(v, w) for v in design.vectors
    )
    g1, g2 = design.groups
    groups = (
        tuple(g1) + tuple(i + k for i in g2),
        tuple(g2) + tuple(i + k for i in g1),
    )
    return Design(
        m=design.m + 1,
        vectors=vectors,
        groups=groups,
        name=design.name + f"+B{l}" if design.name else f"B{l}",
        provenance=design.provenance + ({"op": "construction_b", "l": l},),
        encoding_groups=_copy_atoms(design.encoding_groups, k),
    )


#: the four column-permutation-inequivalent GF(4) assignments for
#: construction_c; the remaining two classes reduce to these.
C_MENU: Tuple[Tuple[int, int, int, int], ...] = (
    (0, 1, OMEGA, OMEGA2),
    (OMEGA, OMEGA2, 0, 1),
    (1, OMEGA2, 0, OMEGA),
    (OMEGA, 1, 0, OMEGA2),
)


def _xi_class(xi: Sequence[int]):
    return (frozenset(xi[:2]), frozenset(xi[2:]))


_MENU_CLASSES = {_xi_class(a) for a in C_MENU}


def construction_c(design: Design, xi: Sequence[int]) -> Design:
    """Two-group to four-group lift keyed by an assignment of all four
    GF(4) values.

    Requires the same even-within-group condition as construction_b.  Any
    of the 24 orderings is accepted here; the recursion below restricts to
    the four inequivalent ones.
    """
    xi = tuple(int(x) for x in xi)
    if sorted(xi) != [0, 1, OMEGA, OMEGA2]:
        raise ConstructionError(f"xi must be the four distinct GF(4) values, got {xi}")
    _require_valid(design, "construction_c")
    _require_even_within(design, "construction_c")
    g1, g2 = design.groups
    vec1 = tuple(design.vectors[i - 1] for i in g1)
    vec2 = tuple(design.vectors[i - 1] for i in g2)
    vectors = (
        tuple(_append(v, xi[0]) for v in vec1)
        + tuple(_append(v, xi[1]) for v in vec1)
        + tuple(_append(v, xi[2], flip=True) for v in vec2)
        + tuple(_append(v, xi[3], flip=True) for v in vec2)
    )
    sizes = (len(vec1), len(vec1), len(vec2), len(vec2))
    groups = []
    start = 1
    for s in sizes:
        groups.append(tuple(range(start, start + s)))
        start += s
    return Design(
        m=design.m + 1,
        vectors=vectors,
        groups=tuple(groups),
        name=design.name + "+C" if design.name else "C",
        provenance=design.provenance + ({"op": "construction_c", "xi": list(xi)},),
    )


@dataclass(frozen=True)
class StepSpec:
    """One recursion step: kind A (group doubling), B-prop-C1 (two-group
    interleave) or C (four-group split), with an optional coordinate
    permutation applied afterwards."""

    kind: str
    l: int = 0
    xi: Optional[Tuple[int, int, int, int]] = None
    sigma: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        if self.kind not in ("A", "B-prop-C1", "C"):
            raise ValueError(f"unknown step kind {self.kind!r}")


def four_group_recursive(k: int, steps: Sequence[StepSpec]) -> Design:
    """Grow the one-antenna seed into a four-group rate-1 design for 2^k
    antennas: k-1 doubling/interleave steps, then one four-group split.

    The final step's assignment must come from the menu of four
    inequivalent classes; the two redundant classes are rejected since
    column permutation plus relabeling reduces them to menu entries.
    """
    steps = tuple(steps)
    if k < 1 or len(steps) != k:
        raise ValueError(f"need exactly k={k} steps, got {len(steps)}")
    if any(s.kind == "C" for s in steps[:-1]) or steps[-1].kind != "C":
        raise ValueError("steps must be k-1 A/B-prop-C1 entries followed by one C entry")
    d = trivial_design()
    for step in steps:
        if step.kind == "A":
            d = construction_a(d, step.l)
        elif step.kind == "B-prop-C1":
            d = construction_b(d, step.l)
        else:
            if _xi_class(step.xi) not in _MENU_CLASSES:
                raise ConstructionError(
                    f"assignment {step.xi} is column-permutation equivalent to a menu "
                    f"entry; use one of {C_MENU}"
                )
            d = construction_c(d, step.xi)
        if step.sigma is not None:
            d = permute(d, step.sigma)
    return d.with_name(f"four_group_2^{k}")


def g_group(g: int, a: int) -> Design:
    """Design with g groups of 2^a symbols each; rate g / 2^floor((g+1)/2).

    Even g starts from the square orthogonal design with g singleton
    groups and doubles the groups a times; odd g builds the g+1 version
    and drops the last group.
    """
    if g < 2 or a < 0:
        raise ValueError(f"need g >= 2 and a >= 0, got g={g}, a={a}")
    if g % 2 == 0:
        d = square_od(g // 2 - 1)
        for _ in range(a):
            d = construction_a(d, 0)
        return d.with_name(f"g{g}_a{a}")
    d = g_group(g + 1, a)
    keep = [i for grp in d.groups[:-1] for i in grp]
    from .design import subdesign

    return subdesign(d, keep, name=f"g{g}_a{a}")


# ---------------------------------------------------------------------------
# the fast-group-decodable family and named fast-decodable codes


def _structure_hint(node) -> dict:
    return {"op": "structure_hint", "tree": node}


def fgd_design(
    m: int,
    target_rate: Fraction,
    xi1: int = 1,
    xi2: int = OMEGA,
    extension_policy: str = "canonical",
    seed: int = 0,
) -> Design:
    """Fast-group-decodable family for 2^m antennas, rates 1 <= R <= 2^m.

    The rate-5/4 core is a subgroup of even-weight vectors plus four of
    its cosets; higher rates append an extension set, lower rates puncture
    the phase-flip coset.  Decoding groups are the connected components of
    the orthogonality-conflict graph (the extension set may weld the two
    core groups together for R > 5/4).
    """
    r = Fraction(target_rate)
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if xi1 == xi2 or xi1 not in (1, OMEGA, OMEGA2) or xi2 not in (1, OMEGA, OMEGA2):
        raise ValueError("xi1, xi2 must be distinct nonzero GF(4) values")
    if not 1 <= r <= 2**m:
        raise ValueError(f"rate must be in [1, {2**m}], got {r}")
    k_target = 2 ** (m + 1) * r
    if k_target.denominator != 1:
        raise ValueError(f"rate {r} gives a non-integer symbol count for m={m}")
    k_target = int(k_target)

    cell = [
        CodeVector(0, tuple(xi1 if (bits >> (m - 1 - i)) & 1 else 0 for i in range(m)))
        for bits in range(2**m)
    ]
    base = [v for v in cell if weight(v) % 2 == 0]
    last = [v for v in cell if weight(v) % 2 == 1]
    tr = fgd_translates(m, xi1, xi2)
    mixed = [add(tr.mixed, v) for v in base]
    mixed_last = [add(tr.mixed, v) for v in last]
    flip = [add(tr.lam_flip, v) for v in base]

    order = lambda vs: sorted(vs, key=lambda v: v.canonical_index())
    base, last, mixed, mixed_last, flip = map(order, (base, last, mixed, mixed_last, flip))

    k_core = 5 * 2 ** (m - 1)
    extension: List[CodeVector] = []
    if k_target < k_core:
        n_rm = k_core - k_target
        if n_rm > len(flip):
            raise ValueError(f"rate {r} would puncture more than the flip coset")
        flip = flip[: len(flip) - n_rm]
    elif k_target > k_core:
        used = set(base + last + mixed + mixed_last + flip)
        pool = [v for v in enumerate_labels(m) if v not in used]
        need = k_target - k_core
        if need > len(pool):
            raise ValueError(f"rate {r} needs {need} extension vectors, only {len(pool)} exist")
        if extension_policy == "canonical":
            extension = pool[:need]
        elif extension_policy == "random":
            rng = np.random.default_rng(seed)
            picks = rng.choice(len(pool), size=need, replace=False)
            extension = [pool[i] for i in sorted(picks)]
        else:
            raise ValueError(f"unknown extension policy {extension_policy!r}")

    vectors = tuple(base + last + mixed + mixed_last + flip + extension)
    from .decodability import conflict_components

    groups = conflict_components(vectors)
    rate_tag = str(r.numerator) if r.denominator == 1 else f"{r.numerator}-{r.denominator}"

    subsets = {}
    start = 1
    for name_, block in (
        ("base", base),
        ("last", last),
        ("mixed", mixed),
        ("mixed_last", mixed_last),
        ("flip", flip),
        ("extension", extension),
    ):
        subsets[name_] = list(range(start, start + len(block)))
        start += len(block)

    inner = {
        "partition": [
            {"leaf": subsets["last"]},
            {"leaf": subsets["mixed"]},
            {"leaf": subsets["mixed_last"]},
        ]
    }
    if subsets["flip"]:
        inner = {"conditioned": subsets["flip"], "child": inner}
    core_node = {"partition": [{"leaf": subsets["base"]}, inner]}
    tree = {"conditioned": subsets["extension"], "child": core_node} if extension else core_node

    return Design(
        m=m,
        vectors=vectors,
        groups=groups,
        name=f"fgd_m{m}_r{rate_tag}",
        provenance=(
            {
                "op": "fgd_design",
                "m": m,
                "rate": f"{r.numerator}/{r.denominator}",
                "xi1": xi1,
                "xi2": xi2,
                "extension_policy": extension_policy,
                "subsets": subsets,
            },
            _structure_hint(tree),
        ),
    )


def fgd_17_8() -> Design:
    """Rate-17/8 fast-group-decodable design for 4 antennas.

    One group is the zero vector alone; the other is all 16 odd-weight
    vectors, five of which (the odd singles of the square orthogonal
    design) stay mutually orthogonal and decode one-by-one once the other
    eleven are conditioned.
    """
    zero_v = CodeVector(0, (0, 0))
    odd = [v for v in enumerate_labels(2) if weight(v) % 2 == 1]
    odd.sort(key=lambda v: v.canonical_index())
    vectors = (zero_v, *odd)
    od = square_od(2)
    ortho_five = {v for v in od.vectors if weight(v) % 2 == 1}
    five_idx = [i + 1 for i, v in enumerate(vectors) if v in ortho_five]
    rest_idx = [
        i + 1 for i, v in enumerate(vectors) if i > 0 and v not in ortho_five
    ]
    tree = {
        "partition": [
            {"leaf": [1]},
            {
                "conditioned": rest_idx,
                "child": {"partition": [{"leaf": [i]} for i in five_idx]},
            },
        ]
    }
    return Design(
        m=2,
        vectors=vectors,
        groups=((1,), tuple(range(2, 18))),
        name="fgd_17_8",
        provenance=(
            {"op": "fgd_17_8", "orthogonal_five": five_idx},
            _structure_hint(tree),
        ),
    )


def pavan_rate2_2x2() -> Design:
    """Rate-2 fast-decodable 2x2 code using all eight basis labels.

    Encoded in three groups; conditioning the third leaves two
    independently decodable pairs.  The full symbol set admits no
    nontrivial orthogonal partition, so the decoding partition is the
    single group.
    """
    w, W = OMEGA, OMEGA2
    vectors = tuple(
        CodeVector(lam, (x,))
        for lam, x in ((0, 0), (1, w), (1, 0), (0, w), (1, 1), (0, W), (0, 1), (1, W))
    )
    tree = {
        "conditioned": [5, 6, 7, 8],
        "child": {"partition": [{"leaf": [1, 2]}, {"leaf": [3, 4]}]},
    }
    return Design(
        m=1,
        vectors=vectors,
        groups=(tuple(range(1, 9)),),
        name="pavan_rate2_2x2",
        provenance=({"op": "pavan_rate2_2x2"}, _structure_hint(tree)),
        encoding_groups=((1, 2), (3, 4), (5, 6, 7, 8)),
    )


def htw_pga() -> Design:
    """Rate-2 fast-decodable 2x2 code (the overlapped-orthogonal form).

    Same eight labels as pavan_rate2_2x2 in the in-phase/quadrature
    symbol order of its standard presentation.
    """
    w, W = OMEGA, OMEGA2
    vectors = tuple(
        CodeVector(lam, (x,))
        for lam, x in ((0, 0), (0, w), (0, W), (0, 1), (1, w), (1, 0), (1, 1), (1, W))
    )
    tree = {
        "conditioned": [5, 6, 7, 8],
        "child": {"partition": [{"leaf": [1, 2]}, {"leaf": [3, 4]}]},
    }
    return Design(
        m=1,
        vectors=vectors,
        groups=(tuple(range(1, 9)),),
        name="htw_pga",
        provenance=({"op": "htw_pga"}, _structure_hint(tree)),
        encoding_groups=((1, 2), (3, 4), (5, 6, 7, 8)),
    )


# ---------------------------------------------------------------------------
# registry


def catalog() -> Dict[str, Design]:
    """All named designs, keyed by their catalog names."""
    entries = [
        trivial_design(),
        alamouti(),
        two_by_two(0),
        two_by_two(1),
        two_by_two(2),
        quasi_orthogonal_4x4(),
        square_od(1),
        square_od(2),
        square_od(3),
        fgd_17_8(),
        pavan_rate2_2x2(),
        htw_pga(),
        fgd_design(2, Fraction(5, 4)),
        fgd_design(2, Fraction(2)),
    ]
    return {d.name: d for d in entries}


def generate(recipe: dict) -> Design:
    """Build a design from a recipe mapping; see the README for the schema."""
    if not isinstance(recipe, dict) or "construction" not in recipe:
        raise ValueError("recipe must be a mapping with a 'construction' key")
    kind = recipe["construction"]
    params = recipe.get("params", {})
    if kind in catalog():
        return catalog()[kind]
    if kind == "two_by_two":
        return two_by_two(int(params["l"]))
    if kind == "square_od":
        return square_od(int(params["m"]))
    if kind == "g_group":
        return g_group(int(params["g"]), int(params["a"]))
    if kind == "four_group_recursive":
        steps = [
            StepSpec(
                kind=s["kind"],
                l=int(s.get("l", 0)),
                xi=tuple(s["xi"]) if "xi" in s else None,
                sigma=tuple(s["sigma"]) if "sigma" in s else None,
            )
            for s in params["steps"]
        ]
        return four_group_recursive(int(params["k"]), steps)
    if kind == "fgd":
        num, _, den = str(params["rate"]).partition("/")
        r = Fraction(int(num), int(den) if den else 1)
        return fgd_design(
            int(params["m"]),
            r,
            xi1=int(params.get("xi1", 1)),
            xi2=int(params.get("xi2", OMEGA)),
            extension_policy=params.get("extension_policy", "canonical"),
            seed=int(params.get("seed", 0)),
        )
    raise ValueError(f"unknown construction {kind!r}")
