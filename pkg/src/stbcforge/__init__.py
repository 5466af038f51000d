"""Toolkit for low-ML-complexity space-time block code designs.

Designs carry labels over GF(2) x GF(4)^m; each label materializes into
an exact signed-permutation weight matrix via Kronecker products of the
2x2 generators.  Modules: ``f4`` (label arithmetic), ``pauli`` (exact
matrices), ``design`` (the design value and JSON format),
``constructions`` (the catalog and recursive builders), ``decodability``
(structure discovery and cost accounting), ``diversity`` (full-diversity
certificates and constellation construction), ``simulator`` (QR structure
and decode counting), ``cli`` (the ``forge`` command).
"""

from .f4 import CodeVector, add, enumerate_labels, hr_orthogonal, weight
from .pauli import (
    GaussMatrix,
    NotInBasisError,
    clifford_generators,
    hr_orthogonal_matrix,
    is_hermitian,
    label_from_matrix,
    matrix_from_label,
    verify_basis,
)
from .design import (
    Design,
    DesignSemanticError,
    DesignSyntaxError,
    materialize,
    parse,
    rate,
    serialize,
    subdesign,
    validate_g_group,
    weight_matrices,
)
from .constructions import (
    StepSpec,
    alamouti,
    catalog,
    construction_a,
    construction_b,
    construction_c,
    fgd_17_8,
    fgd_design,
    four_group_recursive,
    g_group,
    htw_pga,
    pavan_rate2_2x2,
    permute,
    quasi_orthogonal_4x4,
    square_od,
    trivial_design,
    two_by_two,
)
from .decodability import (
    DecodabilityReport,
    analyze,
    complexity_exponent,
    fd_search,
    fd_structure,
    finest_partition,
    table1,
)
from .diversity import (
    Constellation,
    build_constellations,
    regular_pam_assignment,
    verify_full_diversity,
)
from .simulator import decode_count, real_equivalent, verify_r_structure

__version__ = "0.1.0"
