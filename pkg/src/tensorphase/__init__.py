"""Phases of even-order square tensors under the Einstein product, and
small phase stability certificates for multilinear (MLTI) feedback systems."""

from .errors import *  # noqa: F401,F403
from .tensor import (
    DenseTensor, Shape, ivec, unfold, fold, einstein_product, conj_transpose, zeros,
    identity, diagonal, diagonal_entries, is_diagonal, coordinate, inverse, eigenvalues,
    determinant, rank, frobenius_inner, frobenius_norm, qr, polar,
)
from .phase import (
    Sectoriality, SectorialityReport, PhaseVector, SectorialDecomposition,
    NumericalRangeBoundary, classify, phases, sectorial_decomposition, phase_witness,
    field_angle, nr_boundary, wrap_to_pi,
)
from .blocks import (
    PermutationMap, block_row, block_col, block_2x2, perfect_shuffle,
    block_unfold_permutation, block_embedding_permutation,
)
from .analysis import (
    CheckReport, ConeSpec, compress, check_interlacing, sum_phase_extremes_check,
    compound_spectrum, compound_membership_witness, quotient_containment_check,
    product_containment_check, majorization_check, cone_closure_check,
    rank_robustness_threshold, worst_case_B, random_cone_member, quasi_phases,
    quasi_blocked_decomposition, quasi_inequality_check,
)
from .control import (
    MltiSystem, FrequencyGrid, StabilityReport, transfer_at, hinf_norm,
    freq_phase_profile, small_phase_check, small_gain_check, gang_of_four,
    closed_loop_oracle, cone_condition_check, random_stable_system,
)
from .fixtures import (
    random_tensor, random_column_orthogonal, random_nonsingular, random_sectorial,
    sectorial_from_angles, example1, example2,
)

__version__ = "0.1.0"
