"""Endomorphisms of Cuntz algebras from permutation and matrix-level data."""

from .words import (
    Perm,
    EndoHandle,
    rank,
    unrank,
    word_str,
    parse_word,
    embed_perm,
    shift_perm,
    chain_product,
    convolve,
    all_perms,
)
from .trees import (
    LetterMap,
    TreeDiagram,
    PairGraph,
    letter_maps,
    is_rooted_tree,
    in_degree_type,
    condition_b,
    condition_d,
    analyze_perm,
    export_dot,
)
from .algebra import (
    MatrixElement,
    WordSum,
    perm_to_matrix,
    canonical_shift,
    left_inverse,
    normalized_trace,
    chain_product_matrix,
    is_in_level,
    apply_endo,
    apply_endo_matrix,
    alg_equal,
    shift_wordsum,
    is_permutative,
)
from .analysis import (
    QuotientMapFamily,
    SubspaceChain,
    quotient_map_family,
    is_nilpotent,
    subspace_chain,
    localized_inverse,
    find_inverse,
    verify_inverse_pair,
    is_involution,
    invertibility_equation,
    ybe_check,
    relative_commutant,
    preserves_diagonal,
    diagonal_shift_criterion,
    diagonal_image_is_diagonal,
    InternalCheckError,
)
from .weyl import CylinderMap, restrict_to_diag, ad_perm, eventually_commutes, ad_shift_identity
from .classify import (
    SweepSpec,
    SweepResult,
    run_sweep,
    count_table,
    order_of,
    bogolubov_reduce,
    perm_at_index,
    CapExceeded,
    CheckpointMismatch,
    OrderCapError,
    LevelCapError,
)

__version__ = "0.1.0"
