"""Finite constructive extensions of partial injections with orbit-parity coding.

The package builds finite approximations to a permutation of the naturals,
one scheduled requirement at a time, while a set of tracked words keeps their
fixed points frozen; bit strings are written into, and read back out of, the
parities of closed-orbit sizes.  Every extension step carries a certificate
that re-verifies from serialized data alone.
"""

from .engine import (
    CONVENTIONS,
    DomainHits,
    OrbitCoded,
    RangeHits,
    Requirement,
    RunStep,
    RunTrace,
    TreeDiagonalized,
    WordAdded,
    auto_schedule,
    decode,
    default_stage_schedule,
    run,
    seal,
    staged_run,
    trace_to_data,
    verify_tightness_sample,
    verify_trace_data,
)
from .errors import (
    EngineError,
    InternalCheckFailed,
    KTooSmall,
    NotNiceInjection,
    NotNiceWord,
    OrbitCodeError,
    PreconditionViolated,
    PrefixTooShort,
    StageExtensionFailed,
    TreeRefusedExtension,
    UnknownGroupElement,
    WindowTooSmall,
)
from .forcing import (
    CheckResult,
    Condition,
    ExtensionCertificate,
    Flavor,
    Refusal,
    add_word,
    avoidance_bound,
    close_all_orbits,
    close_orbit,
    closing_threshold,
    code_next_orbit,
    coding_condition,
    condition_from_data,
    condition_to_data,
    certificate_to_data,
    dagger_condition,
    extend_domain,
    extend_range,
    leq,
    many_extensions,
    plain_condition,
    strong_close_orbit,
    support_bound,
    tree_extend,
    validate,
    verify_certificate_data,
)
from .injections import (
    Orbit,
    PartialInjection,
    closed_orbits,
    codes_up_to,
    fixed_points,
    injection_from_pairs,
    is_nice_injection,
    mex,
    nth_prime,
    o_dagger,
    o_partial,
    open_orbits,
    orbit_decomposition,
    orbit_of,
    prime_index,
    word_graph,
)
from .oracle import (
    CompletedStage,
    FixedPointReport,
    GroupOracle,
    StagedOracle,
    TranslationOracle,
    TrivialOracle,
    oracle_from_descriptor,
    stage_from_data,
    stage_to_data,
    staged_oracle,
    translation_oracle,
    trivial_oracle,
    zigzag_decode,
    zigzag_encode,
)
from .trees import (
    ExplicitTree,
    FullInjectiveTree,
    InjectiveTree,
    SparseCongruenceTree,
    densely_diagonalizes,
    diagonalization_witness,
    is_positive_explicit,
    tree_from_descriptor,
    truncate_to_explicit,
)
from .words import (
    IDENTITY_WORD,
    Letter,
    LetterKind,
    Word,
    X,
    X_INV,
    concat,
    cyclic_conjugates_and_inverses,
    evaluate,
    format_word,
    graph_restriction,
    group,
    indecomposable_root,
    inverse_word,
    is_nice,
    nice_blocks,
    occurrence_class,
    parse_word,
    power,
    reduce,
    x_power,
)

__version__ = "0.1.0"
