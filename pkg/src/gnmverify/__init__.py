"""Shallow-circuit verification of group non-membership, simulated exactly.

The package bundles finite group arithmetic over explicit tables, a
nearly uniform subgroup sampler, an exact register simulator for the
interference core circuit, three protocol evaluation engines (Monte
Carlo, exact enumeration, and acceptance-operator eigensolving), and the
closed-form completeness and soundness bounds, together with a CLI that
emits CSV/JSON reports and matching figures.
"""

__version__ = "0.1.0"

from .analysis import (
    BoundReport,
    GapResult,
    OmaxInstance,
    gap_optimize,
    k_factor,
    klein_soundness_bound,
    main_text_pass_bound,
    omax_bruteforce,
    omax_closed_form,
    pass_soundness_bound,
    reserved_pass_bound,
    soundness_bound,
)
from .errors import (
    ConstraintProjectionFailure,
    DegenerateDenominator,
    EmptyRange,
    IdentityOrder,
    InfeasibleInstance,
    NotAGroup,
    StrategyDimensionMismatch,
    TooLargeForExact,
    ZeroPassProbability,
)
from .groups import (
    FiniteGroup,
    Subgroup,
    build_cyclic,
    build_from_table,
    build_klein,
    bundled_group,
    element_order,
    group_from_permutations,
    load_group_file,
    subgroup_closure,
)
from .protocol import (
    AcceptOperator,
    ArbitraryJoint,
    BasisBogus,
    HonestCoset,
    MonteCarloResult,
    OptimalAdversary,
    ProductJoint,
    ProtocolConfig,
    ProverStrategy,
    PureBogus,
    TrialRecord,
    build_accept_operator,
    exact_accept_probability,
    monte_carlo,
    optimal_cheat_probability,
    reserved_register_statistics,
    rsi,
    test_channel,
    verify_gnm,
)
from .qsim import (
    CoreOutcome,
    DensityState,
    NoiseSpec,
    PureState,
    apply_noise,
    core_circuit,
    core_probability_closed_form,
    coset_proof_state,
    right_mult_unitary,
    span_check,
)
from .sampling import (
    SamplerKind,
    SamplerSpec,
    babai_sample,
    calibrate_subproduct_length,
    exact_uniform_sample,
    sampler_distribution,
)
