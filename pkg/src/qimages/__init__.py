"""Symmetrized system-detector states, conjugate quantum images and collapse walks."""

__version__ = "0.1.0"

from .collapse_walk import (
    CollapseOutcome,
    LatticeWalkState,
    Rounding,
    SimplexPoint,
    WalkConfig,
    absorption_oracle,
    discretize,
    expected_duration_oracle,
    run_collapse,
    step,
)
from .detector_imaging import (
    BoundState,
    DetectorSea,
    ExchangeDecomposition,
    ImageState,
    antisymmetrize_fermion,
    born_weights,
    build_sea,
    combine_unsymmetrized,
    decompose_exchange,
    extract_image,
    fermion_effective_product,
    form_bound_state,
    hole_reduce,
    no_cloning_witness,
    symmetrize_boson,
)
from .ensemble import (
    EnsembleConfig,
    EnsembleStats,
    chi_square_gof,
    export,
    run_ensemble,
)
from .estimators import BornRuleTransformer, CollapseSampler
from .state_algebra import (
    BasisLabel,
    CompositeState,
    PureState,
    Slot,
    Statistics,
    conjugate_state,
    exchange_term_norm,
    inner_product,
    permutation_sign,
    symmetrize_pair,
)

__all__ = [name for name in dir() if not name.startswith("_")]
