"""Exact inference of preferences, demand and equilibria from finite market data."""

from .errors import (
    ConfigError,
    DimensionMismatch,
    ExactInferError,
    IndifferentQuery,
    InvalidBox,
    MalformedDataset,
    NoConvergence,
    NonPositiveBundle,
    NumericalFailure,
    UnsupportedDimensions,
)
from .feasibility import (
    Box,
    BoxStatus,
    Classification,
    LinearSystem,
    LPResult,
    LPStatus,
    Region,
    branch_and_bound_cover,
    fourier_motzkin_eliminate,
    lp_solve,
)
from .prefs import PreferenceSpec, PrefOrdering, demand, demand_many, prefers, utility
from .revealed import (
    ChoiceData,
    ChoiceInference,
    RevealedGraph,
    SarpResult,
    binary_choice_infer,
    check_sarp,
    detection_index,
    revealed_chain,
    revealed_demand_bounds,
    strictly_revealed_preferred,
)
from .sequences import (
    DemandObservation,
    EconomyObservation,
    Generator,
    SequenceConfig,
    gen_demand_dataset,
    gen_economy_dataset,
    gen_prices,
    read_dataset,
    write_dataset,
)

__version__ = "0.1.0"
