"""Reduce literal-weighted model counting to unweighted projected model counting."""
from .chain import ChainFormula, build_chain, guarded_cnf
from .count import (
    CountResult,
    CounterProfile,
    dpll_sat,
    exact_projected_count,
    exact_weighted_count,
    external_count,
    integrate,
)
from .formula import WeightedFormula, emit, normalize, parse
from .rational import (
    FareyPair,
    bits_required,
    is_mbit_fraction,
    mediant,
    nearest_mbit_fraction,
    parse_weight,
)
from .reduce import (
    UNBOUNDED,
    Reduction,
    budget_reduce,
    combined_error,
    deweight_reduce,
    dyadic_adjust,
    farey_adjust,
)

__version__ = "0.1.0"
