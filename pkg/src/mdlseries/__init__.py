"""Multiple Dirichlet L-series: integral representation, series oracles and CLI."""

from .characters import (
    BoundedSequence,
    DirichletCharacter,
    alternating_sequence,
    character_sequence,
    custom_sequence,
    enumerate_characters,
    load_periodic_sequence,
    make_character,
    partial_sum,
    partial_sum_bound,
    periodic_sequence,
)
from .compositions import CompositionTerm, coefficient, enumerate_compositions
from .errors import BudgetError, RegionError
from .integrator import (
    EvaluationResult,
    TruncationPlan,
    UnsupportedRankError,
    evaluate_integral,
    integrate_cells,
    tail_bound,
)
from .kernel import SPoint, in_domain_D, in_domain_D0, kernel_eval, lemma1_lhs, lemma1_rhs, pochhammer
from .oracle import SummationReport, evaluate_direct, evaluate_iterated_abel, partial_sum_trajectory

__version__ = "0.1.0"
