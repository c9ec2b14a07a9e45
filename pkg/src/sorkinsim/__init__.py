"""Sorkin interference hierarchy: multi-slit measures, non-Born recipes and signaling tests."""

from .qlinalg import (
    discrete_fourier_unitary,
    hadamard_qubit,
    partial_trace,
    povm_marginal_invariance,
    tensor_product,
    trace_distance,
)
from .recipes import Born, RecipeOutOfRange, SorkinDeformed, apply_recipe, validate_recipe
from .scenarios import (
    BipartiteState,
    PartitionSpec,
    a2b_signaling,
    b2a_signaling,
    build_sorkin_state,
    conditional_ensemble,
    contextuality_probe,
    hjw_equivalent,
    nonborn_screen_marginals,
    redistribution_check,
    screen_decomposition,
)
from .slits import DetectionDistribution, SlitField, SlitMask, born_distribution, field_from_dft, subset_probability
from .sorkin import InterferenceReport, interference_naive, interference_spectrum_fast, sum_rule_report

__version__ = "0.1.0"
