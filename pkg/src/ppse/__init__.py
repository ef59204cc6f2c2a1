"""Pre- and post-selected quantum ensembles with an explicit measuring apparatus."""

from .apparatus import Eigenstructure, IntermediateModel, Mode, gamma_set, interaction_operator
from .ensemble import (
    Experiment,
    PPSEDensity,
    SelectionEvent,
    closed_form_for,
    density_for,
    oracle_prob,
    outcome_prob,
    ppse_density,
    prob_closed_form,
    run_pipeline,
    three_box,
    two_state_vectors,
)
from .errors import PPSEError
from .linalg import AntiunitaryOp, HilbertSpace, Operator, SpectralData, StateVector
from .timesym import (
    ProcessTag,
    TimeSymReport,
    appendix_a,
    appendix_b,
    check_motion_reversal,
    process_weights,
    reset_variant,
    reverse_ppse,
)

__all__ = [
    "AntiunitaryOp",
    "Eigenstructure",
    "Experiment",
    "HilbertSpace",
    "IntermediateModel",
    "Mode",
    "Operator",
    "PPSEDensity",
    "PPSEError",
    "ProcessTag",
    "SelectionEvent",
    "SpectralData",
    "StateVector",
    "TimeSymReport",
    "appendix_a",
    "appendix_b",
    "check_motion_reversal",
    "closed_form_for",
    "density_for",
    "gamma_set",
    "interaction_operator",
    "oracle_prob",
    "outcome_prob",
    "ppse_density",
    "prob_closed_form",
    "process_weights",
    "reset_variant",
    "reverse_ppse",
    "run_pipeline",
    "three_box",
    "two_state_vectors",
]
