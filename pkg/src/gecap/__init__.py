"""Capacities of trace-decreasing quantum operations and generalized erasure channels."""

from .capacity import (
    BoundsReport,
    Ensemble,
    bias_lower_bound,
    classical_bounds,
    coherent_information,
    f_lower_bound,
    holevo_capacity,
    holevo_quantity,
    q1,
    quantum_bounds,
)
from .erasure import (
    ErasureChannel,
    closed_form_complementary,
    complementary,
    generalized_erasure,
    is_antidegradable_rank1,
    is_degradable_rank1,
)
from .exceptions import GecapError, InvalidOperationError, NumericalFailure
from .operations import (
    Classification,
    KrausMap,
    bias,
    choi_matrix,
    compose,
    detection_range,
    minimal_extension,
    pdl_operation,
    phase_covariant_operation,
    phi_lambda,
    recover_channel_factor,
    validate,
)
from .pdl import scan_grid, solve_q1_pdl, superadditivity_report, two_letter_q1

__all__ = [name for name in dir() if not name.startswith("_")]
