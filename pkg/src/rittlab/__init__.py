"""Finite-dimensional checks of admissibility criteria for Ritt operators."""

from .admissibility import (
    AdmissibilityReport,
    admissibility_constant,
    admissibility_norm,
    automatic_weiss_check,
    geometric_weight_bound,
    series_identity_check,
    square_function_constant,
    square_function_equivalence,
    square_function_norm,
    verify_weiss_theorem,
    weiss_constant,
)
from .calculus import frac_power, frac_power_contour, frac_power_eigen, phi_theta
from .errors import RittLabError
from .linalg import (
    NormedSpace,
    ObservationSpec,
    OperatorSpec,
    mean_ergodic_decompose,
    op_norm,
    resolvent,
    spectrum,
)
from .rademacher import (
    RademacherEstimate,
    lq_square_function,
    r_admissibility_constant,
    r_bound_estimate,
    r_ritt_check,
    r_square_function_constant,
    rad_norm,
    sf_Ta,
)
from .ritt import certify_ritt, power_bound, resolvent_constant, ritt_constant, sector_type

__version__ = "0.1.0"
