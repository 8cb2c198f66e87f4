"""CHSH Bell-inequality violation of two-photon polarization states under
simultaneous white and colored noise."""

__version__ = "0.1.0"

from .chsh import (
    TSIRELSON,
    BellSettings,
    MeasurementAngles,
    bell_value_trace,
    beta_c_closed,
    beta_cw_closed,
    beta_w_closed,
    observables,
)
from .fit import (
    ExperimentPoint,
    FitResult,
    NoNoiseError,
    OutOfRangeError,
    fit_batch,
    fit_r,
    fixed_white_curve,
    noise_split,
)
from .optimize import (
    Constraint,
    CurveResult,
    NoSignChangeError,
    Optimum,
    ScanResult,
    brute_force_planar_max,
    curve,
    horodecki_max,
    maximize_beta,
    phi_eliminate,
    scan,
    threshold_p,
)
from .qstate import (
    Basis,
    BellKind,
    NoiseParams,
    ValidationReport,
    bell_projector,
    bell_state,
    colored,
    colored_white,
    correlation_matrix,
    density_from_pure,
    expectation,
    kron,
    pauli,
    validate,
    werner,
)
