"""Phase retrieval of finite-duration signals in shift-invariant spaces from
phaseless samples, via the MEPS algorithm (minimization, extension, phase
adjustment, sewing)."""
from .errors import (
    EmptySignalError,
    InvalidArgumentError,
    InvalidSchemeError,
    SchemeDegenerateError,
    SiphaseError,
)
from .generator import (
    Generator,
    PhiMatrix,
    bspline_eval,
    build_phi_matrix,
    generator_eval,
    is_full_spark,
    phi_n_inverse_norm,
    submatrix_min_singular_values,
)
from .harness import (
    CellResult,
    ExperimentSpec,
    interior_error,
    max_reconstruction_error,
    max_squared_error,
    random_signal,
    run_experiment,
    run_scaling_experiment,
)
from .linear_spline import interval_magnitudes, linear_spline_oracle
from .meps import (
    BlockEstimate,
    MEPSConfig,
    Reconstruction,
    adjust_phases,
    extend_backward_step,
    extend_forward_step,
    h1,
    h1_star,
    h2,
    h2_star,
    local_minimize,
    meps_reconstruct,
    sew,
    sew_index,
)
from .sampling import (
    NoisySamples,
    SampleLocations,
    SamplingScheme,
    build_YL,
    sampling_rate,
    take_phaseless_samples,
    validate_scheme,
)
from .signals import (
    SISSignal,
    StabilityReport,
    compute_stability_report,
    evaluate,
    is_nonseparable,
    max_energy_ratio,
    separability_gap,
    support_bounds,
    window_energies,
)

__version__ = "0.1.0"
