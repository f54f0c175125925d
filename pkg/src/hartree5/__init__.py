"""Radial spectral lab for the focusing Hartree equation

    i u_t + Delta u = -(|x|^-3 * |u|^2) u,   x in R^5,

with radial data: transforms, functionals, ground states, a split-step
solver and compactness diagnostics.
"""

from .diagnostics import (
    CompactnessReport,
    DispersiveFit,
    bernstein_suite,
    compactness_report,
    dispersive_fit,
    frequency_scale,
)
from .errors import (
    CollapseToZero,
    ComplexDensity,
    ConfigError,
    DegenerateDenominator,
    GridMismatch,
    GridTooSmall,
    HartreeError,
    InsufficientSamples,
    NoConvergence,
    NonFinite,
    QuadratureBudgetExceeded,
    RangeError,
    TailWarning,
)
from .evolution import (
    EvolutionResult,
    MonitorRecord,
    SolverConfig,
    Verdict,
    adaptive_dt,
    evolve,
    scattering_diagnostic,
    strang_step,
)
from .functionals import (
    VirialBreakdown,
    energy,
    hartree_energy,
    hls_ratio,
    localized_mass,
    lp_norm,
    radial_decay_ratio,
    sobolev_norm,
    strichartz_density,
    virial_m_a,
    virial_rate,
    weinstein,
    x_density,
)
from .ground_state import (
    GroundStateResult,
    SolverOptions,
    Variant,
    el_residual,
    solve_ground_state,
    solve_soliton_profile,
    thresholds,
)
from .spectral_radial import (
    RIESZ_CONSTANT,
    SIGMA4,
    LPKind,
    RadialField,
    RadialGrid,
    Side,
    ab_rescale,
    fractional_derivative,
    free_propagate,
    gaussian,
    hankel_transform,
    hartree_convolution,
    load_field,
    lp_project,
    radial_derivative,
    save_field,
)

__version__ = "0.1.0"
