"""Renewal Hawkes process: cluster and intensity representations that agree.

A renewal Hawkes process replaces the Poisson immigrant stream of the
classical Hawkes process with a renewal process: the baseline intensity is
the interarrival hazard evaluated at the time since the last immigrant,
mu(t - T_last), plus the usual excitation sum over past events.  The package
implements the process twice, as a Poisson-cluster/branching construction
and by intensity thinning, and ships the statistical harness that checks
the two representations agree in law.
"""

from .cluster import (
    ClusterTree,
    cluster_size_pmf,
    generation_counts,
    mean_cluster_size,
    simulate_cluster,
    total_progeny_mean_se,
)
from .config import (
    RunConfig,
    build_kernel,
    build_model,
    config_hash,
    parse_config,
    serialize_config,
)
from .distributions import (
    ExcitationKernel,
    Exponential,
    ExponentialKernel,
    Gamma,
    Lognormal,
    RenewalModel,
    Tabulated,
    TabulatedKernel,
    Weibull,
    hazard_at,
    kernel_mass,
    sample_interarrival,
    sample_offspring_displacement,
)
from .errors import (
    ClusterOverflowError,
    ConfigError,
    ConvergenceError,
    DefectiveModelError,
    DegenerateKernelError,
    InsufficientDataError,
    RhpError,
    SubcriticalityError,
    SupportError,
    TieError,
    UnboundedHazardError,
)
from .events import Convention, EventRecord, EventStream, assemble_stream
from .pgfl import (
    McEstimate,
    PgflSolution,
    StationaryPgflResult,
    TestFunction,
    TruncatedPgflResult,
    hawkes_oakes_pgfl,
    mc_pgfl_cluster,
    mc_pgfl_process,
    renewal_pgfl_truncated,
    solve_cluster_pgfl,
    stationary_pgfl_expansion,
)
from .renewal import (
    RenewalTable,
    convolution_cdfs,
    renewal_table,
    simulate_delayed_renewal,
    simulate_renewal,
    stationary_delay,
)
from .seeding import substream
from .simulate import (
    MissingReferenceError,
    compensator,
    compensator_at_events,
    intensity_path,
    martingale_residuals,
    simulate_rhp_cluster,
    simulate_rhp_stationary,
    simulate_rhp_thinning,
)
from .validate import (
    DiagnosticsReport,
    cross_simulator_test,
    existence_preconditions,
    stationarity_and_convergence,
    time_rescaling_test,
    transformed_gaps,
)

__version__ = "0.1.0"

__all__ = [
    "ClusterTree",
    "ClusterOverflowError",
    "ConfigError",
    "Convention",
    "ConvergenceError",
    "DefectiveModelError",
    "DegenerateKernelError",
    "DiagnosticsReport",
    "EventRecord",
    "EventStream",
    "ExcitationKernel",
    "Exponential",
    "ExponentialKernel",
    "Gamma",
    "InsufficientDataError",
    "Lognormal",
    "McEstimate",
    "MissingReferenceError",
    "PgflSolution",
    "RenewalModel",
    "RenewalTable",
    "RhpError",
    "RunConfig",
    "StationaryPgflResult",
    "SubcriticalityError",
    "SupportError",
    "Tabulated",
    "TabulatedKernel",
    "TestFunction",
    "TieError",
    "TruncatedPgflResult",
    "UnboundedHazardError",
    "Weibull",
    "assemble_stream",
    "build_kernel",
    "build_model",
    "cluster_size_pmf",
    "compensator",
    "compensator_at_events",
    "config_hash",
    "convolution_cdfs",
    "cross_simulator_test",
    "existence_preconditions",
    "generation_counts",
    "hawkes_oakes_pgfl",
    "hazard_at",
    "intensity_path",
    "kernel_mass",
    "martingale_residuals",
    "mc_pgfl_cluster",
    "mc_pgfl_process",
    "mean_cluster_size",
    "parse_config",
    "renewal_pgfl_truncated",
    "renewal_table",
    "sample_interarrival",
    "sample_offspring_displacement",
    "serialize_config",
    "simulate_cluster",
    "simulate_delayed_renewal",
    "simulate_renewal",
    "simulate_rhp_cluster",
    "simulate_rhp_stationary",
    "simulate_rhp_thinning",
    "solve_cluster_pgfl",
    "stationarity_and_convergence",
    "stationary_delay",
    "stationary_pgfl_expansion",
    "substream",
    "time_rescaling_test",
    "total_progeny_mean_se",
    "transformed_gaps",
]
