"""Precision bounds and three-mode interferometry for joint estimation of the
linear and quadratic Zeeman coefficients with spin-F atomic ensembles."""

from .errors import (
    DomainError,
    EstimationError,
    NumericalError,
    OptimizationError,
    ResourceLimitError,
    ValidationError,
)
from .spin_core import (
    MomentSet,
    SingleAtomState,
    SpinConfig,
    coherent_state,
    moments,
    spin_operators,
    three_amp_state,
    uniform_state,
)
from .qfim import (
    MODE_INDIVIDUAL,
    MODE_SIMULTANEOUS,
    PrecisionBound,
    Qfim2x2,
    brute_force_qfim,
    ghz_qfim,
    ghz_state_vector,
    product_qfim,
    product_state_vector,
    qcrb_individual,
    qcrb_simultaneous,
    single_atom_qfim,
)
from .state_opt import (
    OptimizationResult,
    ScalingResult,
    fit_loglog_slope,
    individual_reference_bounds,
    optimize_sum_variance,
    scan_scaling,
    scan_theta,
)
from .fock3 import (
    Fock3State,
    PairState,
    TridiagonalHamiltonian,
    analytic_output_state,
    apply_beam_splitter,
    apply_phase_evolution,
    embed_pair_state,
    evolve_smd,
    ground_state_and_gap,
    optimal_prepared_state,
    pair_qcrb,
    qpt_hamiltonian,
    smd_hamiltonian,
)
from .readout import (
    FftEstimate,
    SignalSeries,
    analytic_expectations,
    expectation_and_std,
    fft_estimate,
    final_state,
    signal_sweep,
)

__version__ = "0.1.0"
