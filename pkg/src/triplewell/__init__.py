"""Low-lying spectrum of the symmetric triple-well oscillator.

Two independent routes to the lowest three levels: closed-form multi-instanton
(dilute-gas) sums, and a high-precision variational eigensolver in a
harmonic-oscillator basis.
"""

from .dilute_gas import (
    AmplitudeDecomposition,
    AmplitudeMode,
    BasicIntegralValue,
    CoefficientSequence,
    ExponentialFitResult,
    IntegralMethod,
    SequenceKind,
    Transition,
    amplitude_0_to_1,
    amplitude_1_to_1,
    basic_integral,
    coefficient_sequence,
    even_term,
    fit_exponentials,
    odd_term,
    spectral_weights,
)
from .errors import (
    EigensolveError,
    EscalationBudgetError,
    MethodNotAllowedError,
    QuadratureError,
    SeriesConvergenceError,
    SingularSystemError,
    TripleWellError,
)
from .potential import (
    InstantonPrefactors,
    InstantonProfile,
    ProfileKind,
    TripleWellParams,
    WellFrequencies,
    classical_action,
    eval_potential,
    instanton_prefactors,
    instanton_profile,
    instanton_velocity,
    well_frequencies,
)
from .precision import PrecisionContext, SeriesSum, integrate_adaptive, sum_series
from .report import ReportRow, cmd_spectrum, cmd_sweep, cmd_table, cmd_verify
from .solver import (
    EigenResult,
    EigenSolveConfig,
    HamiltonianBlock,
    Parity,
    build_hamiltonian,
    converged_spectrum,
    jacobi_eigenvalues,
    solve_lowest,
)
from .spectrum import (
    SpectrumMethod,
    SpectrumTriplet,
    SplittingPair,
    asymptotic_limits,
    energy_differences,
    instanton_spectrum,
)
from .verification import VerificationOutcome

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
