"""Gaussian steerability of a twin-beam probe under quantum Brownian motion.

Quantifies non-Markovianity of the QBM channel (Ohmic and sub-Ohmic baths
with a Lorentz-Drude cutoff) by steerability backflow.
"""

__version__ = "0.1.0"

from .channel import (
    NOISE_SCALE,
    CouplingScenario,
    DeltaGammaMode,
    evolve_abc,
    evolve_abc_series,
    lindblad_witness,
)
from .environment import (
    CoefficientTrace,
    EnvironmentSpec,
    Ohmicity,
    coefficient_trace,
    default_grid,
    delta_closed_ohmic,
    delta_numeric,
    gamma_closed_ohmic,
    gamma_closed_subohmic,
    gamma_numeric,
    spectral_density,
)
from .gaussian import (
    DegenerateStateError,
    ProbeSpec,
    TwoModeCovariance,
    UnphysicalStateError,
    physicality_check,
    steerability_a_to_b,
    steerability_b_to_a,
    twb_initial,
)
from .measure import (
    BackflowInterval,
    NonMarkovResult,
    SteerabilityTrace,
    alpha_sweep,
    backflow_intervals,
    measure_by_integration,
    nonmarkov_measure,
    steerability_trace,
)
from .quadrature import ConvergenceError, QuadratureConfig

__all__ = [name for name in dir() if not name.startswith("_")]
