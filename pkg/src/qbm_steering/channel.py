"""Covariance-matrix evolution of a twin-beam probe through the QBM channel."""

from __future__ import annotations

import enum
import math
from typing import NamedTuple

import numpy as np

from .environment import CoefficientTrace
from .gaussian import TwoModeCovariance, UnphysicalStateError, min_uncertainty_eigenvalue

__all__ = [
    "CouplingScenario",
    "DeltaGammaMode",
    "ABCSeries",
    "evolve_abc",
    "evolve_abc_series",
    "lindblad_witness",
    "PHYSICALITY_TOL",
    "NOISE_SCALE",
]

PHYSICALITY_TOL = 1e-8

# Variances are in units where the vacuum has a = 1, while Delta_Gamma is
# accumulated with a vacuum variance of 1/2; the added noise is 2 Delta_Gamma.
# This puts the stationary variance at coth(omega0 / 2T).
NOISE_SCALE = 2.0


class CouplingScenario(enum.Enum):
    """Which mode(s) of the probe go through the channel.

    RIGHT: steering mode A only; LEFT: steered mode B only; BOTH:
    independent identical channels on A and B.
    """

    RIGHT = "right"
    LEFT = "left"
    BOTH = "both"

    @property
    def arrow(self) -> str:
        return {"right": "->", "left": "<-", "both": "<->"}[self.value]


class DeltaGammaMode(enum.Enum):
    EXACT = "exact"
    WEAK = "weak"


class ABCSeries(NamedTuple):
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    det: np.ndarray  # a*b - c**2 without the cosh^2 - sinh^2 cancellation


def _abc(r, big_gamma, delta_gamma, scenario, verbatim):
    ch = math.cosh(2.0 * r)
    # correlations decay from sinh 2r; the verbatim option keeps cosh 2r
    corr = ch if verbatim else math.sinh(2.0 * r)
    if not verbatim:
        delta_gamma = NOISE_SCALE * delta_gamma
    decay = np.exp(-big_gamma)
    noisy = decay * ch + delta_gamma
    quiet = np.full_like(noisy, ch)
    one_mode = scenario is not CouplingScenario.BOTH
    if verbatim:
        # cosh^2 - cosh^2 cancels exactly
        det = delta_gamma * ch if one_mode else delta_gamma * (2.0 * decay * ch + delta_gamma)
    else:
        det = decay + delta_gamma * ch if one_mode else (
            decay * decay + delta_gamma * (2.0 * decay * ch + delta_gamma)
        )
    if scenario is CouplingScenario.RIGHT:
        return noisy, quiet, np.exp(-0.5 * big_gamma) * corr, det
    if scenario is CouplingScenario.LEFT:
        return quiet, noisy, np.exp(-0.5 * big_gamma) * corr, det
    return noisy, noisy.copy(), decay * corr, det


def _matrices(a, b, c):
    z = np.zeros_like(a)
    rows = [
        [a, z, c, z],
        [z, a, z, -c],
        [c, z, b, z],
        [z, -c, z, b],
    ]
    return np.moveaxis(np.array(rows), (0, 1), (-2, -1))


def evolve_abc_series(r: float, trace: CoefficientTrace, scenario, mode=DeltaGammaMode.WEAK,
                      verbatim: bool = False, tol: float = PHYSICALITY_TOL) -> ABCSeries:
    """``(a(t), b(t), c(t))`` on the whole grid of ``trace``.

    Physicality (``sigma + i Omega >= -tol``) is enforced at every sample
    unless ``verbatim`` is set.  Verbatim mode uses the alternative literal forms
    (``cosh 2r`` correlation, unscaled ``Delta_Gamma``); it is not a
    physical state at ``t = 0`` and is provided for comparison only.
    """
    scenario = CouplingScenario(scenario)
    dg = trace.delta_gamma(mode)
    a, b, c, det = _abc(r, trace.big_gamma, dg, scenario, verbatim)
    if not verbatim:
        lam = min_uncertainty_eigenvalue(_matrices(a, b, c))
        bad = np.flatnonzero(lam < -tol)
        if bad.size:
            i = int(bad[0])
            raise UnphysicalStateError(
                f"unphysical covariance at t={trace.times[i]:.6g} (index {i}): "
                f"min eigenvalue {lam[i]:.3e}; check the coefficient trace"
            )
    return ABCSeries(a, b, c, det)


def evolve_abc(r: float, trace: CoefficientTrace, scenario, mode=DeltaGammaMode.WEAK,
               index: int = 0, verbatim: bool = False,
               tol: float = PHYSICALITY_TOL) -> TwoModeCovariance:
    """Covariance matrix at grid sample ``index``.

    RIGHT:  a = e^{-G} cosh2r + D,  b = cosh2r,            c = e^{-G/2} sinh2r
    LEFT:   a = cosh2r,             b = e^{-G} cosh2r + D, c = e^{-G/2} sinh2r
    BOTH:   a = b = e^{-G} cosh2r + D,                     c = e^{-G} sinh2r

    with ``G = Gamma(t)`` and ``D = NOISE_SCALE * Delta_Gamma(t)`` in the
    chosen mode (``D = Delta_Gamma`` and ``cosh 2r`` in place of ``sinh 2r``
    under ``verbatim``).
    """
    scenario = CouplingScenario(scenario)
    n = len(trace)
    if not -n <= index < n:
        raise IndexError(f"grid index {index} out of range for {n} samples")
    dg = trace.delta_gamma(mode)
    a, b, c, _ = _abc(r, trace.big_gamma[index : index + 1], dg[index : index + 1], scenario, verbatim)
    cm = TwoModeCovariance(float(a[0]), float(b[0]), float(c[0]))
    if not verbatim:
        lam = float(min_uncertainty_eigenvalue(cm.matrix()))
        if lam < -tol:
            raise UnphysicalStateError(
                f"unphysical covariance at t={trace.times[index]:.6g}: min eigenvalue {lam:.3e}"
            )
    return cm


def _runs(mask: np.ndarray):
    edges = np.flatnonzero(np.diff(np.concatenate([[0], mask.astype(np.int8), [0]])))
    return edges.reshape(-1, 2)


def lindblad_witness(trace: CoefficientTrace) -> list[tuple[float, float]]:
    """Maximal grid runs where ``delta(t) < |gamma(t)|``.

    Each run is reported as (first sample time, last sample time).  An empty
    list means the divisibility witness does not fire on this grid.
    """
    mask = trace.delta < np.abs(trace.gamma)
    t = trace.times
    return [(float(t[i]), float(t[j - 1])) for i, j in _runs(mask)]
