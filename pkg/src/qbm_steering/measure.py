"""Steerability time traces, backflow detection and the non-Markovianity measure.

The measure for a scenario is the total rise of the A -> B steerability over
the time intervals on which it increases while positive.  Intervals are found
by segmenting the sampled trace into monotone rising runs; no numerical
derivative is involved.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .channel import (
    CouplingScenario,
    DeltaGammaMode,
    evolve_abc_series,
)
from .environment import CoefficientTrace, EnvironmentSpec, coefficient_trace
from .gaussian import DegenerateStateError, ProbeSpec, steerability_abc
from .quadrature import QuadratureConfig

__all__ = [
    "DEFAULT_EPS",
    "BackflowInterval",
    "SteerabilityTrace",
    "NonMarkovResult",
    "SweepRow",
    "steerability_trace",
    "rising_intervals",
    "backflow_intervals",
    "nonmarkov_measure",
    "measure_by_integration",
    "alpha_sweep",
]

DEFAULT_EPS = 1e-9

ALL_SCENARIOS = (CouplingScenario.RIGHT, CouplingScenario.LEFT, CouplingScenario.BOTH)


class BackflowInterval(NamedTuple):
    t_start: float
    t_end: float
    rise: float


@dataclass(frozen=True)
class SteerabilityTrace:
    times: np.ndarray
    s_values: np.ndarray
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    scenario: CouplingScenario
    probe: ProbeSpec | None = None
    env: EnvironmentSpec | None = None
    coefficients: CoefficientTrace | None = field(default=None, repr=False)


@dataclass(frozen=True)
class NonMarkovResult:
    measure: float
    intervals: tuple[BackflowInterval, ...]
    scenario: CouplingScenario
    env: EnvironmentSpec | None = None
    probe: ProbeSpec | None = None


@dataclass(frozen=True)
class SweepRow:
    alpha: float
    results: dict
    errors: dict

    @property
    def error(self) -> str | None:
        if not self.errors:
            return None
        return "; ".join(f"{sc.value}: {msg}" for sc, msg in self.errors.items())

    def measure(self, scenario) -> float:
        res = self.results.get(CouplingScenario(scenario))
        return math.nan if res is None else res.measure


def steerability_trace(probe: ProbeSpec, env: EnvironmentSpec, scenario, times,
                       cfg: QuadratureConfig = QuadratureConfig(),
                       mode=DeltaGammaMode.WEAK, verbatim: bool = False,
                       coefficients: CoefficientTrace | None = None,
                       workers: int | None = None) -> SteerabilityTrace:
    """A -> B steerability along the grid for one coupling scenario.

    Passing ``coefficients`` skips the coefficient computation.  In verbatim
    mode, samples whose ``ab - c^2`` vanishes get ``S = inf``.
    """
    scenario = CouplingScenario(scenario)
    coef = coefficients if coefficients is not None else coefficient_trace(
        env, probe.omega0, times, cfg, workers=workers
    )
    abc = evolve_abc_series(probe.r, coef, scenario, mode, verbatim=verbatim)
    if verbatim:
        with np.errstate(divide="ignore"):
            s = np.where(abc.det > 0, np.log(abc.a / np.where(abc.det > 0, abc.det, 1.0)), np.inf)
        s = np.maximum(s, 0.0)
    else:
        bad = np.flatnonzero(abc.det <= 0)
        if bad.size:
            i = int(bad[0])
            raise DegenerateStateError(
                f"a*b - c^2 <= 0 at t={coef.times[i]:.6g} (index {i}, scenario {scenario.value})"
            )
        s = steerability_abc(abc.a, abc.b, abc.c, det=abc.det)
    return SteerabilityTrace(
        times=coef.times,
        s_values=np.atleast_1d(s),
        a=abc.a,
        b=abc.b,
        c=abc.c,
        scenario=scenario,
        probe=probe,
        env=env,
        coefficients=coef,
    )


def rising_intervals(times, values, eps: float = DEFAULT_EPS) -> list[BackflowInterval]:
    """Maximal runs of sample steps that rise by more than ``eps`` into positive values.

    A step ``k -> k+1`` counts when ``S[k+1] - S[k] > eps`` and ``S[k+1] > 0``;
    a run that leaves ``S = 0`` starts at that zero sample, so its rise is the
    full endpoint value.
    """
    if eps < 0:
        raise ValueError("eps must be >= 0")
    t = np.asarray(times, dtype=float)
    s = np.asarray(values, dtype=float)
    if s.size < 2:
        return []
    with np.errstate(invalid="ignore"):
        step = np.diff(s)
        ok = (step > eps) & (s[1:] > 0)
    edges = np.flatnonzero(np.diff(np.concatenate([[0], ok.astype(np.int8), [0]])))
    out = []
    for i, j in edges.reshape(-1, 2):
        out.append(BackflowInterval(float(t[i]), float(t[j]), float(s[j] - s[i])))
    return out


def backflow_intervals(trace: SteerabilityTrace, eps: float = DEFAULT_EPS) -> list[BackflowInterval]:
    return rising_intervals(trace.times, trace.s_values, eps)


def nonmarkov_measure(trace: SteerabilityTrace, eps: float = DEFAULT_EPS) -> NonMarkovResult:
    """Sum of the steerability rises over all backflow intervals."""
    intervals = tuple(backflow_intervals(trace, eps))
    total = math.fsum(iv.rise for iv in intervals)
    return NonMarkovResult(total, intervals, trace.scenario, trace.env, trace.probe)


def measure_by_integration(trace: SteerabilityTrace) -> float:
    """Trapezoid integral of ``max(dS/dt, 0)`` where ``S > 0``.

    Independent of the interval segmentation: ``dS/dt`` comes from
    second-order finite differences on the grid.
    """
    t, s = trace.times, trace.s_values
    ds = np.gradient(s, t)
    pos = np.where((ds > 0) & (s > 0), ds, 0.0)
    return float(np.trapezoid(pos, t))


def alpha_sweep(probe: ProbeSpec, env_template: EnvironmentSpec, alphas: Sequence[float], times,
                cfg: QuadratureConfig = QuadratureConfig(),
                scenarios: Sequence = ALL_SCENARIOS,
                mode=DeltaGammaMode.WEAK, eps: float = DEFAULT_EPS,
                verbatim: bool = False, workers: int | None = None) -> list[SweepRow]:
    """Non-Markovianity for every (alpha, scenario) cell.

    The unit-coupling coefficients are computed once and shared; cells run
    on a thread pool when ``workers > 1``.  A failing cell is recorded in
    its row's ``errors`` and the sweep carries on.  Row order follows
    ``alphas`` regardless of completion order.
    """
    alphas = [float(a) for a in alphas]
    if any(a < 0 for a in alphas):
        raise ValueError("alphas must be >= 0")
    if any(b < a for a, b in zip(alphas, alphas[1:])):
        raise ValueError("alphas must be sorted")
    scenarios = [CouplingScenario(sc) for sc in scenarios]
    # warm the unit-coefficient cache once (possibly with process workers)
    coefficient_trace(env_template.with_alpha(1.0), probe.omega0, times, cfg, workers=workers)

    def cell(job):
        alpha, sc = job
        env = env_template.with_alpha(alpha)
        try:
            coef = coefficient_trace(env, probe.omega0, times, cfg)
            tr = steerability_trace(probe, env, sc, times, cfg, mode, verbatim, coefficients=coef)
            return nonmarkov_measure(tr, eps), None
        except (ArithmeticError, ValueError, RuntimeError) as exc:
            return None, f"{type(exc).__name__}: {exc}"

    jobs = [(a, sc) for a in alphas for sc in scenarios]
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(cell, jobs))
    else:
        outcomes = [cell(j) for j in jobs]
    rows = []
    k = 0
    for alpha in alphas:
        results, errors = {}, {}
        for sc in scenarios:
            res, err = outcomes[k]
            k += 1
            if err is None:
                results[sc] = res
            else:
                errors[sc] = err
        rows.append(SweepRow(alpha, results, errors))
    return rows
