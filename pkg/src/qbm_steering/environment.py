"""Lorentz-Drude bath: spectral density and the damping/diffusion coefficients.

``gamma(t)`` and ``delta(t)`` are available in closed form where one exists
(Ohmic gamma and delta, sub-Ohmic gamma) and by quadrature otherwise.  All
coefficients carry the overall factor ``alpha**2``; grid traces are computed
once at unit coupling and rescaled.
"""

from __future__ import annotations

import enum
import math
import threading
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .quadrature import (
    ConvergenceError,
    QuadratureConfig,
    adaptive_quad,
    cumulative_simpson,
    oscillatory_tail_quad,
    sum_series,
)
from .special import dawson, erfcx, fresnel_cf

__all__ = [
    "Ohmicity",
    "EnvironmentSpec",
    "CoefficientTrace",
    "PoleProximityError",
    "CLOSED_FORM",
    "QUADRATURE",
    "spectral_density",
    "coth_half",
    "gamma_numeric",
    "delta_numeric",
    "gamma_closed_ohmic",
    "delta_closed_ohmic",
    "gamma_closed_subohmic",
    "coefficient_trace",
    "default_grid",
]

CLOSED_FORM = "closed-form"
QUADRATURE = "quadrature"

# relative width of the excluded band around a Matsubara pole nu_n = omega_c
POLE_GUARD = 1e-6


class PoleProximityError(ArithmeticError):
    """A Matsubara frequency sits on the cutoff, ``2 pi n T ~ omega_c``."""


class Ohmicity(enum.Enum):
    OHMIC = 1.0
    SUBOHMIC = 0.5

    @property
    def s(self) -> float:
        return self.value

    @property
    def label(self) -> str:
        return self.name.lower()

    @classmethod
    def from_label(cls, text: str) -> "Ohmicity":
        try:
            return cls[text.strip().upper().replace("-", "")]
        except KeyError:
            raise ValueError(f"unknown ohmicity {text!r}; expected 'ohmic' or 'subohmic'") from None


@dataclass(frozen=True)
class EnvironmentSpec:
    s: Ohmicity = Ohmicity.OHMIC
    omega_c: float = 1.0
    temperature: float = 1.5
    alpha: float = 0.0

    def __post_init__(self):
        if not isinstance(self.s, Ohmicity):
            raise TypeError("s must be an Ohmicity member")
        if not self.omega_c > 0:
            raise ValueError("omega_c must be > 0")
        if not self.temperature > 0:
            raise ValueError("temperature must be > 0")
        if not self.alpha >= 0:
            raise ValueError("alpha must be >= 0")

    def with_alpha(self, alpha: float) -> "EnvironmentSpec":
        return replace(self, alpha=alpha)


def spectral_density(omega, env: EnvironmentSpec):
    """``J(w) = (2 w^s / pi) * w_c^{3-s} / (w_c^2 + w^2)``."""
    omega = np.asarray(omega, dtype=float)
    s = env.s.s
    wc = env.omega_c
    out = 2.0 * omega**s / math.pi * wc ** (3.0 - s) / (wc * wc + omega * omega)
    return float(out) if out.ndim == 0 else out


def coth_half(omega, temperature: float):
    """``coth(w / 2T)`` as ``1 + 2 / expm1(w / T)``; stable at both ends."""
    omega = np.asarray(omega, dtype=float)
    with np.errstate(over="ignore"):
        out = 1.0 + 2.0 / np.expm1(omega / temperature)
    return float(out) if out.ndim == 0 else out


# --------------------------------------------------------------------------
# quadrature route


def _sinc_t(x, t):
    # sin(x t) / x, equal to t at x = 0
    return t * np.sinc(x * t / math.pi)


def _head_limit(env: EnvironmentSpec, omega0: float) -> float:
    return 2.0 * (omega0 + env.omega_c)


def _freq_integral(g, t, env, omega0, cfg):
    """``int_0^inf g(w) dw`` for a kernel oscillating as ``sin(w t)``.

    ``[0, W]`` is done in ``u = sqrt(w)`` (removes the ``w^{-1/2}`` edge of
    the sub-Ohmic diffusion integrand), the rest by half-period chunks.
    """
    big_w = _head_limit(env, omega0)
    head = adaptive_quad(
        lambda u: 2.0 * u * g(u * u), 0.0, math.sqrt(big_w), cfg, points=(math.sqrt(omega0),)
    )
    tail = oscillatory_tail_quad(g, big_w, 2.0 * math.pi / t, cfg)
    return head + tail


def _unit_gamma_numeric(t, env, omega0, cfg):
    def g(w):
        ks = 0.5 * (_sinc_t(w - omega0, t) - _sinc_t(w + omega0, t))
        return spectral_density(w, env) * ks

    return _freq_integral(g, t, env, omega0, cfg)


def _unit_delta_numeric(t, env, omega0, cfg):
    temp = env.temperature

    def g(w):
        kc = 0.5 * (_sinc_t(w - omega0, t) + _sinc_t(w + omega0, t))
        return spectral_density(w, env) * coth_half(w, temp) * kc

    return _freq_integral(g, t, env, omega0, cfg)


def _inner_transform(weight, tau, env, omega0, cfg):
    """``int_0^inf weight(w) * trig(w tau) dw`` with ``trig`` folded into weight."""
    return _freq_integral(lambda w: weight(w, tau), tau, env, omega0, cfg)


def _nested(t, env, omega0, cfg, kind):
    temp = env.temperature
    if kind == "gamma":
        def weight(w, tau):
            return spectral_density(w, env) * np.sin(w * tau)
        outer_trig = np.sin
    else:
        def weight(w, tau):
            return spectral_density(w, env) * coth_half(w, temp) * np.cos(w * tau)
        outer_trig = np.cos

    def outer(v):
        # tau = t v^2 flattens the logarithmic tau -> 0 behaviour of the
        # Ohmic diffusion transform
        taus = t * v * v
        inner = np.array([_inner_transform(weight, tau, env, omega0, cfg) for tau in taus])
        return 2.0 * t * v * outer_trig(omega0 * taus) * inner

    return adaptive_quad(outer, 0.0, 1.0, cfg)


def gamma_numeric(t: float, env: EnvironmentSpec, omega0: float,
                  cfg: QuadratureConfig = QuadratureConfig(), nested: bool = False) -> float:
    """Damping coefficient by quadrature of its frequency-time double integral.

    With ``nested=False`` (default) the time integral is done exactly,
    ``int_0^t sin(w tau) sin(w0 tau) dtau = [sinc_t(w-w0) - sinc_t(w+w0)]/2``,
    leaving one oscillatory frequency integral.  ``nested=True`` evaluates
    the literal double integral: adaptive outer time quadrature around the
    semi-infinite frequency transform.  The two agree to quadrature
    tolerance; the nested form is much slower.
    """
    if not t >= 0:
        raise ValueError("t must be >= 0")
    if t == 0 or env.alpha == 0:
        return 0.0
    unit = _nested(t, env, omega0, cfg, "gamma") if nested else _unit_gamma_numeric(t, env, omega0, cfg)
    return env.alpha**2 * unit


def delta_numeric(t: float, env: EnvironmentSpec, omega0: float,
                  cfg: QuadratureConfig = QuadratureConfig(), nested: bool = False) -> float:
    """Diffusion coefficient by quadrature; see ``gamma_numeric`` for ``nested``."""
    if not t >= 0:
        raise ValueError("t must be >= 0")
    if t == 0 or env.alpha == 0:
        return 0.0
    unit = _nested(t, env, omega0, cfg, "delta") if nested else _unit_delta_numeric(t, env, omega0, cfg)
    return env.alpha**2 * unit


# --------------------------------------------------------------------------
# closed forms


def _require(env: EnvironmentSpec, s: Ohmicity, what: str):
    if env.s is not s:
        raise ValueError(f"{what} requires a {s.label} environment, got {env.s.label}")


def gamma_closed_ohmic(t, env: EnvironmentSpec, omega0: float):
    """Ohmic damping, ``a^2 w_c^2/(w0^2+w_c^2) [w0 - e^{-w_c t}(w0 cos w0t + w_c sin w0t)]``."""
    _require(env, Ohmicity.OHMIC, "gamma_closed_ohmic")
    t = np.asarray(t, dtype=float)
    wc = env.omega_c
    pref = env.alpha**2 * wc * wc / (omega0 * omega0 + wc * wc)
    bracket = omega0 - np.exp(-wc * t) * (omega0 * np.cos(omega0 * t) + wc * np.sin(omega0 * t))
    out = pref * bracket
    return float(out) if out.ndim == 0 else out


def _check_poles(env: EnvironmentSpec):
    temp, wc = env.temperature, env.omega_c
    n_star = wc / (2.0 * math.pi * temp)
    for n in {max(1, math.floor(n_star)), max(1, math.ceil(n_star))}:
        nu = 2.0 * math.pi * n * temp
        if abs(nu * nu - wc * wc) < POLE_GUARD * wc * wc:
            raise PoleProximityError(
                f"Matsubara frequency n={n} within {POLE_GUARD:g} of omega_c; use delta_numeric"
            )


def delta_closed_ohmic(t: float, env: EnvironmentSpec, omega0: float,
                       cfg: QuadratureConfig = QuadratureConfig(), full_output: bool = False):
    """Ohmic diffusion from the Matsubara expansion of ``coth(w/2T)``.

    ::

        a^2 w_c^2/(w0^2+w_c^2) [w0 coth(w0/2T) + e^{-w_c t} cot(w_c/2T)(w0 sin w0t - w_c cos w0t)]
        + a^2 w_c^2 sum_n e^{-nu_n t} 4T nu_n (w0 sin w0t - nu_n cos w0t)
                          / ((nu_n^2 + w0^2)(nu_n^2 - w_c^2)),     nu_n = 2 pi n T

    Raises PoleProximityError when some ``nu_n`` is within the guard band of
    ``w_c`` and ConvergenceError if the series does not settle.  With
    ``full_output`` returns ``(value, terms_used)``.
    """
    _require(env, Ohmicity.OHMIC, "delta_closed_ohmic")
    if not t >= 0:
        raise ValueError("t must be >= 0")
    if t == 0:
        return (0.0, 0) if full_output else 0.0
    _check_poles(env)
    temp, wc = env.temperature, env.omega_c
    cos0, sin0 = math.cos(omega0 * t), math.sin(omega0 * t)
    lead = (
        omega0 / math.tanh(omega0 / (2.0 * temp))
        + math.exp(-wc * t) / math.tan(wc / (2.0 * temp)) * (omega0 * sin0 - wc * cos0)
    ) / (omega0 * omega0 + wc * wc)

    def term(n):
        nu = 2.0 * math.pi * temp * n
        return (
            np.exp(-nu * t) * 4.0 * temp * nu * (omega0 * sin0 - nu * cos0)
            / ((nu * nu + omega0 * omega0) * (nu * nu - wc * wc))
        )

    series = sum_series(term, cfg)
    value = env.alpha**2 * wc * wc * (lead + series.value)
    return (value, series.terms) if full_output else value


def gamma_closed_subohmic(t, env: EnvironmentSpec, omega0: float):
    """Sub-Ohmic (s = 1/2) damping via Fresnel and error functions.

    ::

        a^2 w_c^2 / (2 (w0^2 + w_c^2)) [ 4 sqrt(2 w_c w0 / pi) Cf(sqrt(w0 t))
            + sqrt2 e^{w_c t} erfc(sqrt(w_c t)) (w0 cos w0t - w_c sin w0t)
            - sqrt2 e^{-w_c t} (1 + erfi(sqrt(w_c t))) (w0 cos w0t + w_c sin w0t) ]

    with ``Cf(z) = int_0^z cos(x^2) dx``.  The exponentially scaled products
    are evaluated as ``erfcx`` and ``dawson``, so the form stays finite for
    any ``t``.
    """
    _require(env, Ohmicity.SUBOHMIC, "gamma_closed_subohmic")
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be >= 0")
    wc = env.omega_c
    x = np.sqrt(wc * t)
    c0, s0 = np.cos(omega0 * t), np.sin(omega0 * t)
    fresnel = 4.0 * math.sqrt(2.0 * wc * omega0 / math.pi) * fresnel_cf(np.sqrt(omega0 * t))
    rising = math.sqrt(2.0) * erfcx(x) * (omega0 * c0 - wc * s0)
    # e^{-x^2}(1 + erfi x) = e^{-x^2} + (2/sqrt(pi)) D(x)
    falling = math.sqrt(2.0) * (np.exp(-wc * t) + 2.0 / math.sqrt(math.pi) * dawson(x)) * (
        omega0 * c0 + wc * s0
    )
    pref = env.alpha**2 * wc * wc / (2.0 * (omega0 * omega0 + wc * wc))
    out = pref * (fresnel + rising - falling)
    return float(out) if out.ndim == 0 else out


# --------------------------------------------------------------------------
# grid traces


def default_grid(t_max: float = 5.0, dt: float = 1e-3) -> np.ndarray:
    """Uniform grid ``0, dt, ..., t_max`` (endpoint included)."""
    if not (t_max > 0 and dt > 0):
        raise ValueError("t_max and dt must be > 0")
    n = int(round(t_max / dt))
    if not math.isclose(n * dt, t_max, rel_tol=1e-9, abs_tol=1e-12):
        raise ValueError("t_max must be an integer multiple of dt")
    return np.arange(n + 1) * dt


@dataclass(frozen=True)
class CoefficientTrace:
    """Coefficients sampled on a time grid for one environment.

    ``delta_gamma_exact`` is ``e^{-G} int e^{G} Delta`` and
    ``delta_gamma_weak`` the weak-coupling ``int Delta``.
    """

    times: np.ndarray
    gamma: np.ndarray
    delta: np.ndarray
    big_gamma: np.ndarray
    delta_gamma_exact: np.ndarray
    delta_gamma_weak: np.ndarray
    method_gamma: tuple
    method_delta: tuple
    env: EnvironmentSpec | None = None
    omega0: float | None = None

    def delta_gamma(self, mode) -> np.ndarray:
        from .channel import DeltaGammaMode

        mode = DeltaGammaMode(mode)
        return self.delta_gamma_exact if mode is DeltaGammaMode.EXACT else self.delta_gamma_weak

    def __len__(self) -> int:
        return self.times.size


def _validate_grid(times) -> np.ndarray:
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size < 1:
        raise ValueError("time grid must be a non-empty 1-d array")
    if times[0] != 0.0:
        raise ValueError("time grid must start at 0")
    if np.any(np.diff(times) <= 0):
        raise ValueError("time grid must be strictly increasing")
    return times


def _delta_closed_or_numeric(args):
    t, env, omega0, cfg = args
    try:
        return delta_closed_ohmic(t, env, omega0, cfg), CLOSED_FORM
    except (PoleProximityError, ConvergenceError):
        return delta_numeric(t, env, omega0, cfg), QUADRATURE


def _delta_numeric_task(args):
    t, env, omega0, cfg = args
    return delta_numeric(t, env, omega0, cfg), QUADRATURE


_UNIT_CACHE: dict = {}
_UNIT_CACHE_SIZE = 16
_UNIT_LOCK = threading.Lock()


def _unit_coefficients(s, omega_c, temperature, omega0, times_key, cfg, workers):
    # results do not depend on the worker count, so it is not part of the key
    key = (s, omega_c, temperature, omega0, times_key, cfg)
    with _UNIT_LOCK:
        hit = _UNIT_CACHE.get(key)
        if hit is None:
            hit = _compute_unit_coefficients(s, omega_c, temperature, omega0, times_key, cfg, workers)
            if len(_UNIT_CACHE) >= _UNIT_CACHE_SIZE:
                _UNIT_CACHE.pop(next(iter(_UNIT_CACHE)))
            _UNIT_CACHE[key] = hit
    return hit


def _compute_unit_coefficients(s, omega_c, temperature, omega0, times_key, cfg, workers):
    times = np.frombuffer(times_key, dtype=float)
    env = EnvironmentSpec(s=s, omega_c=omega_c, temperature=temperature, alpha=1.0)
    if s is Ohmicity.OHMIC:
        gamma = gamma_closed_ohmic(times, env, omega0)
        task = _delta_closed_or_numeric
    else:
        gamma = gamma_closed_subohmic(times, env, omega0)
        task = _delta_numeric_task
    gamma = np.atleast_1d(np.asarray(gamma, dtype=float)).copy()
    gamma[0] = 0.0
    args = [(float(t), env, omega0, cfg) for t in times[1:]]
    if workers and workers > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(task, args, chunksize=max(1, len(args) // (8 * workers))))
    else:
        results = [task(a) for a in args]
    delta = np.zeros_like(times)
    method_delta = [CLOSED_FORM if s is Ohmicity.OHMIC else QUADRATURE]
    for i, (v, m) in enumerate(results, start=1):
        delta[i] = v
        method_delta.append(m)
    gamma.setflags(write=False)
    delta.setflags(write=False)
    return gamma, delta, tuple(method_delta)


def coefficient_trace(env: EnvironmentSpec, omega0: float, times,
                      cfg: QuadratureConfig = QuadratureConfig(),
                      workers: int | None = None) -> CoefficientTrace:
    """Sample gamma and delta on ``times`` and integrate Gamma and Delta_Gamma.

    gamma, delta are computed once per (environment without alpha, grid,
    config) at unit coupling and cached; ``workers > 1`` spreads the
    per-sample quadratures over processes.  Cumulative integrals use
    fourth-order composite Simpson on the grid.
    """
    times = _validate_grid(times)
    times = np.ascontiguousarray(times)
    ug, ud, md = _unit_coefficients(
        env.s, float(env.omega_c), float(env.temperature), float(omega0), times.tobytes(), cfg, workers
    )
    a2 = env.alpha**2
    gamma = a2 * ug
    delta = a2 * ud
    big_gamma = cumulative_simpson(2.0 * gamma, times)
    dg_weak = cumulative_simpson(delta, times)
    dg_exact = np.exp(-big_gamma) * cumulative_simpson(np.exp(big_gamma) * delta, times)
    mg = (CLOSED_FORM,) * times.size
    for arr in (gamma, delta, big_gamma, dg_weak, dg_exact):
        arr.setflags(write=False)
    return CoefficientTrace(
        times=times,
        gamma=gamma,
        delta=delta,
        big_gamma=big_gamma,
        delta_gamma_exact=dg_exact,
        delta_gamma_weak=dg_weak,
        method_gamma=mg,
        method_delta=md,
        env=env,
        omega0=float(omega0),
    )
