"""Two-mode Gaussian states in standard form and Gaussian steerability.

Conventions: quadratures ``X = (q1, p1, q2, p2)`` with ``[X_k, X_l] = 2i Omega_kl``,
so the vacuum covariance matrix is the identity.  A standard-form two-mode
state has blocks ``A = a I``, ``B = b I`` and ``C = diag(c, -c)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "DegenerateStateError",
    "UnphysicalStateError",
    "TwoModeCovariance",
    "ProbeSpec",
    "symplectic_form",
    "OMEGA",
    "twb_initial",
    "physicality_check",
    "min_uncertainty_eigenvalue",
    "steerability_a_to_b",
    "steerability_b_to_a",
    "steerability_abc",
]


class DegenerateStateError(ValueError):
    """``a*b - c**2 <= 0``: the logarithm in the steerability is undefined."""


class UnphysicalStateError(ValueError):
    """A covariance matrix violates ``sigma + i Omega >= 0``."""


def symplectic_form(modes: int = 2) -> np.ndarray:
    """``Omega = omega (+) ... (+) omega`` with ``omega = [[0, 1], [-1, 0]]``."""
    omega = np.array([[0.0, 1.0], [-1.0, 0.0]])
    return np.kron(np.eye(modes), omega)


OMEGA = symplectic_form(2)
OMEGA.setflags(write=False)


@dataclass(frozen=True)
class TwoModeCovariance:
    """Standard-form two-mode covariance matrix ``(a, b, c)``."""

    a: float
    b: float
    c: float

    def __post_init__(self):
        for name in ("a", "b", "c"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @property
    def det_a(self) -> float:
        return self.a * self.a

    @property
    def det_b(self) -> float:
        return self.b * self.b

    @property
    def abc_det(self) -> float:
        """``a*b - c**2``; the full determinant is its square."""
        return self.a * self.b - self.c * self.c

    def matrix(self) -> np.ndarray:
        a, b, c = self.a, self.b, self.c
        return np.array([
            [a, 0.0, c, 0.0],
            [0.0, a, 0.0, -c],
            [c, 0.0, b, 0.0],
            [0.0, -c, 0.0, b],
        ])


@dataclass(frozen=True)
class ProbeSpec:
    """Twin-beam probe: mode frequency ``omega0`` and two-mode squeezing ``r``."""

    omega0: float = 7.0
    r: float = 2.0

    def __post_init__(self):
        if not self.omega0 > 0:
            raise ValueError("omega0 must be > 0")
        if not self.r >= 0:
            raise ValueError("r must be >= 0")


def twb_initial(r: float) -> TwoModeCovariance:
    """Twin-beam (two-mode squeezed vacuum) state, ``a = b = cosh 2r``, ``c = sinh 2r``."""
    if not r >= 0:
        raise ValueError("squeezing r must be >= 0")
    ch = math.cosh(2.0 * r)
    return TwoModeCovariance(ch, ch, math.sinh(2.0 * r))


def min_uncertainty_eigenvalue(sigma: np.ndarray) -> np.ndarray:
    """Smallest eigenvalue of ``sigma + i Omega``; accepts a stack ``(..., 4, 4)``."""
    sigma = np.asarray(sigma, dtype=float)
    return np.linalg.eigvalsh(sigma + 1j * OMEGA)[..., 0]


def physicality_check(cm: TwoModeCovariance, tol: float = 1e-10) -> bool:
    """True iff ``sigma + i Omega`` has no eigenvalue below ``-tol``."""
    if tol < 0:
        raise ValueError("tol must be >= 0")
    return bool(min_uncertainty_eigenvalue(cm.matrix()) >= -tol)


def steerability_abc(steering, other, c, det=None) -> np.ndarray | float:
    """``max(0, ln[steering / (steering*other - c**2)])``, vectorized.

    ``steering`` is the diagonal entry of the steering party's block.  A
    precomputed ``det = steering*other - c**2`` may be passed when it is
    known in a cancellation-free form.  Raises DegenerateStateError if the
    determinant is ``<= 0`` anywhere.
    """
    steering = np.asarray(steering, dtype=float)
    if det is None:
        d = steering * np.asarray(other, dtype=float) - np.asarray(c, dtype=float) ** 2
    else:
        d = np.asarray(det, dtype=float)
    if np.any(d <= 0):
        raise DegenerateStateError("a*b - c^2 <= 0: state has no finite steerability")
    # d >= steering gives a quotient <= 1 exactly, so the clamp is exact
    out = np.where(d >= steering, 0.0, np.log(steering / d))
    return float(out) if out.ndim == 0 else out


def steerability_a_to_b(cm: TwoModeCovariance) -> float:
    """Gaussian A -> B steerability ``max{0, ln[a / (ab - c^2)]}``.

    Equal to ``max{0, 1/2 ln(det A / det sigma)}`` for standard-form states.
    """
    return steerability_abc(cm.a, cm.b, cm.c)


def steerability_b_to_a(cm: TwoModeCovariance) -> float:
    """Gaussian B -> A steerability (labels exchanged)."""
    return steerability_abc(cm.b, cm.a, cm.c)
