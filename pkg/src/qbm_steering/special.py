"""Error-function family and the Fresnel cosine integral.

All functions accept scalars or arrays and return the same shape (0-d input
gives a Python float).

Branch thresholds
-----------------
* ``erf``/``erfc``: all-positive Taylor series ``e^{-x^2} sum 2^n x^{2n+1}/(2n+1)!!``
  for ``|x| < 2``, Laplace continued fraction for ``erfc`` when ``|x| >= 2``.
* ``erfi``/``dawson``: positive power series for ``|x| <= 6``, asymptotic
  expansion of Dawson's integral beyond (truncation error ~ ``e^{-x^2}``).
* ``erfi`` overflows double precision for ``|x| > ERFI_MAX``; an
  ``OverflowError`` is raised there. Use ``dawson`` for the scaled value.
* ``fresnel_cf``: alternating series for ``z <= 2.5``, complex continued
  fraction of ``erfc`` along the ray ``arg w = -pi/4`` beyond.

``fresnel_cf(z)`` is ``int_0^z cos(t^2) dt``.  The other common convention,
``C(x) = int_0^x cos(pi t^2 / 2) dt``, is related by
``fresnel_cf(z) = sqrt(pi/2) * C(z * sqrt(2/pi))``.
"""

import math

import numpy as np

__all__ = [
    "ERFI_MAX",
    "erf",
    "erfc",
    "erfcx",
    "erfi",
    "dawson",
    "fresnel_cf",
]

_TWO_OVER_SQRT_PI = 2.0 / math.sqrt(math.pi)
_SQRT_PI = math.sqrt(math.pi)

_ERF_SERIES_MAX = 2.0
_ERFI_SERIES_MAX = 6.0
_FRESNEL_SERIES_MAX = 2.5

#: Largest |x| for which erfi(x) is finite in double precision.
ERFI_MAX = 26.5

_EPS = 2.0**-56
_MAX_ITER = 500


def _wrap(x, out):
    if np.ndim(x) == 0:
        return float(out)
    return out


def _erf_series(x):
    # e^{-x^2} * 2/sqrt(pi) * sum_n 2^n x^{2n+1} / (2n+1)!!  (no cancellation)
    x2 = x * x
    term = x.copy()
    total = x.copy()
    for n in range(1, _MAX_ITER):
        term = term * (2.0 * x2) / (2 * n + 1)
        total = total + term
        if np.all(np.abs(term) <= _EPS * np.abs(total)):
            break
    return _TWO_OVER_SQRT_PI * np.exp(-x2) * total


def _erfc_cf_scaled(w):
    """``sqrt(pi) * e^{w^2} * erfc(w)`` by modified Lentz, valid for Re w > 0.

    Continued fraction: ``1/(w + (1/2)/(w + 1/(w + (3/2)/(w + ...))))``.
    Works for complex ``w``.
    """
    tiny = 1e-300
    f = w.copy()
    f[f == 0] = tiny
    c = f.copy()
    d = np.zeros_like(w)
    done = np.zeros(w.shape, dtype=bool)
    for k in range(1, 4 * _MAX_ITER):
        ak = 0.5 * k
        d = w + ak * d
        d[d == 0] = tiny
        c = w + ak / c
        c[c == 0] = tiny
        d = 1.0 / d
        delta = c * d
        f = np.where(done, f, f * delta)
        done |= np.abs(delta - 1.0) < _EPS
        if done.all():
            break
    return 1.0 / f


def erf(x):
    """Error function ``(2/sqrt(pi)) int_0^x e^{-t^2} dt``."""
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    out = np.empty_like(ax)
    small = ax < _ERF_SERIES_MAX
    if small.any():
        out[small] = _erf_series(ax[small])
    if (~small).any():
        big = ax[~small]
        out[~small] = 1.0 - np.exp(-big * big) * _erfc_cf_scaled(big) / _SQRT_PI
    return _wrap(x, np.copysign(out, x))


def erfc(x):
    """Complementary error function, accurate in the far right tail."""
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    out = np.empty_like(ax)
    small = ax < _ERF_SERIES_MAX
    if small.any():
        out[small] = 1.0 - _erf_series(ax[small])
    if (~small).any():
        big = ax[~small]
        out[~small] = np.exp(-big * big) * _erfc_cf_scaled(big) / _SQRT_PI
    out = np.where(x < 0, 2.0 - out, out)
    return _wrap(x, out)


def erfcx(x):
    """Scaled complementary error function ``e^{x^2} erfc(x)`` for ``x >= 0``."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("erfcx is only provided for x >= 0")
    out = np.empty_like(x)
    small = x < _ERF_SERIES_MAX
    if small.any():
        xs = x[small]
        out[small] = np.exp(xs * xs) * (1.0 - _erf_series(xs))
    if (~small).any():
        out[~small] = _erfc_cf_scaled(x[~small]) / _SQRT_PI
    return _wrap(x, out)


def _erfi_series_sum(x):
    # sum_k x^{2k+1} / (k! (2k+1)), all terms share the sign of x
    x2 = x * x
    power = x.copy()
    total = x.copy()
    for k in range(1, 4 * _MAX_ITER):
        power = power * x2 / k
        term = power / (2 * k + 1)
        total = total + term
        if np.all(np.abs(term) <= _EPS * np.abs(total)):
            break
    return total


def _dawson_asymptotic(x):
    # D(x) ~ sum_k (2k-1)!! / (2^{k+1} x^{2k+1}), truncated at the smallest term
    inv2x2 = 1.0 / (2.0 * x * x)
    term = 1.0 / (2.0 * x)
    total = term.copy()
    prev = np.abs(term)
    for k in range(1, 200):
        nxt = term * (2 * k - 1) * inv2x2
        grow = np.abs(nxt) >= prev
        nxt = np.where(grow, 0.0, nxt)
        total = total + nxt
        prev = np.where(grow, 0.0, np.abs(nxt))
        term = nxt
        if np.all(np.abs(nxt) <= _EPS * np.abs(total)):
            break
    return total


def dawson(x):
    """Dawson's integral ``D(x) = e^{-x^2} int_0^x e^{t^2} dt``."""
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    out = np.empty_like(ax)
    small = ax <= _ERFI_SERIES_MAX
    if small.any():
        xs = ax[small]
        out[small] = np.exp(-xs * xs) * _erfi_series_sum(xs)
    if (~small).any():
        out[~small] = _dawson_asymptotic(ax[~small])
    return _wrap(x, np.copysign(out, x))


def erfi(x):
    """Imaginary error function ``-i erf(i x)`` for real ``x``.

    Raises ``OverflowError`` for ``|x| > ERFI_MAX``.
    """
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    if np.any(ax > ERFI_MAX):
        raise OverflowError(f"erfi overflows double precision for |x| > {ERFI_MAX}")
    out = np.empty_like(ax)
    small = ax <= _ERFI_SERIES_MAX
    if small.any():
        out[small] = _TWO_OVER_SQRT_PI * _erfi_series_sum(ax[small])
    if (~small).any():
        xb = ax[~small]
        out[~small] = _TWO_OVER_SQRT_PI * np.exp(xb * xb) * _dawson_asymptotic(xb)
    return _wrap(x, np.copysign(out, x))


def _fresnel_series(z):
    # sum_n (-1)^n z^{4n+1} / ((2n)! (4n+1))
    z4 = z**4
    power = z.copy()
    total = z.copy()
    for n in range(1, _MAX_ITER):
        power = -power * z4 / ((2 * n - 1) * (2 * n))
        term = power / (4 * n + 1)
        total = total + term
        if np.all(np.abs(term) <= _EPS * np.maximum(np.abs(total), 1e-300)):
            break
    return total


_ROT = complex(math.cos(math.pi / 4), math.sin(math.pi / 4))  # e^{i pi/4}


def _fresnel_cf_large(z):
    # int_0^z e^{i t^2} dt = (sqrt(pi)/2) e^{i pi/4} erf(w), w = e^{-i pi/4} z
    w = z.astype(complex) / _ROT
    scaled = _erfc_cf_scaled(w)  # sqrt(pi) e^{w^2} erfc(w), and e^{-w^2} = e^{i z^2}
    val = 0.5 * _SQRT_PI * _ROT - 0.5 * _ROT * np.exp(1j * z * z) * scaled
    return val.real


def fresnel_cf(z):
    """Fresnel cosine integral ``int_0^z cos(t^2) dt`` for ``z >= 0``."""
    z = np.asarray(z, dtype=float)
    if np.any(z < 0) or np.any(np.isnan(z)):
        raise ValueError("fresnel_cf is defined here for z >= 0 only")
    out = np.empty_like(z)
    small = z <= _FRESNEL_SERIES_MAX
    if small.any():
        out[small] = _fresnel_series(z[small])
    if (~small).any():
        out[~small] = _fresnel_cf_large(z[~small])
    return _wrap(z, out)
