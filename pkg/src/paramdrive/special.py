"""Complex Gamma and Gauss hypergeometric functions.

Gamma uses the Lanczos approximation (g = 7, 9 terms) with the reflection
formula for ``Re z < 1/2``. ``hyp2f1`` sums the Gauss series for small ``|z|``
and switches to the ``z -> 1 - z`` connection formula near ``z = 1``.
"""

import cmath
import math

import numpy as np

from .errors import ConvergenceError, DomainError

_G = 7.0
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


def _is_nonpositive_integer(z, tol=0.0):
    z = complex(z)
    return abs(z.imag) <= tol and z.real <= tol and abs(z.real - round(z.real)) <= tol


def _lanczos_log(z):
    # log Gamma(z) for Re z >= 1/2 (branch not normalised to the principal loggamma)
    z = z - 1.0
    x = _LANCZOS[0]
    for i in range(1, 9):
        x += _LANCZOS[i] / (z + i)
    t = z + _G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * cmath.log(t) - t + cmath.log(x)


def loggamma(z):
    """A logarithm of Gamma(z); ``exp(loggamma(z)) == gamma(z)`` (branch unspecified)."""
    z = complex(z)
    if _is_nonpositive_integer(z):
        raise DomainError(f"Gamma has a pole at {z}")
    if z.real < 0.5:
        return math.log(math.pi) - cmath.log(cmath.sin(math.pi * z)) - _lanczos_log(1.0 - z)
    return _lanczos_log(z)


def gamma(z):
    """Complex Gamma function."""
    return cmath.exp(loggamma(z))


def rgamma(z):
    """Reciprocal Gamma, ``1/Gamma(z)``; zero at the poles of Gamma."""
    z = complex(z)
    if _is_nonpositive_integer(z):
        return 0j
    if z.real < 0.5:
        return cmath.sin(math.pi * z) * cmath.exp(_lanczos_log(1.0 - z)) / math.pi
    return cmath.exp(-_lanczos_log(z))


def _series(a, b, c, z, max_terms, rtol):
    """Gauss series, vectorised over ``z``."""
    z = np.asarray(z, dtype=complex)
    total = np.ones_like(z)
    term = np.ones_like(z)
    done = np.zeros(z.shape, dtype=bool)
    quiet = np.zeros(z.shape, dtype=np.int8)
    for n in range(max_terms):
        term = term * ((a + n) * (b + n) / ((c + n) * (n + 1))) * z
        total = total + term
        small = np.abs(term) <= rtol * np.abs(total)
        quiet = np.where(small, quiet + 1, 0)
        done = quiet >= 2  # two consecutive negligible terms
        if done.all() or not np.any(term):
            return total
    raise ConvergenceError(
        f"2F1 series did not converge in {max_terms} terms",
        estimate=float(np.max(np.abs(term) / np.maximum(np.abs(total), 1e-300))),
    )


def hyp2f1(a, b, c, z, max_terms=100_000, rtol=1e-16, one_minus_z=None):
    """Gauss hypergeometric function ``2F1(a, b; c; z)`` for complex parameters.

    ``z`` may be an array. Points with ``|z| <= 1/2`` use the power series; the
    rest use the connection formula in ``1 - z`` (requires ``|1 - z| < 1`` and a
    non-integer ``c - a - b``; for integer ``c - a - b`` the series is summed
    directly when ``|z| < 1``). Pass ``one_minus_z`` when ``1 - z`` is known
    more accurately than the subtraction would give.

    Raises
    ------
    DomainError
        ``c`` is a non-positive integer, or ``z`` is outside the implemented region.
    ConvergenceError
        The series fails to converge within ``max_terms``.
    """
    a, b, c = complex(a), complex(b), complex(c)
    if _is_nonpositive_integer(c):
        raise DomainError(f"2F1 undefined for c = {c}")
    z_arr = np.asarray(z, dtype=complex)
    scalar = z_arr.ndim == 0
    z_arr = np.atleast_1d(z_arr)
    w_arr = 1.0 - z_arr if one_minus_z is None else np.atleast_1d(np.asarray(one_minus_z, dtype=complex))
    out = np.empty_like(z_arr)

    # terminating polynomial: valid everywhere
    for p in (a, b):
        if _is_nonpositive_integer(p):
            out[:] = _series(a, b, c, z_arr, int(-p.real) + 2, 0.0)
            return complex(out[0]) if scalar else out

    near0 = np.abs(z_arr) <= 0.5
    if near0.any():
        out[near0] = _series(a, b, c, z_arr[near0], max_terms, rtol)
    rest = ~near0
    if rest.any():
        zr = z_arr[rest]
        w = w_arr[rest]
        if np.any(np.abs(w) >= 1.0):
            raise DomainError("z outside the implemented continuation region (|1 - z| < 1)")
        d = c - a - b
        if abs(d.imag) < 1e-9 and abs(d.real - round(d.real)) < 1e-9:
            if np.any(np.abs(zr) >= 1.0):
                raise DomainError("integer c - a - b with |z| >= 1 is not supported")
            out[rest] = _series(a, b, c, zr, max_terms, rtol)
        else:
            g1 = gamma(c) * gamma(d) * rgamma(c - a) * rgamma(c - b)
            g2 = gamma(c) * gamma(-d) * rgamma(a) * rgamma(b)
            part = np.zeros_like(zr)
            if g1 != 0:
                part += g1 * _series(a, b, 1.0 - d, w, max_terms, rtol)
            if g2 != 0:
                part += g2 * w ** d * _series(c - a, c - b, d + 1.0, w, max_terms, rtol)
            out[rest] = part
    return complex(out[0]) if scalar else out
