"""Closed-form Jost solution for the sech^2 drive.

With ``eta = tanh(t/T)`` and ``x = omega0 T``::

    xi(t) = ((1 - eta^2)/4)^(-i x/2) 2F1(-i x - s, -i x + s + 1; 1 - i x; (1 + eta)/2)

where ``s(s + 1) = sign * Omega^2 T^2``. For the minus sign with ``Omega T > 1/2``
``s`` is complex; every formula here is analytic in ``s`` and stays valid.
"""

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit, log_expit

from .errors import DomainError
from .jost import JostSolution, wronskian_drift
from .profiles import MINUS, PLUS, SECH, FrequencyProfile, _parse_sign
from .special import hyp2f1, loggamma


@dataclass(frozen=True)
class SechParams:
    omega0: float
    Omega: float
    T: float
    sign: int = PLUS

    def __post_init__(self):
        object.__setattr__(self, "sign", _parse_sign(self.sign))
        if not (self.omega0 > 0 and self.T > 0 and self.Omega >= 0):
            raise DomainError("need omega0 > 0, T > 0, Omega >= 0")

    @classmethod
    def from_profile(cls, profile: FrequencyProfile):
        if profile.kind != SECH:
            raise DomainError("exact solution needs a sech profile")
        return cls(profile.omega0, profile.Omega, profile.T, profile.sign)

    @property
    def s(self):
        """Root of ``s(s + 1) = sign Omega^2 T^2`` with ``Re s >= -1/2``."""
        disc = 1.0 + 4.0 * self.sign * (self.Omega * self.T) ** 2
        if disc >= 0:
            return 0.5 * (math.sqrt(disc) - 1.0)
        return complex(-0.5, 0.5 * math.sqrt(-disc))

    @property
    def x(self):
        return self.omega0 * self.T


def sech_s(Omega, T, sign=PLUS):
    return SechParams(1.0, Omega, T, sign).s


def _abc(p):
    x, s = p.x, p.s
    return -1j * x - s, -1j * x + s + 1.0, 1.0 - 1j * x


def exact_xi(params, t):
    """Closed-form Jost solution at ``t`` (vectorised)."""
    xi, _ = exact_xi_and_derivative(params, t, derivative=False)
    return xi


def exact_xi_and_derivative(params, t, derivative=True):
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    a, b, c = _abc(params)
    u = 2.0 * t_arr / params.T
    z, w = expit(u), expit(-u)
    log_zw = log_expit(u) + log_expit(-u)
    pref = np.exp(-0.5j * params.x * log_zw)
    F = hyp2f1(a, b, c, z, one_minus_z=w)
    xi = pref * F
    dxi = None
    if derivative:
        eta = z - w
        dF = (a * b / c) * hyp2f1(a + 1, b + 1, c + 1, z, one_minus_z=w)
        dxi = 1j * params.omega0 * eta * xi + pref * dF * (2.0 / params.T) * z * w
    if np.ndim(t) == 0:
        return complex(xi[0]), (None if dxi is None else complex(dxi[0]))
    return xi, dxi


def exact_coefficients(params):
    """Closed-form ``(A, B)``.

    ``A = Gamma(1-ix) Gamma(-ix) / [Gamma(-ix-s) Gamma(-ix+s+1)]``,
    ``B = i sin(pi s) / sinh(pi x)``.
    """
    x, s = params.x, params.s
    if x == 0:
        raise DomainError("Gamma pole: omega0 T = 0")
    if params.Omega == 0:
        return 1 + 0j, 0j
    lA = loggamma(1 - 1j * x) + loggamma(-1j * x) - loggamma(-1j * x - s) - loggamma(-1j * x + s + 1)
    A = cmath.exp(lA)
    sin_ps = cmath.sin(math.pi * s)
    if math.pi * x > 30:
        B = 1j * sin_ps * 2.0 * math.exp(-math.pi * x) / (1.0 - math.exp(-2 * math.pi * x))
    else:
        B = 1j * sin_ps / math.sinh(math.pi * x)
    if isinstance(s, float):
        B = complex(0.0, B.imag)  # sin(pi s) is real for real s
    return complex(A), complex(B)


def exact_jost_solution(params, grid):
    """Sample the closed form on ``grid`` as a :class:`JostSolution`."""
    t = grid.times()
    xi, dxi = exact_xi_and_derivative(params, t)
    A, B = exact_coefficients(params)
    return JostSolution(
        t=t, xi=xi, xi_dot=dxi, A=A, B=B, omega0=params.omega0,
        wronskian_drift=wronskian_drift(xi, dxi, params.omega0), error_estimate=0.0,
        grid=grid, method="exact",
    )


__all__ = [
    "SechParams", "sech_s", "exact_xi", "exact_xi_and_derivative",
    "exact_coefficients", "exact_jost_solution", "PLUS", "MINUS",
]
