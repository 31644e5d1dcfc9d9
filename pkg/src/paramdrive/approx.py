"""Closed-form approximations: weak drive (Born), abrupt kick, slow drive (adiabatic).

Notation: ``V(t) = omega^2(t) - omega0^2``; Fourier transforms use
``f~(w) = int dt f(t) exp(i w t)``; ``m`` comes from the force.
"""

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import erf, erfc, erfcx

from .errors import ConvergenceError, DomainError, PreconditionError
from .profiles import CONSTANT, GAUSSCOS, MINUS, SECH, TABULATED, FrequencyProfile

_QUAD_LIMIT = 500
_SECH_TAIL = 40.0  # sech^2 bump negligible beyond this many widths


def _quad(f, a, b, **kw):
    kw.setdefault("limit", _QUAD_LIMIT)
    kw.setdefault("epsabs", 1e-14)
    kw.setdefault("epsrel", 1e-12)
    kw["full_output"] = 1
    res = quad(f, a, b, **kw)
    val, err = res[0], res[1]
    if len(res) > 3 and "roundoff" not in res[3] and err > 1e-6 * max(abs(val), 1e-12):
        raise ConvergenceError(f"quadrature failed on [{a}, {b}]: {res[3]}", estimate=err)
    return val


def _cquad(f, a, b, **kw):
    """Quadrature of a complex integrand (real and imaginary parts separately)."""
    return complex(_quad(lambda x: f(x).real, a, b, **kw), _quad(lambda x: f(x).imag, a, b, **kw))


def _inv_sinh(x):
    """``1/sinh(x)`` without overflow."""
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    e = np.exp(-ax)
    with np.errstate(divide="ignore"):
        return np.sign(x) * 2.0 * e / (-np.expm1(-2.0 * ax))


def _x_over_sinh(x, a):
    """``x / sinh(a x)``, regular at ``x = 0``."""
    x = np.asarray(x, dtype=float)
    ax = a * x
    small = np.abs(ax) < 1e-4
    safe = np.where(small, 1.0, ax)
    return np.where(small, (1.0 - ax * ax / 6.0) / a, x * _inv_sinh(safe))


def _drive_interval(profile):
    if profile.kind == SECH:
        return -_SECH_TAIL * profile.T, _SECH_TAIL * profile.T
    if profile.kind == TABULATED:
        t = profile.samples[0]
        return float(t[0]), float(t[-1])
    return 0.0, 0.0


def _V(profile, t):
    return profile.omega_squared(t) - profile.omega0 ** 2


def _partial_integrals(profile, t):
    """``int_{-inf}^t V`` and ``int_{-inf}^t V exp(-2 i omega0 tau)``."""
    if profile.kind == CONSTANT or profile.is_flat:
        return 0.0, 0j
    lo, hi = _drive_interval(profile)
    up = min(t, hi)
    if up <= lo:
        return 0.0, 0j
    k = 2.0 * profile.omega0
    if profile.kind == SECH:
        I0 = profile.sign * profile.Omega ** 2 * profile.T * (1.0 + math.tanh(t / profile.T))
    else:
        I0 = _quad(lambda s: _V(profile, s), lo, up, points=_inner_points(profile, lo, up))
    V = lambda s: _V(profile, s)
    kw = dict(weight="cos", wvar=k)
    re = _quad(V, lo, up, **kw)
    im = -_quad(V, lo, up, weight="sin", wvar=k)
    return I0, complex(re, im)


def _inner_points(profile, lo, up):
    if profile.kind != TABULATED:
        return None
    t = profile.samples[0]
    inner = t[(t > lo) & (t < up)]
    return inner[:_QUAD_LIMIT - 10] if inner.size else None


# ---------------------------------------------------------------- Born ----

def born_xi(profile: FrequencyProfile, t):
    """First-order Born approximation to the Jost solution.

    ``xi = e^{-i w0 t} - int_{-inf}^t (1/w0) sin[w0 (t - tau)] V(tau) e^{-i w0 tau} dtau``,
    evaluated as ``e^{-i w0 t}(1 + I0/(2 i w0)) - e^{i w0 t} I2/(2 i w0)`` with
    the partial integrals ``I0 = int V``, ``I2 = int V e^{-2 i w0 tau}``.
    """
    w0 = profile.omega0
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.empty(t_arr.shape, dtype=complex)
    for i, ti in enumerate(t_arr):
        I0, I2 = _partial_integrals(profile, float(ti))
        out[i] = (cmath.exp(-1j * w0 * ti) * (1.0 + I0 / (2j * w0))
                  - cmath.exp(1j * w0 * ti) * I2 / (2j * w0))
    return complex(out[0]) if np.ndim(t) == 0 else out


def born_coefficients(profile: FrequencyProfile, closed_form=True):
    """First-order ``(A, B)``.

    ``A = 1 - (i/2w0) int V``, ``B = (i/2w0) int V e^{-2 i w0 tau}``. For the sech^2
    bump these are ``1 - i sign Omega^2 T/w0`` and ``i sign pi Omega^2 T^2 / sinh(pi w0 T)``;
    ``closed_form=False`` forces quadrature (used as a cross-check).
    """
    w0 = profile.omega0
    if profile.kind == CONSTANT or profile.is_flat:
        return 1 + 0j, 0j
    if profile.kind == SECH and closed_form:
        sg, W2, T = profile.sign, profile.Omega ** 2, profile.T
        A = 1.0 - 1j * sg * W2 * T / w0
        B = 1j * sg * math.pi * W2 * T * T * float(_inv_sinh(math.pi * w0 * T))
        return complex(A), complex(B)
    lo, hi = _drive_interval(profile)
    I0, I2 = _partial_integrals(profile, hi)
    return 1.0 - 1j * I0 / (2 * w0), 1j * I2 / (2 * w0)


def response_function(nu, omega0, Omega, T, sign=1):
    """``R(nu) = sign Omega^2 T^2 / [(w0 - nu) sinh(pi (w0 + nu) T / 2)]``.

    Simple poles at ``nu = +w0`` and ``nu = -w0``.
    """
    nu = np.asarray(nu, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = sign * Omega ** 2 * T ** 2 / (omega0 - nu) * _inv_sinh(math.pi * (omega0 + nu) * T / 2.0)
    return out if out.ndim else float(out)


def _pv_response_integral(profile, force, method="cauchy", window=1e-6):
    """``PV int dnu conj(F~(nu)) R(nu)`` over ``|nu| <= w0 + 40/T``."""
    w0, T, sg = profile.omega0, profile.T, profile.sign
    W2T2 = sg * profile.Omega ** 2 * T * T
    L = w0 + _SECH_TAIL / T
    if force.kind == GAUSSCOS:
        L = max(L, force.omega_f + 12.0 / force.T2)
    Fc = lambda nu: np.conj(force.fourier_absolute(nu))
    a = math.pi * T / 2.0
    peaks = []
    if force.kind == GAUSSCOS:
        peaks = [force.omega_f, -force.omega_f]

    # smooth numerators: R Fc = g(nu)/(nu - w0) near +w0, = h(nu)/(nu + w0) near -w0
    g = lambda nu: -W2T2 * Fc(nu) * _inv_sinh(a * (w0 + nu))
    h = lambda nu: W2T2 * Fc(nu) * _x_over_sinh(nu + w0, a) / (w0 - nu)
    full = lambda nu: W2T2 * Fc(nu) * _inv_sinh(a * (w0 + nu)) / (w0 - nu)

    def regular(lo, hi):
        pts = [p for p in peaks if lo < p < hi] or None
        return _cquad(full, lo, hi, points=pts)

    d = 0.5 * w0
    if method == "cauchy":
        total = regular(-L, -w0 - d) + regular(-w0 + d, w0 - d) + regular(w0 + d, L)
        total += _cquad(h, -w0 - d, -w0 + d, weight="cauchy", wvar=-w0)
        total += _cquad(g, w0 - d, w0 + d, weight="cauchy", wvar=w0)
        return total
    if method == "window":
        e = window * w0
        total = 0j
        for lo, hi in ((-L, -w0 - e), (-w0 + e, w0 - e), (w0 + e, L)):
            pts = sorted({p for p in peaks + [-w0 - d, -w0 + d, w0 - d, w0 + d] if lo < p < hi}) or None
            total += _cquad(full, lo, hi, points=pts)
        return total
    raise ValueError(f"unknown principal-value method {method!r}")


def born_displacement(profile: FrequencyProfile, force, t, method="cauchy", window=1e-6):
    """First-order displacement for a weak sech^2 drive and arbitrary force.

    ``alpha = (i e^{-i w0 t}/sqrt(2 m w0)) [A F~ - B* F~* - (a1 F~ + b1 F~*)/2
    - (1/2) PV int dnu F~*(nu) R(nu)]`` with ``F~ = F~(w0)`` the uncentred
    transform and ``a1 = A - 1``, ``b1 = B`` the first-order coefficients. The
    half-weight terms are the pole contributions that accompany the
    principal value.

    Parameters
    ----------
    method : {"cauchy", "window"}
        ``"cauchy"`` uses weighted (QAWC) quadrature for the poles at
        ``nu = +-w0``; ``"window"`` drops symmetric windows of half-width
        ``window * w0`` around them.
    """
    if profile.kind not in (SECH, CONSTANT):
        raise PreconditionError("born_displacement needs a sech (or constant) profile")
    if force.is_null:
        return 0j
    w0, m = profile.omega0, force.m
    A, B = born_coefficients(profile)
    F = complex(force.fourier_absolute(w0))
    a1, b1 = A - 1.0, B
    bracket = A * F - B.conjugate() * F.conjugate() - 0.5 * (a1 * F + b1 * F.conjugate())
    if not profile.is_flat:
        bracket -= 0.5 * _pv_response_integral(profile, force, method, window)
    return 1j * cmath.exp(-1j * w0 * t) / math.sqrt(2 * m * w0) * bracket


# -------------------------------------------------------------- abrupt ----

def abrupt_coefficients(omega0, Omega2T):
    """``A = 1 - i c``, ``B = i c`` with ``c = Omega^2 T / omega0``."""
    c = Omega2T / omega0
    return complex(1.0, -c), complex(0.0, c)


def abrupt_xi(omega0, Omega2T, t):
    """Jost solution for the kick ``2 Omega^2 T delta(t)``; continuous at 0."""
    t = np.asarray(t, dtype=float)
    c = Omega2T / omega0
    out = np.exp(-1j * omega0 * t) - np.where(t > 0, 2.0 * c * np.sin(omega0 * t), 0.0)
    return out if out.ndim else complex(out)


def abrupt_xi_dot(omega0, Omega2T, t):
    """Derivative of :func:`abrupt_xi` (left limit at ``t = 0``)."""
    t = np.asarray(t, dtype=float)
    c = Omega2T / omega0
    out = -1j * omega0 * np.exp(-1j * omega0 * t) - np.where(t > 0, 2.0 * c * omega0 * np.cos(omega0 * t), 0.0)
    return out if out.ndim else complex(out)


def _gauss_tail(a, b):
    """``exp(-b^2) erfc(-a - i b)`` without overflow."""
    z = complex(-a, -b)
    ph = cmath.exp(-a * a - 2j * a * b)
    if z.real >= 0:
        return ph * erfcx(z)
    return 2.0 * math.exp(-b * b) - ph * erfcx(-z)


def _half_line_gauss(k, t_f, T2):
    """``int_0^inf exp(-(tau - t_f)^2/T2^2) exp(i k tau) dtau``."""
    return cmath.exp(1j * k * t_f) * T2 * (math.sqrt(math.pi) / 2.0) * _gauss_tail(t_f / T2, k * T2 / 2.0)


def abrupt_calI(omega0, force, closed_form=True):
    """``int_0^inf F(tau) sin(omega0 tau) dtau`` (force at absolute time)."""
    if force.is_null:
        return 0.0
    if force.kind == GAUSSCOS and closed_form:
        wf, tf = force.omega_f, force.t_f
        s = 0.0
        for sgn in (1.0, -1.0):
            s += (cmath.exp(-1j * sgn * wf * tf) * _half_line_gauss(omega0 + sgn * wf, tf, force.T2)).imag
        return 0.5 * force.F0 * s
    lo, hi = force.support()
    lo = max(0.0, lo)
    if hi <= lo:
        return 0.0
    pts = None
    if force.kind == TABULATED:
        pts = _inner_points_arr(force.samples[0], lo, hi)
    return _quad(force.value, lo, hi, weight="sin", wvar=omega0) if pts is None else \
        _quad(lambda x: force.value(x) * math.sin(omega0 * x), lo, hi, points=pts)


def _inner_points_arr(t, lo, hi):
    inner = t[(t > lo) & (t < hi)]
    return inner[:_QUAD_LIMIT - 10] if inner.size else None


def abrupt_displacement(omega0, Omega2T, force, t):
    """Displacement for the abrupt kick at ``t = 0`` and a force centred at ``t_f``.

    ``alpha = (i e^{-i w0 t}/sqrt(2 m w0)) [f~ e^{i w0 t_f}
    - 2 c (I + Im[f~* e^{-i w0 t_f}])]`` with ``f~ = f~(w0)``, ``c = Omega^2 T/w0``
    and ``I`` from :func:`abrupt_calI`.
    """
    if force.kind not in (GAUSSCOS, TABULATED) or force.is_null:
        return 0j
    c = Omega2T / omega0
    f = complex(force.fourier(omega0))
    tf = force.t_f
    I = abrupt_calI(omega0, force)
    bracket = f * cmath.exp(1j * omega0 * tf) - 2.0 * c * (I + (f.conjugate() * cmath.exp(-1j * omega0 * tf)).imag)
    return 1j * cmath.exp(-1j * omega0 * t) / math.sqrt(2 * force.m * omega0) * bracket


# ----------------------------------------------------------- adiabatic ----

@dataclass(frozen=True)
class AdiabaticParams:
    """Slow minus-sign bump ``omega^2 = omega0^2 - Omega^2 sech^2(t/T)``."""

    omega0: float
    Omega: float
    T: float

    def __post_init__(self):
        if not (self.omega0 > 0 and self.T > 0 and 0 <= self.Omega < self.omega0):
            raise DomainError("need omega0 > 0, T > 0 and 0 <= Omega < omega0")

    @classmethod
    def from_profile(cls, profile):
        if profile.kind != SECH or profile.sign != MINUS:
            raise DomainError("adiabatic limit needs a minus-sign sech profile")
        return cls(profile.omega0, profile.Omega, profile.T)

    @property
    def omega_eff(self):
        return math.sqrt(self.omega0 ** 2 - self.Omega ** 2)

    @property
    def exponent(self):
        """``omega0 T g = (pi/2)(omega0 - Omega) T``."""
        return 0.5 * math.pi * (self.omega0 - self.Omega) * self.T

    @property
    def g_value(self):
        return self.exponent / (self.omega0 * self.T)

    @property
    def T_S(self):
        return self.exponent / (2.0 * self.omega_eff)

    @property
    def phi1(self):
        """Turning-point angle: ``omega^2(i phi T) = 0`` at ``phi = arccos(Omega/omega0)``."""
        return math.acos(self.Omega / self.omega0)

    @property
    def phi2(self):
        return math.acos(-self.Omega / self.omega0)


def turning_point_integral(params: AdiabaticParams):
    """``int_0^{phi1 T} sqrt(omega0^2 - Omega^2 / cos^2(s/T)) ds`` by quadrature.

    Cross-check of :attr:`AdiabaticParams.exponent`.
    """
    w0, W, T = params.omega0, params.Omega, params.T
    f = lambda s: math.sqrt(max(w0 * w0 - W * W / math.cos(s / T) ** 2, 0.0))
    return _quad(f, 0.0, params.phi1 * T)


def adiabatic_B(params: AdiabaticParams):
    """``|B| ~ exp(-omega0 T g)``."""
    return math.exp(-params.exponent)


def wkb_phase(params: AdiabaticParams, t):
    """``int_0^t omega(tau) dtau`` in closed form (vectorised)."""
    w0, W, T, c = params.omega0, params.Omega, params.T, params.omega_eff
    x = np.asarray(t, dtype=float) / T
    ax = np.abs(x)
    big = ax > 20.0
    xs = np.where(big, 0.0, x)
    s = np.sinh(xs)
    ab = np.where(big, ax, 21.0)
    first = np.where(big, np.sign(x) * (ab + math.log(w0 / c) + np.log1p(-np.exp(-2.0 * ab))),
                     np.arcsinh(w0 * s / c))
    with np.errstate(over="ignore"):
        sech = 1.0 / np.cosh(x)
    second = np.arctanh(W * np.tanh(x) / np.sqrt(w0 * w0 * np.tanh(x) ** 2 + c * c * sech * sech))
    out = T * (w0 * first - W * second)
    return out if out.ndim else float(out)


def wkb_phase_offset(params: AdiabaticParams):
    """``lim_{t -> -inf} [int_0^t omega - omega0 t]``."""
    w0, W, T = params.omega0, params.Omega, params.T
    return -w0 * T * math.log(w0 / params.omega_eff) + W * T * math.atanh(W / w0)


def stokes_step(params: AdiabaticParams, t, unit_step=True):
    """Switching function of the reflected wave.

    ``unit_step=True`` gives ``(1 + erf(t/T_S))/2``, rising from 0 to 1;
    ``False`` gives the bare ``erf(t/T_S)``.
    """
    e = erf(np.asarray(t, dtype=float) / params.T_S)
    return 0.5 * (1.0 + e) if unit_step else e


def adiabatic_xi(params: AdiabaticParams, t, unit_step=True, jost_normalized=False):
    """Adiabatic (WKB plus Stokes switching) solution.

    ``sqrt(w0/omega(t)) {exp(-i Phi(t)) + e^{-w0 T g} U(t) exp(+i Phi(t))}`` with
    ``Phi = int_0^t omega``. ``jost_normalized`` multiplies by the constant
    phase that makes the incident wave tend to ``exp(-i w0 t)`` as ``t -> -inf``.
    """
    t = np.asarray(t, dtype=float)
    w0, W, T = params.omega0, params.Omega, params.T
    om = np.sqrt(w0 * w0 - W * W / np.cosh(t / T) ** 2)
    ph = wkb_phase(params, t)
    out = np.sqrt(w0 / om) * (np.exp(-1j * ph) + adiabatic_B(params) * stokes_step(params, t, unit_step) * np.exp(1j * ph))
    if jost_normalized:
        out = out * cmath.exp(1j * wkb_phase_offset(params))
    return out if out.ndim else complex(out)


def adiabatic_displacement(params: AdiabaticParams, force, t):
    """Displacement for a short force acting while the slow drive is on.

    ``alpha = (i e^{-i w0 t}/sqrt(2 m w_eff)) [e^{i w_eff t_f} f~(w_eff)
    - e^{-i w_eff t_f} f~*(w_eff) e^{-w0 T g} erfc(t_f/T_S)]``.
    """
    if force.is_null:
        return 0j
    we, tf = params.omega_eff, force.t_f
    f = complex(force.fourier(we))
    bracket = (cmath.exp(1j * we * tf) * f
               - cmath.exp(-1j * we * tf) * f.conjugate() * adiabatic_B(params) * erfc(tf / params.T_S))
    return 1j * cmath.exp(-1j * params.omega0 * t) / math.sqrt(2 * force.m * we) * bracket


def adiabatic_validity(params: AdiabaticParams, force, factor=0.2):
    """True if the force is short and central compared with ``T_S`` and ``T``."""
    if force.is_null:
        return True
    width = force.T2 if force.kind == GAUSSCOS else 0.5 * (force.support()[1] - force.support()[0])
    scale = factor * min(params.T_S, params.T)
    return width <= scale and abs(force.t_f) <= params.T


__all__ = [
    "born_xi", "born_coefficients", "response_function", "born_displacement",
    "abrupt_coefficients", "abrupt_xi", "abrupt_xi_dot", "abrupt_calI", "abrupt_displacement",
    "AdiabaticParams", "turning_point_integral", "adiabatic_B", "wkb_phase", "wkb_phase_offset",
    "stokes_step", "adiabatic_xi", "adiabatic_displacement", "adiabatic_validity",
]
