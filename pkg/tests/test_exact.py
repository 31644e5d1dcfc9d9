import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from paramdrive import (MINUS, DomainError, FrequencyProfile, SechParams, exact_coefficients,
                        exact_jost_solution, exact_xi, solve_jost)
from paramdrive.exact import exact_xi_and_derivative, sech_s
from paramdrive.profiles import default_grid


def _mp_coefficients(w0, Om, T):
    x = mp.mpf(w0) * T
    s = (mp.sqrt(1 + 4 * (mp.mpf(Om) * T) ** 2) - 1) / 2
    A = mp.gamma(1 - 1j * x) * mp.gamma(-1j * x) / (mp.gamma(-1j * x - s) * mp.gamma(-1j * x + s + 1))
    B = 1j * mp.sin(mp.pi * s) / mp.sinh(mp.pi * x)
    return complex(A), complex(B)


def test_fig1_upper_values():
    p = SechParams(6 * math.pi, 1.0, 0.5)
    assert p.s == pytest.approx(0.20711, abs=1e-5)
    _, B = exact_coefficients(p)
    assert abs(B) == pytest.approx(1.7e-13, rel=0.03)
    assert abs(B) == pytest.approx(abs(_mp_coefficients(6 * math.pi, 1.0, 0.5)[1]), rel=1e-12)


def test_no_drive():
    p = SechParams(1.4, 0.0, 0.7)
    assert exact_coefficients(p) == (1, 0)
    t = np.linspace(-5, 5, 21)
    assert exact_xi(p, t) == pytest.approx(np.exp(-1.4j * t), abs=1e-13)


def test_gamma_pole_raises():
    with pytest.raises(DomainError):
        exact_coefficients(SechParams(1e-320, 1.0, 1e-10))


@pytest.mark.parametrize("x", [0.3, 1, 3, 10])
@pytest.mark.parametrize("y", [0.1, 0.5, 1, 2])
def test_unitarity_and_mpmath_oracle(x, y):
    T = 1.0
    A, B = exact_coefficients(SechParams(x / T, y / T, T))
    assert abs(abs(A) ** 2 - abs(B) ** 2 - 1) < 1e-10
    Am, Bm = _mp_coefficients(x / T, y / T, T)
    assert abs(A - Am) <= 1e-11 * abs(Am)
    assert abs(B - Bm) <= 1e-11 * abs(Bm)


@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_reflectionless_integer_s(n):
    T = 0.9
    Om = math.sqrt(n * (n + 1)) / T
    p = SechParams(2.0, Om, T)
    assert p.s == pytest.approx(n, abs=1e-12)
    assert abs(exact_coefficients(p)[1]) < 1e-12


def test_adiabatic_suppression_monotone():
    y = 0.8
    mags = [abs(exact_coefficients(SechParams(x, y, 1.0))[1]) for x in np.linspace(0.2, 8, 30)]
    assert all(b > a for a, b in zip(mags[1:], mags[:-1]))


@settings(max_examples=30, deadline=None)
@given(x=st.floats(0.2, 6), y=st.floats(0.05, 3), t=st.floats(-4, 4))
def test_ode_residual(x, y, t):
    T = 1.0
    p = SechParams(x, y, T)
    prof = FrequencyProfile.sech(x, y, T)
    h = 2e-3
    f = exact_xi(p, t + h * np.arange(-2, 3))
    d2 = (-f[0] + 16 * f[1] - 30 * f[2] + 16 * f[3] - f[4]) / (12 * h ** 2)  # fourth-order stencil
    assert abs(d2 + prof.omega_squared(t) * f[2]) < 1e-6 * x ** 2 * abs(f[2])


def test_analytic_derivative_matches_finite_difference():
    p = SechParams(2.0, 1.5, 0.7)
    t, h = 0.37, 1e-5
    _, d = exact_xi_and_derivative(p, t)
    fd = (exact_xi(p, t + h) - exact_xi(p, t - h)) / (2 * h)
    assert d == pytest.approx(fd, rel=1e-8)


def test_asymptotic_forms():
    p = SechParams(1.5, 1.0, 0.8)
    A, B = exact_coefficients(p)
    t = -40.0
    assert exact_xi(p, t) == pytest.approx(np.exp(-1.5j * t), abs=1e-12)
    t = 40.0
    assert exact_xi(p, t) == pytest.approx(A * np.exp(-1.5j * t) + B * np.exp(1.5j * t), abs=1e-12)


def test_normalization_against_numeric_solver():
    p = SechParams(6 * math.pi, 1.0, 0.5)
    sol = solve_jost(FrequencyProfile.sech(p.omega0, p.Omega, p.T))
    assert abs(exact_xi(p, 0.0) - sol.xi_at(0.0)) < 1e-6
    ts = np.linspace(-3, 3, 13)
    assert np.max(np.abs(exact_xi(p, ts) - sol.xi_at(ts))) < 1e-8


@pytest.mark.parametrize("y", [0.3, 0.5, 1.2])
def test_minus_sign_complex_s(y):
    w0, T = 2.0, 1.0
    p = SechParams(w0, y, T, MINUS)
    s = p.s
    assert s * (s + 1) == pytest.approx(-y ** 2, abs=1e-14)
    num = solve_jost(FrequencyProfile.sech(w0, y, T, MINUS))
    A, B = exact_coefficients(p)
    assert abs(num.A - A) < 1e-8
    assert abs(num.B - B) < 1e-8


def test_exact_jost_solution_sampling():
    prof = FrequencyProfile.sech(1.0, 0.7, 1.0)
    p = SechParams.from_profile(prof)
    sol = exact_jost_solution(p, default_grid(prof))
    assert sol.method == "exact"
    assert sol.wronskian_drift < 1e-10
    assert sech_s(0.7, 1.0) == p.s
