"""Numerical Jost solutions of ``xi'' + omega^2(t) xi = 0``.

``xi -> exp(-i w0 t)`` before the drive and ``A exp(-i w0 t) + B exp(+i w0 t)``
after it. The fixed-step RK4 path runs in the compiled kernel when available;
:func:`solve_jost_adaptive` is an independent error-controlled Dormand-Prince
integrator used for cross-checks.
"""

import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import cumulative_simpson, simpson

from . import kernels
from .errors import ConvergenceError, OutOfRangeError, PreconditionError
from .profiles import SECH, CONSTANT, TimeGrid, default_grid


def extract_coefficients(xi, xi_dot, t, omega0):
    """Solve ``xi = A e^{-iwt} + B e^{iwt}``, ``xi' = -iw A e^{-iwt} + iw B e^{iwt}``."""
    e = np.exp(-1j * omega0 * t)
    A = (1j * omega0 * xi - xi_dot) / (2j * omega0 * e)
    B = (1j * omega0 * xi + xi_dot) * e / (2j * omega0)
    return A, B


def hermite(t_nodes, y, dy, t, uniform=False):
    """Cubic Hermite interpolation of ``y`` (and its derivative) at ``t``."""
    t = np.asarray(t, dtype=float)
    lo, hi = t_nodes[0], t_nodes[-1]
    slack = 1e-12 * max(1.0, abs(lo), abs(hi))
    if np.any(t < lo - slack) or np.any(t > hi + slack):
        raise OutOfRangeError(f"time outside solution range [{lo}, {hi}]")
    t = np.clip(t, lo, hi)
    if uniform:
        h = (hi - lo) / (len(t_nodes) - 1)
        k = np.minimum(((t - lo) / h).astype(np.int64), len(t_nodes) - 2)
    else:
        k = np.clip(np.searchsorted(t_nodes, t, side="right") - 1, 0, len(t_nodes) - 2)
    t0 = t_nodes[k]
    d = t_nodes[k + 1] - t0
    s = (t - t0) / d
    extra = (1,) * (np.ndim(y) - 1)  # broadcast over trailing axes of y
    s, d = s.reshape(s.shape + extra), d.reshape(d.shape + extra)
    s2, s3 = s * s, s * s * s
    y0, y1, m0, m1 = y[k], y[k + 1], dy[k] * d, dy[k + 1] * d
    val = (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * m0 + (-2 * s3 + 3 * s2) * y1 + (s3 - s2) * m1
    der = ((6 * s2 - 6 * s) * y0 + (3 * s2 - 4 * s + 1) * m0 + (-6 * s2 + 6 * s) * y1
           + (3 * s2 - 2 * s) * m1) / d
    return val, der


@dataclass(frozen=True)
class JostSolution:
    """Sampled Jost solution with its scattering data and diagnostics."""

    t: np.ndarray
    xi: np.ndarray
    xi_dot: np.ndarray
    A: complex
    B: complex
    omega0: float
    wronskian_drift: float
    error_estimate: float
    grid: Optional[TimeGrid] = None
    method: str = "rk4"

    @property
    def flux_defect(self):
        return abs(abs(self.A) ** 2 - abs(self.B) ** 2 - 1.0)

    @property
    def t_min(self):
        return float(self.t[0])

    @property
    def t_max(self):
        return float(self.t[-1])

    def xi_at(self, t):
        val, _ = hermite(self.t, self.xi, self.xi_dot, t, uniform=self.grid is not None)
        return val

    def xi_and_derivative_at(self, t):
        return hermite(self.t, self.xi, self.xi_dot, t, uniform=self.grid is not None)

    def save(self, prefix):
        """Write ``<prefix>_jost.csv`` and the ``<prefix>_jost.json`` sidecar."""
        data = np.column_stack([self.t, self.xi.real, self.xi.imag, self.xi_dot.real, self.xi_dot.imag])
        csv_path = f"{prefix}_jost.csv"
        np.savetxt(csv_path, data, delimiter=",", fmt="%.17g",
                   header="t,re_xi,im_xi,re_xi_dot,im_xi_dot", comments="")
        meta = {
            "A": [self.A.real, self.A.imag],
            "B": [self.B.real, self.B.imag],
            "omega0": self.omega0,
            "flux_defect": self.flux_defect,
            "wronskian_drift": self.wronskian_drift,
            "error_estimate": self.error_estimate,
            "method": self.method,
            "backend": kernels.BACKEND,
            "grid": None if self.grid is None else
            {"t_min": self.grid.t_min, "t_max": self.grid.t_max, "n_steps": self.grid.n_steps},
        }
        json_path = f"{prefix}_jost.json"
        with open(json_path, "w", encoding="utf-8") as fh:
            json.dump(meta, fh, indent=2)
        return csv_path, json_path

    @classmethod
    def load(cls, prefix):
        data = np.loadtxt(f"{prefix}_jost.csv", delimiter=",", skiprows=1)
        with open(f"{prefix}_jost.json", encoding="utf-8") as fh:
            meta = json.load(fh)
        grid = meta["grid"]
        return cls(
            t=data[:, 0],
            xi=data[:, 1] + 1j * data[:, 2],
            xi_dot=data[:, 3] + 1j * data[:, 4],
            A=complex(*meta["A"]),
            B=complex(*meta["B"]),
            omega0=meta["omega0"],
            wronskian_drift=meta["wronskian_drift"],
            error_estimate=meta["error_estimate"],
            grid=None if grid is None else TimeGrid(**grid),
            method=meta["method"],
        )


def wronskian_drift(xi, xi_dot, omega0):
    w = xi * np.conj(xi_dot) - xi_dot * np.conj(xi)
    return float(np.max(np.abs(w - 2j * omega0)))


def _run(w2, h, y0, dy0):
    return kernels.rk4_scalar(np.ascontiguousarray(w2, dtype=np.float64), float(h), complex(y0), complex(dy0))


def _solve_on_grid(profile, grid, check):
    w0 = profile.omega0
    w2 = profile.omega_squared(grid.half_times())
    start = np.exp(-1j * w0 * grid.t_min)
    xi, dxi = _run(w2, grid.h, start, -1j * w0 * start)
    A, B = extract_coefficients(xi[-1], dxi[-1], grid.t_max, w0)
    err = float("nan")
    if check:
        if grid.n_steps % 2 == 0:
            xc, dxc = _run(w2[::2], 2 * grid.h, start, -1j * w0 * start)
            Ac, Bc = extract_coefficients(xc[-1], dxc[-1], grid.t_max, w0)
            err = max(abs(A - Ac), abs(B - Bc)) / 15.0
        else:
            wf = profile.omega_squared(grid.refined(2).half_times())
            xf, dxf = _run(wf, grid.h / 2, start, -1j * w0 * start)
            Af, Bf = extract_coefficients(xf[-1], dxf[-1], grid.t_max, w0)
            err = max(abs(A - Af), abs(B - Bf)) * 16.0 / 15.0
    return xi, dxi, complex(A), complex(B), err


def solve_jost(profile, grid=None, tol=1e-10, check=True, max_refine=4, flat_eps=1e-10, cover=None):
    """Integrate the Jost solution with fixed-step RK4.

    Parameters
    ----------
    profile : FrequencyProfile
    grid : TimeGrid, optional
        Integration grid; the final step lands exactly on ``grid.t_max``. When
        omitted a default grid is built and refined until the error estimate
        meets ``tol``.
    tol : float
        Target absolute error on ``A`` and ``B``, estimated by step doubling.
    check : bool
        Skip the step-doubling estimate when False (``error_estimate`` is NaN).
    cover : tuple, optional
        ``(lo, hi)`` interval the default grid must include (e.g. force supports).

    Raises
    ------
    PreconditionError
        ``omega^2`` is not flat at the grid ends.
    ConvergenceError
        The error estimate exceeds ``tol`` (explicit grid, or after
        ``max_refine`` refinements of the default grid).
    """
    auto = grid is None
    if auto:
        grid = default_grid(profile, tol=tol, cover=cover)
    grid.check_flatness(profile, flat_eps)
    w0 = profile.omega0
    for attempt in range(max_refine + 1):
        xi, dxi, A, B, err = _solve_on_grid(profile, grid, check)
        if not check or err <= tol:
            break
        if not auto or attempt == max_refine:
            raise ConvergenceError(
                f"RK4 error estimate {err:.3e} exceeds tol {tol:.1e} with {grid.n_steps} steps",
                estimate=err,
            )
        grid = grid.refined(2)
    return JostSolution(
        t=grid.times(), xi=xi, xi_dot=dxi, A=A, B=B, omega0=w0,
        wronskian_drift=wronskian_drift(xi, dxi, w0), error_estimate=err, grid=grid,
    )


def solve_jost_reversed(profile, grid):
    """Integrate backward from ``t_max`` starting on ``exp(-i w0 t)``.

    Returns the coefficients ``(A', B')`` of ``exp(-i w0 t)`` and ``exp(+i w0 t)``
    at ``t_min``. For an even drive these equal ``(conj(A), conj(B))``.
    """
    w0 = profile.omega0
    w2 = profile.omega_squared(grid.half_times())[::-1]
    start = np.exp(-1j * w0 * grid.t_max)
    xi, dxi = _run(w2.copy(), -grid.h, start, -1j * w0 * start)
    A, B = extract_coefficients(xi[-1], dxi[-1], grid.t_min, w0)
    return complex(A), complex(B)


# Dormand-Prince 5(4) tableau
_DP_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_DP_B = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_DP_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)


def _scalar_omega_squared(profile):
    if profile.kind == CONSTANT:
        w2 = profile.omega0 ** 2
        return lambda t: w2
    if profile.kind == SECH:
        w2, a, T = profile.omega0 ** 2, profile.sign * profile.Omega ** 2, profile.T

        def f(t):
            c = math.cosh(t / T)
            return w2 + a / (c * c)
        return f
    return lambda t: float(profile.omega_squared(t))


def solve_jost_adaptive(profile, t_min, t_max, rtol=1e-11, atol=1e-13, h0=None,
                        max_steps=2_000_000, flat_eps=1e-10):
    """Error-controlled Dormand-Prince 5(4) Jost solve on ``[t_min, t_max]``.

    Steps are clipped so the last one ends exactly at ``t_max``. The returned
    solution is sampled at the accepted step ends.
    """
    TimeGrid(t_min, t_max, 2).check_flatness(profile, flat_eps)
    w0 = profile.omega0
    w2 = _scalar_omega_squared(profile)
    t = float(t_min)
    y = complex(np.exp(-1j * w0 * t))
    v = -1j * w0 * y
    h = h0 if h0 is not None else 0.1 / profile.omega_max()
    ts, ys, vs = [t], [y], [v]
    err_sum = 0.0
    for _ in range(max_steps):
        if t >= t_max:
            break
        h = min(h, t_max - t)
        ky = [0j] * 7
        kv = [0j] * 7
        for s in range(7):
            yi, vi = y, v
            for j, a in enumerate(_DP_A[s]):
                yi += h * a * ky[j]
                vi += h * a * kv[j]
            ky[s] = vi
            kv[s] = -w2(t + _DP_C[s] * h) * yi
        y_new = y + h * sum(b * k for b, k in zip(_DP_B, ky))
        v_new = v + h * sum(b * k for b, k in zip(_DP_B, kv))
        ey = h * sum(e * k for e, k in zip(_DP_E, ky))
        ev = h * sum(e * k for e, k in zip(_DP_E, kv)) / w0
        scale = atol + rtol * max(abs(y), abs(y_new), abs(v) / w0, abs(v_new) / w0)
        err = max(abs(ey), abs(ev)) / scale
        if err <= 1.0:
            t = t + h if t_max - t > h else t_max
            y, v = y_new, v_new
            ts.append(t)
            ys.append(y)
            vs.append(v)
            err_sum += max(abs(ey), abs(ev))
        h *= min(5.0, max(0.2, 0.9 * (err if err > 0 else 1e-10) ** -0.2))
    else:
        raise ConvergenceError(f"adaptive solve exceeded {max_steps} steps", estimate=err_sum)
    xi = np.array(ys)
    dxi = np.array(vs)
    A, B = extract_coefficients(xi[-1], dxi[-1], t_max, w0)
    return JostSolution(
        t=np.array(ts), xi=xi, xi_dot=dxi, A=complex(A), B=complex(B), omega0=w0,
        wronskian_drift=wronskian_drift(xi, dxi, w0), error_estimate=err_sum,
        grid=None, method="dopri5",
    )


def scattering_flux_defect(sol):
    """``| |A|^2 - |B|^2 - 1 |``."""
    return sol.flux_defect


def impulse_response(sol, t, tau):
    """Retarded response ``g(t, tau)`` to a unit impulse; vectorised, real-valued."""
    t = np.asarray(t, dtype=float)
    tau = np.asarray(tau, dtype=float)
    a = sol.xi_at(tau) * np.conj(sol.xi_at(t))
    g = ((a - np.conj(a)) / (2j * sol.omega0)).real
    g = np.where(t > tau, g, 0.0)
    return g if g.ndim else float(g)


@dataclass(frozen=True)
class ClassicalTrajectory:
    t: np.ndarray
    x: np.ndarray
    p: np.ndarray


def classical_trajectory(sol, x0, p0, t0, force, m=None, rtol=1e-8):
    """Trajectory from ``(x0, p0)`` at ``t0`` under the drive and ``force``.

    Homogeneous part from the Jost pair ``xi, conj(xi)``, forced part by
    superposition with the retarded impulse response. Sampled at ``t0`` and
    every grid node after it.
    """
    m = force.m if m is None else m
    w0 = sol.omega0
    support = force.support()
    if support is not None and t0 > support[0] and force.value(t0) != 0.0:
        raise PreconditionError("t0 must precede the force support")
    nodes = sol.t[sol.t > t0]
    ts = np.concatenate([[t0], nodes])
    xi, dxi = sol.xi_and_derivative_at(ts)
    xi0, dxi0 = xi[0], dxi[0]
    c = (x0 * np.conj(dxi0) - (p0 / m) * np.conj(xi0)) / (2j * w0)
    x = 2.0 * (c * xi).real
    p = 2.0 * m * (c * dxi).real
    if not force.is_null:
        integrand = xi * force.value(ts)
        # cumulative_simpson is real-only
        cum = (cumulative_simpson(integrand.real, x=ts, initial=0.0)
               + 1j * cumulative_simpson(integrand.imag, x=ts, initial=0.0))
        total = cum[-1]
        if len(ts) >= 5:
            coarse = simpson(integrand[::2], x=ts[::2])
            est = abs(total - coarse) / 15.0
            scale = simpson(np.abs(integrand), x=ts) + 1e-300
            if est > rtol * scale:
                raise ConvergenceError(
                    f"forced-response quadrature error {est:.3e} above {rtol:.1e}", estimate=est
                )
        x = x + (np.conj(xi) * cum).imag / (m * w0)
        p = p + (np.conj(dxi) * cum).imag / w0
    return ClassicalTrajectory(t=ts, x=x, p=p)
