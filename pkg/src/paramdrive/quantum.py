"""Quantum outputs from classical Jost data: Bogolyubov map, displacement, occupations.

Units with hbar = 1; ladder operators ``a = sqrt(m w0/2) (x + i p/(m w0))`` at
asymptotic times where ``omega = omega0``.
"""

import cmath
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

from .errors import ConvergenceError, InconsistencyError, PreconditionError


@dataclass(frozen=True)
class LadderMap:
    """``a(t) = u a(t0) + v a(t0)^dagger + alpha``."""

    u: complex
    v: complex
    alpha: complex = 0j
    t0: float = 0.0
    t: float = 0.0
    m: float = 1.0
    omega0: float = 1.0

    @property
    def bogolyubov_defect(self):
        return abs(abs(self.u) ** 2 - abs(self.v) ** 2 - 1.0)


@dataclass(frozen=True)
class OscillatorState:
    """Squeezed coherent state reached from the vacuum."""

    squeeze_r: float
    squeeze_phase: float
    displacement: complex
    occupation: float


def bogolyubov_from_scattering(A, B, t0, t, omega0):
    """``u = A e^{-i w0 (t - t0)}``, ``v = conj(B) e^{-i w0 (t + t0)}``."""
    u = A * cmath.exp(-1j * omega0 * (t - t0))
    v = B.conjugate() * cmath.exp(-1j * omega0 * (t + t0))
    return complex(u), complex(v)


def _prefactor(omega0, m, t):
    return 1j * cmath.exp(-1j * omega0 * t) / math.sqrt(2.0 * m * omega0)


def _check_window(jost, force, t0, t):
    lo, hi = force.support()
    slack = 1e-12 * max(1.0, abs(t0), abs(t))
    if lo < t0 - slack or hi > t + slack:
        raise PreconditionError(f"force support [{lo:g}, {hi:g}] not inside [t0, t] = [{t0:g}, {t}]")
    if lo < jost.t_min - slack or hi > jost.t_max + slack:
        raise PreconditionError(
            f"force support [{lo:g}, {hi:g}] not covered by the Jost grid [{jost.t_min:g}, {jost.t_max:g}]"
        )
    return lo, hi


def _support_nodes(jost, lo, hi):
    t = jost.t
    i0 = max(int(np.searchsorted(t, lo, side="right")) - 1, 0)
    i1 = min(int(np.searchsorted(t, hi, side="left")), len(t) - 1)
    nodes = t[i0:i1 + 1]
    if (len(nodes) - 1) % 2:  # Simpson likes an even number of panels
        if i1 + 1 < len(t):
            nodes = t[i0:i1 + 2]
        elif i0 > 0:
            nodes = t[i0 - 1:i1 + 1]
    return nodes


def displacement_integral(jost, force, t0, t, rtol=1e-10, max_refine=6):
    """``int dtau F(tau) [A conj(xi) - conj(B) xi]`` over the force support.

    Composite Simpson on the Jost nodes covering the support, checked against
    the half-resolution rule; nodes are doubled (Hermite midpoints) until the
    Richardson estimate is below ``rtol`` times ``int |integrand|``.
    """
    if force.is_null:
        return 0j
    lo, hi = _check_window(jost, force, t0, t)
    nodes = _support_nodes(jost, lo, hi)
    if len(nodes) < 5:
        nodes = np.linspace(nodes[0], nodes[-1], 5)
    A, Bc = jost.A, jost.B.conjugate()
    est = float("inf")
    for _ in range(max_refine + 1):
        xi = jost.xi_at(nodes)
        f = force.value(nodes) * (A * np.conj(xi) - Bc * xi)
        total = simpson(f, x=nodes)
        coarse = simpson(f[::2], x=nodes[::2])
        est = abs(total - coarse) / 15.0
        scale = simpson(np.abs(f), x=nodes) + 1e-300
        if est <= rtol * scale:
            return complex(total)
        mid = 0.5 * (nodes[1:] + nodes[:-1])
        nodes = np.sort(np.concatenate([nodes, mid]))
    raise ConvergenceError(f"displacement quadrature error {est:.3e} above tolerance", estimate=est)


def displacement(jost, force, t0=None, t=None, rtol=1e-10):
    """Displacement ``alpha`` of the ladder operator at time ``t``.

    ``alpha = (i e^{-i w0 t}/sqrt(2 m w0)) int_{t0}^{t} F [A conj(xi) - conj(B) xi]``.

    Parameters
    ----------
    jost : JostSolution
    force : ForceProfile
        Its support must lie inside ``[t0, t]`` and inside the Jost grid.
    t0, t : float, optional
        Initial and final times; default to the grid ends.

    Raises
    ------
    PreconditionError
        Coverage violation.
    ConvergenceError
        Quadrature did not meet ``rtol``.
    """
    t0 = jost.t_min if t0 is None else t0
    t = jost.t_max if t is None else t
    if force.is_null:
        return 0j
    return _prefactor(jost.omega0, force.m, t) * displacement_integral(jost, force, t0, t, rtol)


def displacement_sweep(jost, force, t_f_values, t0=None, t=None, threads=None):
    """``alpha`` for the force re-centred at each ``t_f`` (shared Jost solution)."""
    t_f_values = list(t_f_values)
    work = lambda tf: displacement(jost, force.shifted(tf), t0, t)
    if threads is None or threads <= 1:
        return np.array([work(tf) for tf in t_f_values], dtype=complex)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return np.array(list(pool.map(work, t_f_values)), dtype=complex)


def ladder_map(jost, force=None, t0=None, t=None):
    t0 = jost.t_min if t0 is None else t0
    t = jost.t_max if t is None else t
    u, v = bogolyubov_from_scattering(jost.A, jost.B, t0, t, jost.omega0)
    alpha, m = 0j, 1.0
    if force is not None:
        m = force.m
        alpha = displacement(jost, force, t0, t)
    return LadderMap(u, v, alpha, t0, t, m, jost.omega0)


def occupation_vacuum(lmap):
    """Mean quanta at ``t`` starting from the vacuum: ``|v|^2 + |alpha|^2``."""
    return abs(lmap.v) ** 2 + abs(lmap.alpha) ** 2


def occupation_fock(n, lmap, atol=0.0):
    """Quanta gained from the Fock state ``|n>``: ``(2n + 1)|v|^2``."""
    if n < 0 or int(n) != n:
        raise PreconditionError("n must be a non-negative integer")
    if abs(lmap.alpha) > atol:
        raise PreconditionError("Fock-state gain is only defined without forcing (alpha = 0)")
    return (2 * n + 1) * abs(lmap.v) ** 2


def occupation_coherent(alpha0, A, B, t0, omega0):
    """Quanta gained from a coherent state ``alpha0`` prepared at ``t0`` (no force).

    ``(2|a0|^2 + 1)|B|^2 + 2|A||B||a0|^2 cos(2 w0 t0 + 2 phi)``,
    ``a0^2 A B = |a0|^2 |A||B| e^{2 i phi}``.
    """
    a2 = abs(alpha0) ** 2
    base = (2.0 * a2 + 1.0) * abs(B) ** 2
    z = alpha0 * alpha0 * A * B
    if abs(z) == 0.0:
        return base
    two_phi = cmath.phase(z)
    return base + 2.0 * abs(A) * abs(B) * a2 * math.cos(2.0 * omega0 * t0 + two_phi)


def state_from_map(lmap, tol=1e-8):
    """Squeezed coherent state produced from the vacuum by ``lmap``.

    Raises
    ------
    InconsistencyError
        ``|u|^2 - |v|^2`` differs from 1 by more than ``tol`` (relative to ``|u|^2``).
    """
    if lmap.bogolyubov_defect > tol * max(1.0, abs(lmap.u) ** 2):
        raise InconsistencyError(f"|u|^2 - |v|^2 - 1 = {abs(lmap.u)**2 - abs(lmap.v)**2 - 1:.3e}")
    r = math.asinh(abs(lmap.v))
    phase = cmath.phase(lmap.u.conjugate() * lmap.v) if lmap.v != 0 else 0.0
    return OscillatorState(r, phase, complex(lmap.alpha), occupation_vacuum(lmap))


def late_force_displacement(force, t, omega0):
    """Displacement when the force acts after the drive: ``pref e^{i w0 t_f} f~(w0)``."""
    if force.is_null:
        return 0j
    f = complex(force.fourier(omega0))
    return _prefactor(omega0, force.m, t) * cmath.exp(1j * omega0 * force.t_f) * f


def early_force_displacement(force, A, B, t, omega0):
    """Displacement when the force acts before the drive.

    ``pref [A f~ e^{i w0 t_f} - conj(B) conj(f~) e^{-i w0 t_f}]``.
    """
    if force.is_null:
        return 0j
    f = complex(force.fourier(omega0))
    e = cmath.exp(1j * omega0 * force.t_f)
    return _prefactor(omega0, force.m, t) * (A * f * e - B.conjugate() * f.conjugate() / e)


def early_force_occupation(force, A, B, t, omega0):
    return abs(B) ** 2 + abs(early_force_displacement(force, A, B, t, omega0)) ** 2


def classical_alpha(x, p, m, omega0):
    """``sqrt(m w0/2) (x + i p/(m w0))``: ladder amplitude of a classical state."""
    return math.sqrt(m * omega0 / 2.0) * (x + 1j * p / (m * omega0))


__all__ = [
    "LadderMap", "OscillatorState", "bogolyubov_from_scattering", "displacement_integral",
    "displacement", "displacement_sweep", "ladder_map", "occupation_vacuum", "occupation_fock",
    "occupation_coherent", "state_from_map", "late_force_displacement",
    "early_force_displacement", "early_force_occupation", "classical_alpha",
]
