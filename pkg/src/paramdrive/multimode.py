"""Coupled modes ``x_i'' + w_i^2 x_i + sum_j Omega2_ij(t) x_j = F_i(t)/m``.

The ``mu``-th Jost solution starts as ``sqrt(w0/w_i) delta_{i mu} exp(-i w_i t)``
and ends as ``sqrt(w0/w_i) (A_{i mu} e^{-i w_i t} + B_{i mu} e^{+i w_i t})``,
with ``w0`` a reference scale (default: the smallest ``w_i``).
"""

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import simpson

from . import kernels
from .errors import ConfigError, ConvergenceError, PreconditionError
from .jost import extract_coefficients, hermite
from .profiles import ForceProfile, TimeGrid

_CHUNK = 4096  # RK4 steps per kernel call (bounds the sampled-coupling buffer)


@dataclass(frozen=True)
class SechPulse:
    """``amplitude * sech^2((t - t_c)/T)`` added to entries ``(i, j)`` and ``(j, i)``."""

    i: int
    j: int
    amplitude: float
    T: float
    t_c: float = 0.0


@dataclass(frozen=True)
class MultimodeSystem:
    omegas: tuple
    pulses: tuple = ()
    forces: tuple = ()
    m: float = 1.0
    omega_ref: Optional[float] = None
    coupling_fn: Optional[object] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        om = tuple(float(w) for w in self.omegas)
        if not om or any(w <= 0 for w in om):
            raise ValueError("omegas must be positive")
        object.__setattr__(self, "omegas", om)
        n = len(om)
        for p in self.pulses:
            if not (0 <= p.i < n and 0 <= p.j < n) or p.T <= 0:
                raise ValueError(f"bad pulse {p}")
        forces = tuple(self.forces) or tuple(ForceProfile.null(self.m) for _ in om)
        if len(forces) != n:
            raise ValueError("need one force per mode")
        object.__setattr__(self, "forces", forces)
        if self.omega_ref is None:
            object.__setattr__(self, "omega_ref", min(om))
        if not self.m > 0 or not self.omega_ref > 0:
            raise ValueError("m and omega_ref must be positive")

    @property
    def n(self):
        return len(self.omegas)

    def coupling(self, t):
        """``Omega2_ij(t)``; shape ``(n, n)`` for scalar ``t``, ``(len(t), n, n)`` otherwise."""
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.zeros((t_arr.size, self.n, self.n))
        with np.errstate(over="ignore"):
            for p in self.pulses:
                s = p.amplitude / np.cosh((t_arr - p.t_c) / p.T) ** 2
                out[:, p.i, p.j] += s
                if p.i != p.j:
                    out[:, p.j, p.i] += s
        if self.coupling_fn is not None:
            out += np.asarray(self.coupling_fn(t_arr), dtype=float).reshape(out.shape)
        return out[0] if np.ndim(t) == 0 else out

    def stiffness(self, t):
        return self.coupling(t) + np.diag(np.square(self.omegas))

    def support(self, span=30.0):
        if not self.pulses:
            return (-span / min(self.omegas), span / min(self.omegas))
        lo = min(p.t_c - span * p.T for p in self.pulses)
        hi = max(p.t_c + span * p.T for p in self.pulses)
        return lo, hi

    def force_support(self):
        sups = [f.support() for f in self.forces if not f.is_null]
        if not sups:
            return None
        return min(s[0] for s in sups), max(s[1] for s in sups)


@dataclass(frozen=True)
class MultimodeJost:
    t: np.ndarray
    xi: np.ndarray  # (N, i, mu)
    xi_dot: np.ndarray
    A: np.ndarray
    B: np.ndarray
    omegas: np.ndarray
    omega_ref: float
    error_estimate: float
    grid: Optional[TimeGrid] = None

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def t_min(self):
        return float(self.t[0])

    @property
    def t_max(self):
        return float(self.t[-1])

    def xi_at(self, t):
        return hermite(self.t, self.xi, self.xi_dot, t, uniform=self.grid is not None)[0]


def multimode_grid(system, tol=1e-10, span=30.0, points_per_period=40):
    lo, hi = system.support(span)
    fs = system.force_support()
    if fs is not None:
        lo, hi = min(lo, fs[0]), max(hi, fs[1])
    peak = sum(abs(p.amplitude) for p in system.pulses)
    wmax = math.sqrt(max(system.omegas) ** 2 + peak)
    length = hi - lo
    h = 2.0 * math.pi / wmax / points_per_period
    h = min(h, (120.0 * tol / (wmax * length)) ** 0.25 / wmax)
    if system.pulses:
        h = min(h, min(p.T for p in system.pulses) / 200.0)
    n = int(math.ceil(length / h))
    n += (-n) % 4
    return TimeGrid(lo, hi, max(n, 4))


def _integrate(w2, h, y0, dy0):
    """Chunked matrix RK4 over the half-step samples ``w2``."""
    n = (w2.shape[0] - 1) // 2
    ys, dys = [y0[None]], [dy0[None]]
    y, v = y0, dy0
    for k0 in range(0, n, _CHUNK):
        k1 = min(n, k0 + _CHUNK)
        seg = np.ascontiguousarray(w2[2 * k0:2 * k1 + 1])
        yy, vv = kernels.rk4_matrix(seg, float(h), np.ascontiguousarray(y), np.ascontiguousarray(v))
        ys.append(yy[1:])
        dys.append(vv[1:])
        y, v = yy[-1], vv[-1]
    return np.concatenate(ys), np.concatenate(dys)


def _extract(system, xi_end, dxi_end, t_end):
    om = np.asarray(system.omegas)[:, None]
    norm = np.sqrt(system.omega_ref / om)
    return extract_coefficients(xi_end / norm, dxi_end / norm, t_end, om)


def solve_multimode_jost(system, grid=None, tol=1e-9, flat_eps=1e-10, check=True, max_refine=3):
    """Integrate the ``n`` matrix Jost solutions with RK4 on a uniform grid.

    Raises
    ------
    PreconditionError
        The coupling is not negligible at the grid ends.
    ConvergenceError
        The step-doubling estimate on ``A``, ``B`` exceeds ``tol``.
    """
    auto = grid is None
    if auto:
        grid = multimode_grid(system, tol=tol)
    wmin2 = min(system.omegas) ** 2
    for te in (grid.t_min, grid.t_max):
        if np.max(np.abs(system.coupling(te))) > flat_eps * wmin2:
            raise PreconditionError(f"coupling not negligible at t={te}")
    om = np.asarray(system.omegas)
    norm = np.sqrt(system.omega_ref / om)
    for attempt in range(max_refine + 1):
        w2 = system.stiffness(grid.half_times())
        start = np.diag(norm * np.exp(-1j * om * grid.t_min)).astype(complex)
        dstart = np.diag(-1j * om) @ start
        xi, dxi = _integrate(w2, grid.h, start, dstart)
        A, B = _extract(system, xi[-1], dxi[-1], grid.t_max)
        err = float("nan")
        if check:
            xc, dxc = _integrate(np.ascontiguousarray(w2[::2]), 2 * grid.h, start, dstart)
            Ac, Bc = _extract(system, xc[-1], dxc[-1], grid.t_max)
            err = float(max(np.max(np.abs(A - Ac)), np.max(np.abs(B - Bc)))) / 15.0
            if err > tol:
                if auto and attempt < max_refine:
                    grid = grid.refined(2)
                    continue
                raise ConvergenceError(f"multimode error estimate {err:.3e} exceeds {tol:.1e}", estimate=err)
        break
    return MultimodeJost(grid.times(), xi, dxi, A, B, om, system.omega_ref, err, grid)


def unitarity_defect(mj):
    """``max |A^H A - B^H B - 1|`` entrywise."""
    A, B = mj.A, mj.B
    S = A.conj().T @ A - B.conj().T @ B - np.eye(A.shape[1])
    return float(np.max(np.abs(S)))


def multimode_green(mj, t, tau, return_complex=False):
    """Retarded Green's matrix ``G_ij(t, tau)`` built from the Jost solutions."""
    n = mj.n
    if t <= tau:
        return np.zeros((n, n), dtype=complex if return_complex else float)
    Xt = mj.xi_at(t)
    Xs = mj.xi_at(tau)
    G = (np.conj(Xt) @ Xs.T - Xt @ np.conj(Xs).T) / (2j * mj.omega_ref)
    return G if return_complex else G.real


def _source_overlaps(system, mj, t0, t, rtol=1e-10, max_refine=6):
    """``C_mu = sum_j int xi^mu_j F_j`` over the union of force supports."""
    fs = system.force_support()
    if fs is None:
        return np.zeros(system.n, dtype=complex)
    lo, hi = fs
    if lo < t0 or hi > t:
        raise PreconditionError("force supports must lie inside [t0, t]")
    if lo < mj.t_min or hi > mj.t_max:
        raise PreconditionError("force supports not covered by the Jost grid")
    tg = mj.t
    i0 = max(int(np.searchsorted(tg, lo, side="right")) - 1, 0)
    i1 = min(int(np.searchsorted(tg, hi, side="left")), len(tg) - 1)
    nodes = tg[i0:i1 + 1]
    if len(nodes) < 5:
        nodes = np.linspace(nodes[0], nodes[-1], 5)
    if (len(nodes) - 1) % 2:
        nodes = np.linspace(nodes[0], nodes[-1], len(nodes) + 1)
    est = float("inf")
    for _ in range(max_refine + 1):
        X = mj.xi_at(nodes)  # (N, j, mu)
        F = np.stack([f.value(nodes) for f in system.forces], axis=1)  # (N, j)
        integrand = np.einsum("kjm,kj->km", X, F)
        total = simpson(integrand, x=nodes, axis=0)
        coarse = simpson(integrand[::2], x=nodes[::2], axis=0)
        est = float(np.max(np.abs(total - coarse))) / 15.0
        scale = float(np.max(simpson(np.abs(integrand), x=nodes, axis=0))) + 1e-300
        if est <= rtol * scale:
            return total
        mid = 0.5 * (nodes[1:] + nodes[:-1])
        nodes = np.sort(np.concatenate([nodes, mid]))
    raise ConvergenceError("multimode displacement quadrature did not converge", estimate=est)


def multimode_evolution(system, mj, t0=None, t=None):
    """Bogolyubov matrices and displacements at ``t`` for operators set at ``t0``.

    ``U_{i mu} = A_{i mu} e^{-i w_i t} e^{i w_mu t0}``,
    ``V_{i mu} = conj(B_{i mu}) e^{-i w_i t} e^{-i w_mu t0}``,
    ``alpha_i = (i e^{-i w_i t}/sqrt(2 m w0)) sum_mu [A_{i mu} conj(C_mu) - conj(B_{i mu}) C_mu]``
    with ``C_mu = sum_j int xi^mu_j F_j``.

    Returns
    -------
    U, V : (n, n) complex arrays
    alphas : (n,) complex array
    """
    t0 = mj.t_min if t0 is None else t0
    t = mj.t_max if t is None else t
    om = mj.omegas
    late = np.exp(-1j * om * t)[:, None]
    U = mj.A * late * np.exp(1j * om * t0)[None, :]
    V = np.conj(mj.B) * late * np.exp(-1j * om * t0)[None, :]
    C = _source_overlaps(system, mj, t0, t)
    pref = 1j * np.exp(-1j * om * t) / math.sqrt(2.0 * system.m * mj.omega_ref)
    alphas = pref * (mj.A @ np.conj(C) - np.conj(mj.B) @ C)
    return U, V, alphas


def multimode_occupations(V, alphas):
    """Per-mode quanta from the vacuum: ``diag(V V^H) + |alpha|^2``."""
    return np.real(np.einsum("im,im->i", V, np.conj(V))) + np.abs(alphas) ** 2


def _force_from_dict(d, m):
    kind = d.get("kind", "gausscos")
    if kind == "null":
        return ForceProfile.null(m)
    if kind == "gausscos":
        return ForceProfile.gausscos(float(d["F0"]), float(d["omega_f"]), float(d.get("t_f", 0.0)),
                                     float(d.get("T2", 1.0)), m)
    if kind == "tabulated":
        return ForceProfile.from_csv(d["path"], t_f=float(d.get("t_f", 0.0)), m=m)
    raise ConfigError(f"force: unknown kind {kind!r}")


def system_from_dict(d):
    """Build a :class:`MultimodeSystem` from a JSON-style mapping (0-based indices)."""
    try:
        omegas = [float(w) for w in d["omegas"]]
        m = float(d.get("m", 1.0))
        pulses = tuple(
            SechPulse(int(p["i"]), int(p["j"]), float(p["amplitude"]), float(p["T"]), float(p.get("t_c", 0.0)))
            for p in d.get("pulses", [])
        )
        forces = [ForceProfile.null(m) for _ in omegas]
        for f in d.get("forces", []):
            mode = int(f["mode"])
            if not 0 <= mode < len(omegas):
                raise ConfigError(f"forces: mode {mode} out of range")
            forces[mode] = _force_from_dict(f, m)
        return MultimodeSystem(tuple(omegas), pulses, tuple(forces), m, d.get("omega_ref"))
    except KeyError as exc:
        raise ConfigError(f"multimode system: missing field {exc}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"multimode system: {exc}") from None


def load_system(path):
    with open(path, encoding="utf-8") as fh:
        return system_from_dict(json.load(fh))


def write_complex_matrix(path, M, header_extra=None):
    """CSV with one row per ``i`` and ``re_mu, im_mu`` column pairs (17 digits)."""
    M = np.atleast_2d(np.asarray(M, dtype=complex))
    cols = ["row"]
    for mu in range(M.shape[1]):
        cols += [f"re_{mu}", f"im_{mu}"]
    if header_extra:
        cols += list(header_extra)
    lines = [",".join(cols)]
    for i, row in enumerate(M):
        vals = [str(i)]
        for z in row:
            vals += [f"{z.real:.17g}", f"{z.imag:.17g}"]
        lines.append(",".join(vals))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


__all__ = [
    "SechPulse", "MultimodeSystem", "MultimodeJost", "multimode_grid", "solve_multimode_jost",
    "unitarity_defect", "multimode_green", "multimode_evolution", "multimode_occupations",
    "system_from_dict", "load_system", "write_complex_matrix",
]
