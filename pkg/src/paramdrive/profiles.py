"""Drive profiles, force profiles and time grids.

Units: hbar = 1, default mass m = 1. Frequencies are angular (rad/time).

The Fourier convention throughout is ``ft(w) = int dt f(t) exp(+i w t)`` applied
to the *centered* force ``f(t) = F(t + t_f)``; :meth:`ForceProfile.fourier_absolute`
gives the transform of the uncentered ``F``.
"""

import csv
import dataclasses
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import trapezoid

from .errors import OutOfRangeError, PreconditionError

CONSTANT = "constant"
SECH = "sech"
TABULATED = "tabulated"

GAUSSCOS = "gausscos"
NULL = "null"

PLUS = 1
MINUS = -1

# Gaussian forces are treated as zero beyond this many widths from the center.
FORCE_SUPPORT_WIDTHS = 8.0


def _parse_sign(sign):
    if sign in (PLUS, MINUS):
        return int(sign)
    if isinstance(sign, str) and sign.lower() in ("plus", "+", "+1"):
        return PLUS
    if isinstance(sign, str) and sign.lower() in ("minus", "-", "-1"):
        return MINUS
    raise ValueError(f"sign must be 'plus' or 'minus', got {sign!r}")


def load_two_column_csv(path):
    """Read ``(t, value)`` pairs from a comma-separated file; a header row is optional."""
    ts, vs = [], []
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh)):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                t, v = float(row[0]), float(row[1])
            except (ValueError, IndexError):
                if lineno == 0:
                    continue  # header
                raise ValueError(f"{path}:{lineno + 1}: expected two numeric columns")
            ts.append(t)
            vs.append(v)
    if len(ts) < 2:
        raise ValueError(f"{path}: need at least two samples")
    return np.asarray(ts), np.asarray(vs)


def _check_samples(t, v):
    t = np.asarray(t, dtype=float)
    v = np.asarray(v, dtype=float)
    if t.ndim != 1 or t.shape != v.shape or t.size < 2:
        raise ValueError("samples must be two equal-length 1-D sequences (>= 2 points)")
    if np.any(np.diff(t) <= 0):
        raise ValueError("sample times must be strictly increasing")
    t.setflags(write=False)
    v.setflags(write=False)
    return t, v


@dataclass(frozen=True)
class FrequencyProfile:
    """Squared mode frequency as a function of time.

    ``kind`` is one of ``"constant"``, ``"sech"`` (``omega0**2 + sign * Omega**2 /
    cosh(t/T)**2``) or ``"tabulated"`` (linear interpolation of samples).
    """

    kind: str
    omega0: float
    Omega: float = 0.0
    T: float = 1.0
    sign: int = PLUS
    samples: Optional[tuple] = field(default=None, compare=False, repr=False)
    flat_tol: float = 1e-6

    def __post_init__(self):
        object.__setattr__(self, "sign", _parse_sign(self.sign))
        if self.kind not in (CONSTANT, SECH, TABULATED):
            raise ValueError(f"unknown profile kind {self.kind!r}")
        if not self.omega0 > 0:
            raise ValueError("omega0 must be positive")
        if not self.T > 0:
            raise ValueError("T must be positive")
        if not self.Omega >= 0:
            raise ValueError("Omega must be non-negative")
        if self.kind == SECH and self.sign == MINUS and not self.Omega < self.omega0:
            raise ValueError("minus-sign profile needs Omega < omega0 to stay stable")
        if self.kind == TABULATED:
            if self.samples is None:
                raise ValueError("tabulated profile needs samples")
            t, w2 = _check_samples(*self.samples)
            object.__setattr__(self, "samples", (t, w2))
            ref = self.omega0 ** 2
            if abs(w2[0] - ref) > self.flat_tol * ref or abs(w2[-1] - ref) > self.flat_tol * ref:
                raise ValueError("tabulated omega^2 must start and end at omega0^2")

    @classmethod
    def constant(cls, omega0):
        return cls(CONSTANT, omega0)

    @classmethod
    def sech(cls, omega0, Omega, T, sign=PLUS):
        return cls(SECH, omega0, Omega, T, sign)

    @classmethod
    def tabulated(cls, t, omega_sq, omega0=None, flat_tol=1e-6):
        t, w2 = _check_samples(t, omega_sq)
        if omega0 is None:
            omega0 = math.sqrt(w2[0])
        return cls(TABULATED, omega0, samples=(t, w2), flat_tol=flat_tol)

    @classmethod
    def from_csv(cls, path, omega0=None, flat_tol=1e-6):
        return cls.tabulated(*load_two_column_csv(path), omega0=omega0, flat_tol=flat_tol)

    @property
    def Omega2T(self):
        """Weight of the bump, ``Omega**2 T`` (half of ``int (omega^2 - omega0^2) dt``)."""
        return self.Omega ** 2 * self.T

    @property
    def is_flat(self):
        return self.kind == CONSTANT or (self.kind == SECH and self.Omega == 0.0)

    def omega_squared(self, t):
        t_arr = np.asarray(t, dtype=float)
        if self.kind == CONSTANT:
            out = np.full(t_arr.shape, self.omega0 ** 2)
        elif self.kind == SECH:
            with np.errstate(over="ignore"):
                out = self.omega0 ** 2 + self.sign * self.Omega ** 2 / np.cosh(t_arr / self.T) ** 2
        else:
            ts, w2 = self.samples
            if np.any(t_arr < ts[0]) or np.any(t_arr > ts[-1]):
                raise OutOfRangeError(
                    f"t outside tabulated range [{ts[0]}, {ts[-1]}]"
                )
            out = np.interp(t_arr, ts, w2)
        return out if out.ndim else float(out)

    def omega_max(self):
        if self.kind == TABULATED:
            return math.sqrt(float(np.max(self.samples[1])))
        if self.kind == SECH and self.sign == PLUS:
            return math.hypot(self.omega0, self.Omega)
        return self.omega0

    def drive_support(self, span=30.0):
        """Interval outside of which the drive is flat to roundoff."""
        if self.kind == TABULATED:
            return float(self.samples[0][0]), float(self.samples[0][-1])
        if self.kind == SECH:
            return -span * self.T, span * self.T
        return 0.0, 0.0


def omega_squared(profile, t):
    """``omega^2(t)`` for ``profile``; vectorised over ``t``."""
    return profile.omega_squared(t)


@dataclass(frozen=True)
class ForceProfile:
    """Classical source ``F(t)``.

    ``"gausscos"``: ``F0 cos[omega_f (t - t_f)] exp[-(t - t_f)^2 / T2^2]``;
    ``"tabulated"``: linear interpolation, zero outside the samples;
    ``"null"``: identically zero.
    """

    kind: str = NULL
    F0: float = 0.0
    omega_f: float = 0.0
    t_f: float = 0.0
    T2: float = 1.0
    m: float = 1.0
    samples: Optional[tuple] = field(default=None, compare=False, repr=False)
    end_tol: float = 1e-8

    def __post_init__(self):
        if self.kind not in (GAUSSCOS, TABULATED, NULL):
            raise ValueError(f"unknown force kind {self.kind!r}")
        if not self.m > 0:
            raise ValueError("mass must be positive")
        if self.kind == GAUSSCOS and not self.T2 > 0:
            raise ValueError("T2 must be positive")
        if self.kind == TABULATED:
            if self.samples is None:
                raise ValueError("tabulated force needs samples")
            t, f = _check_samples(*self.samples)
            object.__setattr__(self, "samples", (t, f))
            scale = max(float(np.max(np.abs(f))), 1e-300)
            if abs(f[0]) > self.end_tol * scale or abs(f[-1]) > self.end_tol * scale:
                raise ValueError("tabulated force must vanish at both ends")

    @classmethod
    def null(cls, m=1.0):
        return cls(NULL, m=m)

    @classmethod
    def gausscos(cls, F0, omega_f, t_f, T2, m=1.0):
        return cls(GAUSSCOS, F0, omega_f, t_f, T2, m)

    @classmethod
    def tabulated(cls, t, values, t_f=0.0, m=1.0, end_tol=1e-8):
        return cls(TABULATED, t_f=t_f, m=m, samples=_check_samples(t, values), end_tol=end_tol)

    @classmethod
    def from_csv(cls, path, t_f=0.0, m=1.0, end_tol=1e-8):
        return cls.tabulated(*load_two_column_csv(path), t_f=t_f, m=m, end_tol=end_tol)

    @property
    def is_null(self):
        return self.kind == NULL or (self.kind == GAUSSCOS and self.F0 == 0.0)

    def shifted(self, t_f):
        """Same force re-centred at ``t_f``."""
        if self.kind == TABULATED:
            t, f = self.samples
            dt = t_f - self.t_f
            return dataclasses.replace(self, t_f=t_f, samples=(t + dt, f))
        return dataclasses.replace(self, t_f=t_f)

    def scaled(self, factor):
        if self.kind == TABULATED:
            t, f = self.samples
            return dataclasses.replace(self, samples=(t, f * factor))
        return dataclasses.replace(self, F0=self.F0 * factor)

    def support(self):
        """``(lo, hi)`` outside which ``F`` is negligible, or ``None`` for a null force."""
        if self.is_null:
            return None
        if self.kind == GAUSSCOS:
            w = FORCE_SUPPORT_WIDTHS * self.T2
            return self.t_f - w, self.t_f + w
        t = self.samples[0]
        return float(t[0]), float(t[-1])

    def value(self, t):
        t_arr = np.asarray(t, dtype=float)
        if self.is_null:
            out = np.zeros(t_arr.shape)
        elif self.kind == GAUSSCOS:
            u = t_arr - self.t_f
            out = self.F0 * np.cos(self.omega_f * u) * np.exp(-(u / self.T2) ** 2)
        else:
            ts, fs = self.samples
            out = np.interp(t_arr, ts, fs, left=0.0, right=0.0)
        return out if out.ndim else float(out)

    def fourier(self, omega):
        """Transform of the centred force, ``int dt F(t + t_f) exp(i omega t)``."""
        w = np.asarray(omega, dtype=float)
        if self.is_null:
            out = np.zeros(w.shape, dtype=complex)
        elif self.kind == GAUSSCOS:
            T2 = self.T2
            pref = self.F0 * math.sqrt(math.pi) * T2 / 2.0
            out = pref * (
                np.exp(-((w - self.omega_f) * T2) ** 2 / 4.0)
                + np.exp(-((w + self.omega_f) * T2) ** 2 / 4.0)
            ) + 0j
        else:
            ts, fs = self.samples
            u = ts - self.t_f
            out = trapezoid(fs * np.exp(1j * np.multiply.outer(w, u)), u, axis=-1)
        return out if np.ndim(out) else complex(out)

    def fourier_absolute(self, omega):
        """Transform of the uncentred force, ``int dt F(t) exp(i omega t)``."""
        return self.fourier(omega) * np.exp(1j * np.asarray(omega) * self.t_f)


def force_value(force, t):
    return force.value(t)


def force_fourier(force, omega):
    return force.fourier(omega)


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid ``t_min + k h``, ``k = 0..n_steps``."""

    t_min: float
    t_max: float
    n_steps: int

    def __post_init__(self):
        if not self.t_min < self.t_max:
            raise ValueError("t_min must be < t_max")
        if int(self.n_steps) != self.n_steps or self.n_steps < 2:
            raise ValueError("n_steps must be an integer >= 2")
        object.__setattr__(self, "n_steps", int(self.n_steps))

    @property
    def h(self):
        return (self.t_max - self.t_min) / self.n_steps

    def times(self):
        t = self.t_min + self.h * np.arange(self.n_steps + 1)
        t[-1] = self.t_max
        return t

    def half_times(self):
        """The ``2 n + 1`` nodes an RK4 step needs (integer and half-integer steps)."""
        return self.t_min + 0.5 * self.h * np.arange(2 * self.n_steps + 1)

    def refined(self, factor=2):
        return TimeGrid(self.t_min, self.t_max, self.n_steps * factor)

    def contains(self, t):
        return self.t_min <= t <= self.t_max

    def check_flatness(self, profile, eps=1e-10):
        ref = profile.omega0 ** 2
        for t in (self.t_min, self.t_max):
            dev = abs(profile.omega_squared(t) - ref)
            if dev > eps * ref:
                raise PreconditionError(
                    f"omega^2 not flat at t={t}: |omega^2 - omega0^2| = {dev:.3e} "
                    f"> {eps:.1e} omega0^2"
                )


def choose_step(profile, length, tol=1e-10, points_per_period=40):
    """Largest RK4 step meeting the period, phase-drift and bump-resolution bounds."""
    wmax = profile.omega_max()
    h = 2.0 * math.pi / wmax / points_per_period
    # RK4 phase error per unit time ~ w (w h)^4 / 120
    h = min(h, (120.0 * tol / (wmax * length)) ** 0.25 / wmax)
    if profile.kind == SECH and profile.Omega > 0:
        h = min(h, profile.T / 200.0)
    elif profile.kind == TABULATED:
        h = min(h, float(np.min(np.diff(profile.samples[0]))))
    return h


def default_grid(profile, tol=1e-10, span=30.0, t_min=None, t_max=None,
                 points_per_period=40, cover=None):
    """Grid over the drive support (``[-span T, span T]`` for sech profiles).

    ``cover`` is an optional ``(lo, hi)`` interval the grid must also include
    (e.g. a force support). ``n_steps`` is rounded up to a multiple of 4.
    """
    lo, hi = profile.drive_support(span)
    if profile.kind == CONSTANT:
        lo, hi = -span / profile.omega0, span / profile.omega0
    if cover is not None:
        lo, hi = min(lo, cover[0]), max(hi, cover[1])
    if t_min is not None:
        lo = t_min
    if t_max is not None:
        hi = t_max
    length = hi - lo
    h = choose_step(profile, length, tol, points_per_period)
    n = int(math.ceil(length / h))
    n += (-n) % 4
    return TimeGrid(lo, hi, max(n, 4))
