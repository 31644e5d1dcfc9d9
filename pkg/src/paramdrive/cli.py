"""Command-line scenario runner.

Subcommands: ``run``, ``sweep``, ``compare``, ``jost``, ``multimode``. A scenario is
a TOML file with ``[profile]``, ``[force]``, optional ``[grid]``, ``[run]``,
``[sweep]`` and ``[output]`` tables. Numbers may be written as strings such as
``"6*pi"``.

Exit codes: 0 success, 2 configuration error, 3 convergence failure.
"""

import argparse
import hashlib
import json
import math
import os
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import __version__, approx, exact, kernels, multimode, quantum
from .errors import ConfigError, ConvergenceError, DomainError, OutOfRangeError, PreconditionError
from .jost import solve_jost
from .profiles import (CONSTANT, GAUSSCOS, MINUS, NULL, PLUS, SECH, TABULATED, ForceProfile,
                       FrequencyProfile, TimeGrid, default_grid)

METHODS = ("numeric", "exact", "born", "abrupt", "adiabatic")
EXIT_OK, EXIT_CONFIG, EXIT_CONVERGENCE = 0, 2, 3

_NUM = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)?\s*\*?\s*(pi)?\s*(?:/\s*(\d+\.?\d*))?\s*$")


def parse_number(value, name="value"):
    """Float from a TOML value; strings like ``"pi"``, ``"6*pi"``, ``"pi/2"`` are accepted."""
    if isinstance(value, bool):
        raise ConfigError(f"{name}: expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        m = _NUM.match(value)
        if m and (m.group(1) or m.group(2)):
            x = float(m.group(1)) if m.group(1) else 1.0
            if m.group(2):
                x *= math.pi
            if m.group(3):
                x /= float(m.group(3))
            return x
    raise ConfigError(f"{name}: cannot parse {value!r} as a number")


def _get(table, key, name, default=None, required=False):
    if key in table:
        return parse_number(table[key], f"{name}.{key}")
    if required:
        raise ConfigError(f"{name}.{key}: missing")
    return default


@dataclass(frozen=True)
class Scenario:
    profile: FrequencyProfile
    force: ForceProfile
    grid: Optional[TimeGrid]
    method: str
    methods: tuple
    sweep: Optional[dict]
    output: str
    tol: float
    t0: Optional[float]
    t: Optional[float]
    config_hash: str
    plot: str = "none"
    threads: int = 1


def _path(base, p):
    return p if os.path.isabs(p) else os.path.join(base, p)


def parse_profile(tab, base="."):
    kind = str(tab.get("kind", SECH)).lower()
    if kind in ("sechbump", "sech2"):
        kind = SECH
    omega0 = _get(tab, "omega0", "profile", required=True)
    try:
        if kind == CONSTANT:
            return FrequencyProfile.constant(omega0)
        if kind == SECH:
            T = _get(tab, "T", "profile", required=True)
            if "Omega2T" in tab:
                if "Omega" in tab:
                    raise ConfigError("profile: give Omega or Omega2T, not both")
                W2T = _get(tab, "Omega2T", "profile")
                if W2T < 0:
                    raise ConfigError("profile.Omega2T: must be non-negative")
                Omega = math.sqrt(W2T / T)
            else:
                Omega = _get(tab, "Omega", "profile", required=True)
            sign = tab.get("sign", "plus")
            return FrequencyProfile.sech(omega0, Omega, T, sign)
        if kind == TABULATED:
            if "path" not in tab:
                raise ConfigError("profile.path: missing for tabulated profile")
            return FrequencyProfile.from_csv(_path(base, tab["path"]), omega0=omega0)
    except ConfigError:
        raise
    except (ValueError, OSError) as exc:
        raise ConfigError(f"profile: {exc}") from None
    raise ConfigError(f"profile.kind: unknown kind {kind!r}")


def parse_force(tab, base="."):
    kind = str(tab.get("kind", NULL)).lower()
    m = _get(tab, "m", "force", 1.0)
    try:
        if kind == NULL:
            return ForceProfile.null(m)
        if kind == GAUSSCOS:
            return ForceProfile.gausscos(
                _get(tab, "F0", "force", 1.0), _get(tab, "omega_f", "force", required=True),
                _get(tab, "t_f", "force", 0.0), _get(tab, "T2", "force", 1.0), m,
            )
        if kind == TABULATED:
            if "path" not in tab:
                raise ConfigError("force.path: missing for tabulated force")
            return ForceProfile.from_csv(_path(base, tab["path"]), t_f=_get(tab, "t_f", "force", 0.0), m=m)
    except ConfigError:
        raise
    except (ValueError, OSError) as exc:
        raise ConfigError(f"force: {exc}") from None
    raise ConfigError(f"force.kind: unknown kind {kind!r}")


def _sweep_values(tab):
    if tab.get("parameter", "t_f") != "t_f":
        raise ConfigError("sweep.parameter: only 't_f' is supported")
    if "values" in tab:
        vals = [parse_number(v, "sweep.values") for v in tab["values"]]
    else:
        start = _get(tab, "start", "sweep", required=True)
        stop = _get(tab, "stop", "sweep", required=True)
        num = int(_get(tab, "num", "sweep", required=True))
        if num < 2:
            raise ConfigError("sweep.num: need at least 2 points")
        vals = np.linspace(start, stop, num).tolist()
    if not vals:
        raise ConfigError("sweep.values: empty")
    return {"parameter": "t_f", "values": vals}


def check_compatible(method, profile):
    """Raise :class:`ConfigError` if ``method`` cannot treat ``profile``."""
    if method not in METHODS:
        raise ConfigError(f"run.method: unknown method {method!r} (choose from {', '.join(METHODS)})")
    sech_or_flat = profile.kind == SECH or profile.kind == CONSTANT
    if method == "exact" and not (sech_or_flat and profile.sign == PLUS):
        raise ConfigError("run.method: 'exact' requires a plus-sign sech profile")
    if method == "adiabatic" and not (profile.kind == SECH and profile.sign == MINUS):
        raise ConfigError("run.method: 'adiabatic' requires a minus-sign sech profile")
    if method in ("born", "abrupt") and not sech_or_flat:
        raise ConfigError(f"run.method: {method!r} requires a sech or constant profile")


def config_hash(cfg):
    """First 16 hex digits of the SHA-256 of the canonical config (output table excluded)."""
    core = {k: v for k, v in cfg.items() if k != "output"}
    blob = json.dumps(core, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def load_config(path):
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {path}: {exc}") from None


def build_scenario(cfg, base=".", out=None, threads=None, plot=None):
    if "profile" not in cfg:
        raise ConfigError("profile: missing table")
    profile = parse_profile(cfg["profile"], base)
    force = parse_force(cfg.get("force", {}), base)
    run = cfg.get("run", {})
    method = str(run.get("method", "numeric")).lower()
    check_compatible(method, profile)
    methods = tuple(str(m).lower() for m in run.get("methods", []))
    for m in methods:
        check_compatible(m, profile)
    tol = _get(run, "tol", "run", 1e-10)
    grid = None
    g = cfg.get("grid")
    if g:
        try:
            grid = TimeGrid(_get(g, "t_min", "grid", required=True), _get(g, "t_max", "grid", required=True),
                            int(_get(g, "n_steps", "grid", required=True)))
        except ValueError as exc:
            raise ConfigError(f"grid: {exc}") from None
    sweep = _sweep_values(cfg["sweep"]) if "sweep" in cfg else None
    outtab = cfg.get("output", {})
    prefix = out or outtab.get("prefix") or "paramdrive_out"
    plot = plot or outtab.get("plot", "none")
    if plot not in ("none", "svg"):
        raise ConfigError("output.plot: must be 'none' or 'svg'")
    threads = threads or int(run.get("threads", 1))
    return Scenario(profile, force, grid, method, methods, sweep, prefix, tol,
                    _get(run, "t0", "run"), _get(run, "t", "run"), config_hash(cfg), plot, max(1, threads))


# ------------------------------------------------------------- methods ----

def _cover(sc, t_f_values=None):
    """Interval the Jost grid must include: every force support in play."""
    if sc.force.is_null:
        return None
    sups = [sc.force.support()]
    if t_f_values:
        sups += [sc.force.shifted(tf).support() for tf in (min(t_f_values), max(t_f_values))]
    return min(s[0] for s in sups), max(s[1] for s in sups)


def _grid(sc, cover):
    if sc.grid is not None:
        return sc.grid
    return default_grid(sc.profile, tol=sc.tol, cover=cover)


def _jost_for(sc, method, cover):
    grid = _grid(sc, cover)
    if method == "numeric":
        return solve_jost(sc.profile, grid=None if sc.grid is None else grid, tol=sc.tol, cover=cover)
    return exact.exact_jost_solution(_sech_params(sc.profile), grid)


def _sech_params(profile):
    if profile.kind == CONSTANT:
        return exact.SechParams(profile.omega0, 0.0, 1.0)
    return exact.SechParams.from_profile(profile)


def _signed_weight(profile):
    return 0.0 if profile.kind == CONSTANT else profile.sign * profile.Omega2T


def _closed_coefficients(method, profile):
    if method == "born":
        return approx.born_coefficients(profile)
    if method == "abrupt":
        return approx.abrupt_coefficients(profile.omega0, _signed_weight(profile))
    if method == "adiabatic":
        b = approx.adiabatic_B(approx.AdiabaticParams.from_profile(profile))
        return complex(math.sqrt(1.0 + b * b)), complex(b)  # magnitudes only
    raise ValueError(method)


def _closed_alpha(method, profile, force, t):
    if force.is_null:
        return 0j
    if method == "born":
        return approx.born_displacement(profile, force, t)
    if method == "abrupt":
        return approx.abrupt_displacement(profile.omega0, _signed_weight(profile), force, t)
    if method == "adiabatic":
        return approx.adiabatic_displacement(approx.AdiabaticParams.from_profile(profile), force, t)
    raise ValueError(method)


def evaluate(sc, method):
    """``dict`` of scattering data, Bogolyubov map, displacement and state for one method."""
    cover = _cover(sc)
    info = {}
    if method in ("numeric", "exact"):
        sol = _jost_for(sc, method, cover)
        A, B = sol.A, sol.B
        if method == "exact":
            A, B = exact.exact_coefficients(_sech_params(sc.profile))
        t0 = sol.t_min if sc.t0 is None else sc.t0
        t = sol.t_max if sc.t is None else sc.t
        alpha = quantum.displacement(sol, sc.force, t0, t) if not sc.force.is_null else 0j
        info = {"n_steps": len(sol.t) - 1, "error_estimate": sol.error_estimate,
                "wronskian_drift": sol.wronskian_drift}
    else:
        grid = _grid(sc, cover)
        t0 = grid.t_min if sc.t0 is None else sc.t0
        t = grid.t_max if sc.t is None else sc.t
        A, B = _closed_coefficients(method, sc.profile)
        alpha = _closed_alpha(method, sc.profile, sc.force, t)
    u, v = quantum.bogolyubov_from_scattering(complex(A), complex(B), t0, t, sc.profile.omega0)
    lmap = quantum.LadderMap(u, v, complex(alpha), t0, t, sc.force.m, sc.profile.omega0)
    # first-order Born coefficients are unitary only to O((Omega^2 T/omega0)^2); flux_defect reports it
    state = quantum.state_from_map(lmap, tol=math.inf if method == "born" else 1e-6)
    out = {
        "method": method, "A": complex(A), "B": complex(B), "u": u, "v": v, "alpha": complex(alpha),
        "squeeze_r": state.squeeze_r, "squeeze_phase": state.squeeze_phase,
        "occupation": state.occupation, "flux_defect": abs(abs(A) ** 2 - abs(B) ** 2 - 1.0),
        "t0": t0, "t": t,
    }
    out.update(info)
    return out


def sweep_tf(sc):
    """``|alpha|`` against ``t_f`` for the scenario's force shape (rows of dicts)."""
    vals = sc.sweep["values"]
    method = sc.method
    forces = [sc.force.shifted(tf) for tf in vals]
    prof = sc.profile
    valid = [True] * len(vals)
    if method in ("numeric", "exact"):
        cover = _cover(sc, vals)
        sol = _jost_for(sc, method, cover)
        B = sol.B
        if method == "exact":
            B = exact.exact_coefficients(_sech_params(prof))[1]
        t0 = sol.t_min if sc.t0 is None else sc.t0
        t = sol.t_max if sc.t is None else sc.t
        work = lambda f: quantum.displacement(sol, f, t0, t)
    else:
        grid = _grid(sc, _cover(sc, vals))
        t = grid.t_max if sc.t is None else sc.t
        B = _closed_coefficients(method, prof)[1]
        work = lambda f: _closed_alpha(method, prof, f, t)
        if method == "adiabatic":
            ap = approx.AdiabaticParams.from_profile(prof)
            valid = [approx.adiabatic_validity(ap, f) for f in forces]
    if sc.threads > 1:
        with ThreadPoolExecutor(max_workers=sc.threads) as pool:
            alphas = list(pool.map(work, forces))
    else:
        alphas = [work(f) for f in forces]
    rows = []
    for tf, a, ok in zip(vals, alphas, valid):
        rows.append({"t_f": tf, "alpha": complex(a), "occupation": abs(B) ** 2 + abs(a) ** 2, "valid": ok})
    return rows


# -------------------------------------------------------------- output ----

def _fmt(x):
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    return str(x)


def write_csv(path, header, rows):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for r in rows:
            fh.write(",".join(_fmt(v) for v in r) + "\n")
    return path


def _cjson(z):
    return [float(z.real), float(z.imag)]


def write_json(path, obj):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def write_svg(path, x, y, xlabel="t_f", ylabel="|alpha|", width=640, height=400):
    """Minimal line chart."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    ml, mr, mt, mb = 70, 20, 20, 50
    x0, x1 = float(x.min()), float(x.max())
    y0, y1 = 0.0, float(y.max()) * 1.05 or 1.0
    sx = lambda v: ml + (v - x0) / (x1 - x0 or 1.0) * (width - ml - mr)
    sy = lambda v: height - mb - (v - y0) / (y1 - y0) * (height - mt - mb)
    pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(x, y))
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<line x1="{ml}" y1="{height - mb}" x2="{width - mr}" y2="{height - mb}" stroke="black"/>',
        f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{height - mb}" stroke="black"/>',
        f'<polyline fill="none" stroke="#1f4e9c" stroke-width="1.2" points="{pts}"/>',
    ]
    for k in range(5):
        xv = x0 + k * (x1 - x0) / 4
        yv = y0 + k * (y1 - y0) / 4
        parts.append(f'<text x="{sx(xv):.1f}" y="{height - mb + 18}" font-size="11" '
                     f'text-anchor="middle">{xv:.3g}</text>')
        parts.append(f'<text x="{ml - 6}" y="{sy(yv) + 4:.1f}" font-size="11" text-anchor="end">{yv:.3g}</text>')
    parts.append(f'<text x="{(width + ml) / 2}" y="{height - 10}" font-size="12" text-anchor="middle">{xlabel}</text>')
    parts.append(f'<text x="15" y="{height / 2}" font-size="12" transform="rotate(-90 15 {height / 2})" '
                 f'text-anchor="middle">{ylabel}</text>')
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")
    return path


_RESULT_COLS = ["config_hash", "method", "re_A", "im_A", "re_B", "im_B", "re_u", "im_u", "re_v", "im_v",
                "re_alpha", "im_alpha", "abs_alpha", "squeeze_r", "squeeze_phase", "occupation"]


def _result_row(h, r):
    return [h, r["method"], r["A"].real, r["A"].imag, r["B"].real, r["B"].imag, r["u"].real, r["u"].imag,
            r["v"].real, r["v"].imag, r["alpha"].real, r["alpha"].imag, abs(r["alpha"]),
            r["squeeze_r"], r["squeeze_phase"], r["occupation"]]


def _meta(sc):
    return {"config_hash": sc.config_hash, "version": __version__, "backend": kernels.BACKEND}


def cmd_run(sc):
    r = evaluate(sc, sc.method)
    files = [write_csv(f"{sc.output}_results.csv", _RESULT_COLS, [_result_row(sc.config_hash, r)])]
    summary = {k: (_cjson(v) if isinstance(v, complex) else v) for k, v in r.items()}
    summary["abs_B"] = abs(r["B"])
    summary["abs_alpha"] = abs(r["alpha"])
    summary.update(_meta(sc))
    files.append(write_json(f"{sc.output}_summary.json", summary))
    return files


def cmd_sweep(sc):
    if sc.sweep is None:
        raise ConfigError("sweep: missing table")
    rows = sweep_tf(sc)
    files = [write_csv(
        f"{sc.output}_sweep.csv",
        ["config_hash", "method", "t_f", "re_alpha", "im_alpha", "abs_alpha", "occupation", "in_validity_window"],
        [[sc.config_hash, sc.method, r["t_f"], r["alpha"].real, r["alpha"].imag, abs(r["alpha"]),
          r["occupation"], r["valid"]] for r in rows],
    )]
    if sc.plot == "svg":
        files.append(write_svg(f"{sc.output}_sweep.svg", [r["t_f"] for r in rows],
                               [abs(r["alpha"]) for r in rows]))
    return files


def _rel(a, b):
    d = abs(a - b)
    s = max(abs(a), abs(b))
    return 0.0 if d == 0 else d / s


def compatible_methods(profile):
    out = []
    for m in METHODS:
        try:
            check_compatible(m, profile)
            out.append(m)
        except ConfigError:
            pass
    return out


def cmd_compare(sc):
    methods = sc.methods or tuple(compatible_methods(sc.profile))
    results = [evaluate(sc, m) for m in methods]
    files = [write_csv(f"{sc.output}_compare.csv", _RESULT_COLS, [_result_row(sc.config_hash, r) for r in results])]
    dev = []
    for i, a in enumerate(results):
        for b in results[i + 1:]:
            dev.append([sc.config_hash, a["method"], b["method"], _rel(a["A"], b["A"]), _rel(a["B"], b["B"]),
                        _rel(a["alpha"], b["alpha"])])
    files.append(write_csv(f"{sc.output}_deviations.csv",
                           ["config_hash", "method_a", "method_b", "rel_dev_A", "rel_dev_B", "rel_dev_alpha"], dev))
    return files


def cmd_jost(sc):
    sol = solve_jost(sc.profile, grid=sc.grid, tol=sc.tol, cover=_cover(sc))
    os.makedirs(os.path.dirname(os.path.abspath(sc.output)), exist_ok=True)
    return list(sol.save(sc.output))


def cmd_multimode(path, out, tol=1e-9):
    system = multimode.load_system(path)
    mj = multimode.solve_multimode_jost(system, tol=tol)
    U, V, alphas = multimode.multimode_evolution(system, mj)
    os.makedirs(os.path.dirname(os.path.abspath(out)), exist_ok=True)
    files = [multimode.write_complex_matrix(f"{out}_{name}.csv", M)
             for name, M in (("A", mj.A), ("B", mj.B), ("U", U), ("V", V))]
    occ = multimode.multimode_occupations(V, alphas)
    files.append(write_csv(f"{out}_alpha.csv", ["mode", "re_alpha", "im_alpha", "abs_alpha", "occupation"],
                           [[i, a.real, a.imag, abs(a), o] for i, (a, o) in enumerate(zip(alphas, occ))]))
    files.append(write_json(f"{out}_summary.json", {
        "unitarity_defect": multimode.unitarity_defect(mj), "error_estimate": mj.error_estimate,
        "n_steps": mj.grid.n_steps, "omega_ref": mj.omega_ref, "version": __version__,
        "backend": kernels.BACKEND,
    }))
    return files


# ---------------------------------------------------------------- main ----

def make_parser():
    p = argparse.ArgumentParser(prog="paramdrive", description="Parametrically driven, forced oscillator runs.")
    sub = p.add_subparsers(dest="command", required=True)
    for name, text in (("run", "single scenario: scattering data, map, displacement"),
                       ("sweep", "displacement against force delay t_f"),
                       ("compare", "side-by-side methods with pairwise deviations"),
                       ("jost", "write the sampled Jost solution")):
        s = sub.add_parser(name, help=text)
        s.add_argument("--config", required=True, metavar="PATH")
        s.add_argument("--out", metavar="PREFIX")
        s.add_argument("--threads", type=int, metavar="N")
        s.add_argument("--plot", choices=("none", "svg"))
    s = sub.add_parser("multimode", help="coupled-mode system from a JSON definition")
    s.add_argument("--system", "--config", dest="system", required=True, metavar="PATH")
    s.add_argument("--out", required=True, metavar="PREFIX")
    s.add_argument("--tol", type=float, default=1e-9)
    return p


def main(argv=None):
    args = make_parser().parse_args(argv)
    try:
        if args.command == "multimode":
            files = cmd_multimode(args.system, args.out, args.tol)
        else:
            cfg = load_config(args.config)
            sc = build_scenario(cfg, os.path.dirname(os.path.abspath(args.config)), args.out, args.threads,
                                args.plot)
            files = {"run": cmd_run, "sweep": cmd_sweep, "compare": cmd_compare, "jost": cmd_jost}[args.command](sc)
    except (ConfigError, PreconditionError, DomainError, OutOfRangeError) as exc:
        print(f"paramdrive: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConvergenceError as exc:
        print(f"paramdrive: convergence failure: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    for f in files:
        print(f)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
