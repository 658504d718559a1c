"""Command-line front end.

Usage::

    kerrcomb <command> key=value ... [--config FILE]

Commands are ``wave``, ``expand``, ``solve``, ``spectrum``, ``identities``,
``evolve`` and ``sweep``. A config file holds one ``key=value`` per line;
flags on the command line override it. Reports are JSON (``format=json``,
the default) or CSV tables (``format=csv``), written to ``out=PATH`` or
stdout. Exit status is 0 on success, 2 for invalid input and 3 when a
computation fails.
"""

import argparse
from concurrent.futures import ProcessPoolExecutor
import csv
import io
import itertools
import json
import math
import os
import sys
import tempfile

import numpy as np

from .errors import InsufficientRangeError, NumericalError, ValidationError

SCHEMA_VERSION = 1
COMMANDS = ("wave", "expand", "solve", "spectrum", "identities", "evolve", "sweep")

FLOAT_KEYS = {"kappa", "alpha0", "h", "dt", "t_end", "amplitude"}
INT_KEYS = {"n", "branch", "seed", "workers", "max_mode"}
STR_KEYS = {"format", "out", "csv", "perturbation", "command", "points_dir"}
ALIASES = {"n_grid": "n", "branch_sign": "branch", "output_path": "out", "threads": "workers"}

DEFAULTS = {
    "n": 256, "branch": -1, "alpha0": 0.7, "h": 1e-3, "dt": 1e-3, "t_end": 10.0,
    "perturbation": "noise", "amplitude": 1e-6, "seed": 0, "max_mode": 4, "format": "json",
}

# keys each command reads; anything else is rejected
COMMAND_KEYS = {
    "wave": {"kappa", "n"},
    "expand": {"kappa", "alpha0", "branch", "n"},
    "solve": {"kappa", "alpha0", "branch", "h", "n"},
    "spectrum": {"kappa", "alpha0", "branch", "h", "n"},
    "identities": {"kappa", "n"},
    "evolve": {"kappa", "alpha0", "branch", "h", "n", "dt", "t_end", "perturbation",
               "amplitude", "seed", "max_mode"},
}
COMMON_KEYS = {"format", "out", "csv"}
REQUIRED = {"wave": {"kappa"}, "expand": {"kappa"}, "solve": {"kappa"}, "spectrum": {"kappa"},
            "identities": {"kappa"}, "evolve": {"kappa"}}


# ---------------------------------------------------------------- parsing

def parse_range(text):
    """Values of a range flag.

    ``lo:hi:count`` is linear, ``lo:hi:count:log`` geometric, and
    ``a,b,c`` an explicit list. A plain number is a one-element list.
    """
    text = text.strip()
    if "," in text:
        vals = [float(t) for t in text.split(",") if t.strip()]
    elif ":" in text:
        parts = text.split(":")
        if len(parts) not in (3, 4) or (len(parts) == 4 and parts[3] != "log"):
            raise ValidationError(f"invalid range {text!r}; expected lo:hi:count[:log]")
        try:
            lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError as exc:
            raise ValidationError(f"invalid range {text!r}: {exc}") from None
        if count < 1:
            raise ValidationError(f"invalid range {text!r}: count must be positive")
        if len(parts) == 4:
            if lo <= 0 or hi <= 0:
                raise ValidationError(f"invalid range {text!r}: log range needs positive ends")
            vals = list(np.geomspace(lo, hi, count))
        else:
            vals = list(np.linspace(lo, hi, count))
    else:
        vals = [float(text)]
    if not vals or not all(math.isfinite(v) for v in vals):
        raise ValidationError(f"invalid range {text!r}")
    return [float(v) for v in vals]


def read_config(path):
    """Flat ``key=value`` lines; ``#`` starts a comment."""
    out = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ValidationError(f"cannot read config file {path!r}: {exc}") from None
    for num, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"{path}:{num}: expected key=value, got {line!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def _pairs(tokens):
    out = {}
    for tok in tokens:
        if "=" not in tok:
            raise ValidationError(f"expected key=value, got {tok!r}")
        key, value = tok.split("=", 1)
        out[key.strip().lstrip("-")] = value.strip()
    return out


def _convert(key, value, allow_range):
    if key in STR_KEYS:
        return value
    if allow_range and key in FLOAT_KEYS and (":" in value or "," in value):
        return parse_range(value)
    try:
        if key in INT_KEYS:
            f = float(value)
            if f != int(f):
                raise ValueError
            return int(f)
        return float(value)
    except ValueError:
        kind = "an integer" if key in INT_KEYS else "a number"
        raise ValidationError(f"{key} must be {kind}, got {value!r}") from None


def build_config(command, raw):
    """Typed, validated parameters for ``command`` from string flags."""
    if command not in COMMANDS:
        raise ValidationError(f"unknown command {command!r}; choose from {', '.join(COMMANDS)}")
    raw = {ALIASES.get(k, k): v for k, v in raw.items()}
    if command == "sweep":
        target = raw.get("command")
        if target not in COMMAND_KEYS:
            raise ValidationError(
                f"sweep needs command=<{'|'.join(COMMAND_KEYS)}>, got {target!r}")
        allowed = COMMAND_KEYS[target] | COMMON_KEYS | {"command", "workers", "points_dir"}
    else:
        allowed = COMMAND_KEYS[command] | COMMON_KEYS
    unknown = sorted(set(raw) - allowed)
    if unknown:
        raise ValidationError(f"unknown parameter(s) for {command}: {', '.join(unknown)}")
    ranged = command == "sweep" or command == "solve"
    cfg = {}
    for key, value in raw.items():
        cfg[key] = _convert(key, value, allow_range=ranged and (command == "sweep" or key == "h"))
    target = cfg.get("command", command)
    for key in REQUIRED.get(target, ()):
        if key not in cfg:
            raise ValidationError(f"{target} needs {key}=...")
    for key in COMMAND_KEYS.get(target, set()) | COMMON_KEYS:
        if key not in cfg and key in DEFAULTS:
            cfg[key] = DEFAULTS[key]
    cfg.setdefault("format", "json")
    if cfg["format"] not in ("json", "csv"):
        raise ValidationError(f"format must be json or csv, got {cfg['format']!r}")
    for point in expand_points(cfg) if command == "sweep" else [cfg]:
        validate_point(target, point)
    return cfg


def expand_points(cfg):
    """Cartesian product of the range-valued entries of a sweep config."""
    keys = sorted(k for k, v in cfg.items() if isinstance(v, list))
    base = {k: v for k, v in cfg.items() if k not in keys}
    points = []
    for combo in itertools.product(*(cfg[k] for k in keys)):
        p = dict(base)
        p.update(zip(keys, combo))
        points.append(p)
    return points


def validate_point(command, p):
    """Admissibility checks of the target module, run before dispatch."""
    from .cnoidal import _check_grid_size

    kappa = p.get("kappa")
    if kappa is not None and not isinstance(kappa, list) and not 0.0 < kappa < 1.0:
        raise ValidationError(f"kappa must lie in the open interval (0, 1), got {kappa}")
    if "n" in p:
        _check_grid_size(p["n"])
    if p.get("branch", -1) not in (-1, 1):
        raise ValidationError(f"branch must be +1 or -1, got {p['branch']}")
    hs = p.get("h")
    for h in hs if isinstance(hs, list) else ([] if hs is None else [hs]):
        if h < 0:
            raise ValidationError(f"pump strength h must be non-negative, got {h}")
    if isinstance(hs, list) and any(b <= a for a, b in zip(hs, hs[1:])):
        raise ValidationError("h range must be strictly increasing")
    if "alpha0" in p and command in ("expand", "solve", "spectrum", "evolve"):
        from .profile_solver import admissibility_bound
        from .errors import AdmissibilityError

        bound = admissibility_bound(kappa)
        if not 0.0 <= p["alpha0"] < bound:
            raise AdmissibilityError(
                f"alpha0={p['alpha0']} outside admissible range [0, {bound:.6f}) at kappa={kappa}")
    if command == "evolve":
        if not 0.0 < p["dt"] < 1.0:
            raise ValidationError(f"dt must lie in (0, 1), got {p['dt']}")
        if p["t_end"] <= 0:
            raise ValidationError(f"t_end must be positive, got {p['t_end']}")
        if p["perturbation"] not in ("noise", "eigen", "none"):
            raise ValidationError("perturbation must be noise, eigen or none")
        if p["amplitude"] < 0:
            raise ValidationError("amplitude must be non-negative")
        if p["h"] == 0 and p["branch"] == 1 and p["perturbation"] == "eigen":
            raise ValidationError("eigen perturbation needs h > 0")


# ---------------------------------------------------------- serialization

def _num(x):
    if isinstance(x, (complex, np.complexfloating)):
        return [_num(x.real), _num(x.imag)]
    x = float(x)
    return x if math.isfinite(x) else None


def _arr(a):
    a = np.asarray(a)
    if np.iscomplexobj(a):
        return [[_num(v.real), _num(v.imag)] for v in a.ravel()]
    return [_num(v) for v in a.ravel()]


def _json_safe(obj):
    if isinstance(obj, dict):
        return {str(k): _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _arr(obj)
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, complex, np.floating, np.complexfloating)):
        return _num(obj)
    return obj


def profile_dict(prof, arrays=True):
    info = {k: v for k, v in prof.info.items() if k in
            ("iterations", "residual", "residual_history", "min_singular_value", "fourier_tail",
             "resolved", "seed")}
    out = {"branch": prof.branch, "h": prof.h, "alpha": prof.alpha, "kappa": prof.kappa,
           "n_grid": prof.grid.n, "half_period": prof.grid.half_period,
           "residual_max": prof.residual_norm(), "odd_part_max": prof.odd_part_max(),
           "info": info}
    if arrays:
        out.update(x=prof.grid.nodes, phi1=prof.phi1, phi2=prof.phi2)
    return out


def expansion_dict(rep):
    keys = ("kappa", "alpha0", "branch_sign", "sigma0", "a0", "b0", "c0", "D1_0", "D2_0",
            "lambda_minus_slope", "mu0", "lambda_h_coeff", "sigma_trans_slope")
    out = {k: getattr(rep, k) for k in keys}
    out.update(x=rep.grid.nodes, Psi1_0=rep.Psi1_0, Psi2_0=rep.Psi2_0)
    return out


def _spectrum_rows(rep):
    order = sorted(range(len(rep.eigenvalues_mu)),
                   key=lambda j: (-rep.eigenvalues_lambda[j].real, rep.eigenvalues_lambda[j].imag))
    return [{"re_mu": rep.eigenvalues_mu[j].real, "im_mu": rep.eigenvalues_mu[j].imag,
             "re_lambda": rep.eigenvalues_lambda[j].real, "im_lambda": rep.eigenvalues_lambda[j].imag,
             "class": rep.classes[j]} for j in order]


def spectrum_dict(rep):
    return {"alpha": rep.alpha, "n_Lh": rep.n_Lh, "n_even": rep.n_even, "n_odd": rep.n_odd,
            "special": rep.special, "unstable_real": rep.unstable_real,
            "line_deviation": rep.line_deviation, "max_real_lambda": rep.max_real_lambda,
            "pairing_error": rep.pairing_error, "roundoff_floor": rep.roundoff_floor,
            "krein": [{"mu": m, "sign": s} for m, s in rep.krein],
            "eigenvalues": _spectrum_rows(rep)}


# --------------------------------------------------------------- commands

def _grid_profile(p):
    from .cnoidal import base_wave
    from .profile_solver import continue_branch

    if p["h"] == 0:
        wave = base_wave(p["kappa"], p["n"])
        return wave.grid, wave
    wave = base_wave(p["kappa"], p["n"])
    prof = continue_branch(wave.grid, p["kappa"], p["alpha0"], p["branch"], [p["h"]])[-1]
    return wave.grid, prof


def cmd_wave(p):
    from .cnoidal import base_wave

    wave = base_wave(p["kappa"], p["n"])
    par = wave.info["params"]
    params = {"kappa": par.kappa.kappa, "K": par.kappa.k_complete, "E": par.kappa.e_complete,
              "amp": par.amp, "half_period": par.half_period, "m_min": par.m_min}
    rows = [{"x": x, "phi1": a, "phi2": b} for x, a, b in zip(wave.grid.nodes, wave.phi1, wave.phi2)]
    return {"BaseWaveParams": params, "WaveProfile": profile_dict(wave)}, rows


def cmd_expand(p):
    from .perturbation import first_order_correction, implicit_residuals

    rep = first_order_correction(p["kappa"], p["alpha0"], p["branch"], p["n"])
    q1, q2 = implicit_residuals(rep)
    out = expansion_dict(rep)
    out["implicit_residuals"] = {"q1": q1, "q2_max": q2}
    rows = [{"x": x, "Psi1_0": a, "Psi2_0": b} for x, a, b in zip(rep.grid.nodes, rep.Psi1_0, rep.Psi2_0)]
    return {"ExpansionReport": out}, rows


def cmd_solve(p):
    from .cnoidal import base_wave
    from .profile_solver import continue_branch

    hs = p["h"] if isinstance(p["h"], list) else [p["h"]]
    if any(h <= 0 for h in hs):
        raise ValidationError("solve needs h > 0")
    grid = base_wave(p["kappa"], p["n"]).grid
    profs = continue_branch(grid, p["kappa"], p["alpha0"], p["branch"], hs)
    rows = [{"h": q.h, "alpha": q.alpha, "iterations": q.info["iterations"],
             "residual": q.info["residual"], "phi_max": float(np.max(np.abs(q.as_complex)))}
            for q in profs]
    return {"WaveProfile": [profile_dict(q) for q in profs]}, rows


def cmd_spectrum(p):
    from .grid_ops import assemble_full_linearization
    from .spectra import full_spectrum

    grid, prof = _grid_profile(p)
    lh, jlh = assemble_full_linearization(grid, prof)
    rep = full_spectrum(jlh, prof.alpha, lh=lh, grid=grid)
    return ({"WaveProfile": profile_dict(prof, arrays=False), "SpectrumReport": spectrum_dict(rep)},
            _spectrum_rows(rep))


def cmd_identities(p):
    from .identities import identity_report

    rep = identity_report(p["kappa"], p["n"])
    out = {k: getattr(rep, k) for k in ("kappa", "ant1_numeric", "ant1_closed", "ant2_numeric",
                                        "ant3_numeric", "ant4_numeric", "ant4_closed",
                                        "ant4_u_integral", "ant1_green", "wronskian")}
    return {"IdentityReport": out}, [rep.csv_row()]


def cmd_evolve(p):
    from .evolve import (eigenvector_perturbation, measure_growth_rate, noise_perturbation,
                         start_run, step)

    grid, prof = _grid_profile(p)
    ref = prof.as_complex
    alpha = prof.alpha
    if p["perturbation"] == "noise":
        du = noise_perturbation(grid, p["amplitude"], p["seed"], p["max_mode"])
    elif p["perturbation"] == "eigen":
        from .grid_ops import assemble_full_linearization
        from .spectra import _eig

        _, jlh = assemble_full_linearization(grid, prof)
        w, v = _eig(jlh.entries, vectors=True)
        j = int(np.argmax(w.real))
        du = eigenvector_perturbation(grid, v[:, j], p["amplitude"])
    else:
        du = np.zeros(grid.n, dtype=complex)
    run = start_run(grid, ref + du, prof.h, alpha, p["dt"], reference=ref, twin=True)
    run = step(run, int(round(p["t_end"] / p["dt"])))
    out = {"h": run.h, "alpha": run.alpha, "dt": run.dt, "t": run.t, "n_grid": grid.n,
           "final_distance": run.distance(), "history": {"t": run.history[:, 0],
                                                         "residual": run.history[:, 1]}}
    try:
        out["growth_rate"] = measure_growth_rate(run.history)
    except InsufficientRangeError as exc:
        out["growth_rate"] = None
        out["growth_rate_error"] = str(exc)
    rows = [{"t": t, "residual": d} for t, d in run.history]
    return {"EvolutionRun": out, "WaveProfile": profile_dict(prof, arrays=False)}, rows


HANDLERS = {"wave": cmd_wave, "expand": cmd_expand, "solve": cmd_solve, "spectrum": cmd_spectrum,
            "identities": cmd_identities, "evolve": cmd_evolve}


def _inputs(command, cfg):
    return {k: v for k, v in sorted(cfg.items()) if k not in ("out", "csv", "format", "points_dir")}


def run_point(command, cfg):
    """Run one command; returns ``(report, csv_rows, exit_code)``."""
    report = {"schema_version": SCHEMA_VERSION, "command": command, "inputs": _inputs(command, cfg)}
    try:
        outputs, rows = HANDLERS[command](cfg)
    except ValidationError as exc:
        report.update(status="error", error={"type": type(exc).__name__, "message": str(exc)})
        return report, [], 2
    except NumericalError as exc:
        report.update(status="error", error={"type": type(exc).__name__, "message": str(exc)})
        return report, [], 3
    report.update(status="ok", outputs=outputs)
    return _json_safe(report), rows, 0


# ------------------------------------------------------------------ sweep

def _atomic_write(path, text):
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _sweep_worker(args):
    index, command, point, points_dir = args
    report, rows, code = run_point(command, point)
    report["point_index"] = index
    if points_dir:
        _atomic_write(os.path.join(points_dir, f"point_{index:05d}.json"), dumps(report))
    return index, report, rows, code


def worker_count(cfg):
    if "workers" in cfg:
        n = int(cfg["workers"])
    else:
        try:
            n = int(os.environ.get("KERRCOMB_THREADS", "1"))
        except ValueError:
            raise ValidationError("KERRCOMB_THREADS must be an integer") from None
    if n < 1:
        raise ValidationError(f"worker count must be positive, got {n}")
    return n


def run_sweep(cfg):
    """Run the target command at every point; per-point reports, then a merged one."""
    command = cfg["command"]
    points = expand_points(cfg)
    points_dir = cfg.get("points_dir")
    if points_dir is None and cfg.get("out"):
        points_dir = cfg["out"] + ".points"
    for i, p in enumerate(points):
        if command == "evolve":
            p["seed"] = int(cfg.get("seed", 0)) + i
        for k in ("out", "csv", "format", "points_dir", "workers", "command"):
            p.pop(k, None)
    jobs = [(i, command, p, points_dir) for i, p in enumerate(points)]
    workers = min(worker_count(cfg), len(jobs))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_worker, jobs))
    else:
        results = [_sweep_worker(j) for j in jobs]
    results.sort(key=lambda r: r[0])
    rows, reports = [], []
    for index, report, prow, _ in results:
        reports.append(report)
        for row in prow:
            rows.append(dict(point_index=index, **row) if command not in ("identities",) else row)
    code = max((r[3] for r in results), default=0)
    merged = {"schema_version": SCHEMA_VERSION, "command": "sweep", "target": command,
              "inputs": _json_safe(_inputs("sweep", cfg)), "status": "ok" if code == 0 else "error",
              "points": reports}
    return merged, rows, code


# ----------------------------------------------------------------- output

def dumps(report):
    return json.dumps(report, sort_keys=True, indent=1, allow_nan=False) + "\n"


def format_csv(rows):
    if not rows:
        return ""
    buf = io.StringIO()
    fields = list(rows[0])
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: (repr(float(v)) if isinstance(v, (float, np.floating)) else v)
                         for k, v in row.items()})
    return buf.getvalue()


def _emit(text, path):
    if path:
        _atomic_write(path, text)
    else:
        sys.stdout.write(text)


def dispatch(command, raw):
    """Validate, run and write the reports; returns the exit code."""
    cfg = {}
    try:
        cfg = build_config(command, raw)
        if command == "sweep":
            report, rows, code = run_sweep(cfg)
        else:
            report, rows, code = run_point(command, cfg)
    except ValidationError as exc:
        report = {"schema_version": SCHEMA_VERSION, "command": command,
                  "inputs": {k: str(v) for k, v in sorted(raw.items())}, "status": "error",
                  "error": {"type": type(exc).__name__, "message": str(exc)}}
        rows, code = [], 2
    except NumericalError as exc:
        report = {"schema_version": SCHEMA_VERSION, "command": command,
                  "inputs": _json_safe(_inputs(command, cfg)), "status": "error",
                  "error": {"type": type(exc).__name__, "message": str(exc)}}
        rows, code = [], 3
    if report.get("status") == "error" and "error" in report:
        print(f"kerrcomb: {report['error']['message']}", file=sys.stderr)
    fmt = cfg.get("format", raw.get("format", "json"))
    if fmt == "csv" and code == 0:
        _emit(format_csv(rows), cfg.get("out"))
    else:
        _emit(dumps(_json_safe(report)), cfg.get("out", raw.get("out")))
    if cfg.get("csv") and rows:
        _atomic_write(cfg["csv"], format_csv(rows))
    return code


def main(argv=None):
    parser = argparse.ArgumentParser(prog="kerrcomb", description=__doc__.split("\n\n")[0])
    parser.add_argument("command", help=", ".join(COMMANDS))
    parser.add_argument("params", nargs="*", help="key=value flags")
    parser.add_argument("--config", help="file of key=value lines")
    args = parser.parse_intermixed_args(argv)
    try:
        pairs = _pairs(args.params)
        path = args.config or pairs.pop("config", None)
        raw = read_config(path) if path else {}
        raw.update(pairs)
    except ValidationError as exc:
        print(f"kerrcomb: {exc}", file=sys.stderr)
        return 2
    return dispatch(args.command, raw)


if __name__ == "__main__":
    sys.exit(main())
