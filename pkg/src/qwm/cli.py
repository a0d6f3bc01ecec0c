"""``qwm`` command-line front end.

    qwm <map|shift-scan|spectrum|validate|rabi-fit> --config cfg.json
        [--out-dir DIR] [--workers N] [--quick]

Exit codes: 0 success, 1 validation failure, 2 configuration error,
3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
import time
from pathlib import Path

import jsonschema
import numpy as np

from . import calib, lindblad, opalgebra, spectrum

log = logging.getLogger("qwm")

TWO_PI = 2 * math.pi

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}
_NUM_LIST = {"type": "array", "items": _NUM, "minItems": 1}

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "sequence": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["carrier"],
                "properties": {
                    "carrier": {"enum": ["+", "-", "−"]},
                    "duration_ns": _POS,
                    "gap_ns": _NUM,
                    "angle": _NUM,
                    "rabi_hz": {"type": "number", "minimum": 0},
                },
            },
        },
        "physics": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"gamma1_hz": {"type": "number", "minimum": 0}, "detuning_hz": _POS},
        },
        "backend": {"enum": ["algebra", "oracle"]},
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "n_theta": {"type": "integer", "minimum": 1},
                "theta_minus": _NUM_LIST,
                "theta_plus": _NUM_LIST,
                "shift_start_ns": _NUM,
                "shift_stop_ns": _NUM,
                "shift_step_ns": _POS,
                "rabi_hz": {"type": "array", "items": _POS, "minItems": 1},
                "moving_pulse": {"type": "integer", "minimum": 0},
                "p_max": {"type": "integer", "minimum": 1},
                "threshold": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
            },
        },
        "solver": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "dt_ns": _POS,
                "tolerance": _POS,
                "repetitions": {"type": "integer", "minimum": 1},
                "beats": {"type": "integer", "minimum": 1},
                "record_every": {"type": "integer", "minimum": 1},
                "gamma1_ratio": _POS,
                "lead_ns": {"type": "number", "minimum": 0},
            },
        },
        "rabi": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "source": {"enum": ["analytic", "lindblad", "file"]},
                "rabi_hz": _POS,
                "duration_ns": _POS,
                "dt_ns": _POS,
                "noise": {"type": "number", "minimum": 0},
                "trace_csv": {"type": "string"},
                "amplitudes": _NUM_LIST,
                "hz_per_amplitude": _POS,
            },
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "csv_path": {"type": "string"},
                "svg_path": {"type": "string"},
                "full_fft": {"type": "boolean"},
            },
        },
        "seed": {"type": "integer"},
    },
}


class ConfigError(Exception):
    pass


class NumericalFailure(Exception):
    pass


_NUMERICAL = (
    lindblad.NonPhysicalState,
    lindblad.OverlongStep,
    calib.OverdampedRegime,
    calib.NoConvergence,
    spectrum.BadWindow,
    spectrum.AllZero,
    FloatingPointError,
    NumericalFailure,
)


# ---------------------------------------------------------------------------
# config


def load_config(path) -> dict:
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(x) for x in exc.absolute_path) or "<root>"
        raise ConfigError(f"config {where}: {exc.message}") from exc
    return cfg


def _carrier(entry) -> str:
    return "-" if entry["carrier"] in ("-", "−") else "+"


def _pattern(cfg) -> tuple[str, ...]:
    seq = cfg.get("sequence")
    if not seq:
        raise ConfigError("sequence must list at least one pulse")
    return tuple(_carrier(e) for e in seq)


def _physics(cfg) -> tuple[float, float]:
    phys = cfg.get("physics", {})
    gamma1 = TWO_PI * phys.get("gamma1_hz", lindblad.DEFAULT_GAMMA1 / TWO_PI)
    detuning = TWO_PI * phys.get("detuning_hz", lindblad.DEFAULT_DETUNING / TWO_PI)
    return gamma1, detuning


def build_pulses(cfg) -> tuple[lindblad.PulseSpec, ...]:
    """Pulses laid end to end; ``gap_ns`` is the spacing before each pulse.

    A negative gap overlaps a pulse with its predecessor.  ``angle`` takes
    precedence over ``rabi_hz``.
    """
    lead = cfg.get("solver", {}).get("lead_ns", 80.0) * 1e-9
    pulses = []
    prev_end = lead
    for k, entry in enumerate(cfg.get("sequence", [])):
        duration = entry.get("duration_ns", 8.0) * 1e-9
        start = prev_end + entry.get("gap_ns", 0.0) * 1e-9
        if "angle" in entry:
            if "rabi_hz" in entry:
                log.warning("pulse %d: both angle and rabi_hz given; using angle", k)
            omega = abs(entry["angle"]) / duration
        elif "rabi_hz" in entry:
            omega = TWO_PI * entry["rabi_hz"]
        else:
            raise ConfigError(f"pulse {k}: give angle or rabi_hz")
        if start < 0:
            raise ConfigError(f"pulse {k} starts before t=0; increase solver.lead_ns")
        pulses.append(lindblad.PulseSpec(_carrier(entry), start, duration, omega))
        prev_end = start + duration
    return tuple(pulses)


# ---------------------------------------------------------------------------
# output helpers


def fmt(x) -> str:
    """Shortest round-trip scientific notation; integers stay integers."""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return np.format_float_scientific(float(x), unique=True, trim="0")


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) if not isinstance(v, str) else v for v in row])
    return path


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")
    return path


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, complex):
        return [o.real, o.imag]
    raise TypeError(type(o))


def _stem(cfg, out_dir: Path, key: str, default: str) -> Path:
    given = cfg.get("output", {}).get(key)
    path = Path(given) if given else Path(default)
    return path if path.is_absolute() else out_dir / path


def _suffixed(path: Path, tag: str, ext: str) -> Path:
    return path.with_name(f"{path.stem}_{tag}{ext}")


# ---------------------------------------------------------------------------
# commands


def cmd_map(cfg, out_dir: Path, workers: int = 1) -> list[Path]:
    from . import plotting

    pattern = _pattern(cfg)
    grid = cfg.get("grid", {})
    backend = cfg.get("backend", "algebra")
    n_theta = grid.get("n_theta", 65)
    tm = grid.get("theta_minus")
    tp = grid.get("theta_plus")
    gamma1, detuning = _physics(cfg)
    solver = cfg.get("solver", {})
    kwargs = {"theta_minus": tm, "theta_plus": tp, "workers": workers}
    if backend == "oracle":
        first = cfg["sequence"][0]
        duration = first.get("duration_ns", 8.0) * 1e-9
        steps = 128
        if "dt_ns" in solver:
            steps = max(1, round(duration / (solver["dt_ns"] * 1e-9)))
        kwargs["settings"] = spectrum.OracleSettings(
            pulse_duration=duration,
            gap=first.get("gap_ns", 0.0) * 1e-9,
            detuning=detuning,
            gamma1=TWO_PI * cfg["physics"]["gamma1_hz"] if "gamma1_hz" in cfg.get("physics", {}) else None,
            gamma1_ratio=solver.get("gamma1_ratio", 0.02),
            repetitions=solver.get("repetitions", 16),
            beats=solver.get("beats", 3),
            steps_per_pulse=steps,
            record_every=solver.get("record_every", 8),
        )
    maps = spectrum.angle_maps(pattern, n_theta, backend, **kwargs)
    csv_base = _stem(cfg, out_dir, "csv_path", "map.csv")
    svg_base = _stem(cfg, out_dir, "svg_path", "map.svg")
    written = []
    for p, m in sorted(maps.items()):
        tag = f"p{p:+d}"
        rows = [
            (a, b, m.values[i, j])
            for i, a in enumerate(m.x_values)
            for j, b in enumerate(m.y_values)
        ]
        written.append(write_csv(_suffixed(csv_base, tag, ".csv"),
                                 ["theta_minus", "theta_plus", "value"], rows))
        written.append(plotting.heatmap_svg(m, _suffixed(svg_base, tag, ".svg")))
    return written


def _scan_settings(cfg):
    grid = cfg.get("grid", {})
    solver = cfg.get("solver", {})
    start = grid.get("shift_start_ns", -50.0)
    stop = grid.get("shift_stop_ns", 50.0)
    step = grid.get("shift_step_ns", 1.0)
    if stop < start:
        raise ConfigError("shift_stop_ns must not be below shift_start_ns")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    centers = (start + step * np.arange(count)) * 1e-9
    return centers, grid, solver


def _run_scan(cfg, centers, workers):
    pulses = build_pulses(cfg)
    if not pulses:
        raise ConfigError("shift scan needs at least one pulse")
    gamma1, detuning = _physics(cfg)
    grid = cfg.get("grid", {})
    solver = cfg.get("solver", {})
    moving = grid.get("moving_pulse", len(pulses) // 2 if len(pulses) > 2 else len(pulses) - 1)
    if moving >= len(pulses):
        raise ConfigError("grid.moving_pulse is out of range")
    p_max = grid.get("p_max", 2 * len(pulses) + 9)
    p_max -= 1 - p_max % 2
    omegas = [TWO_PI * f for f in grid["rabi_hz"]] if "rabi_hz" in grid else None
    dt = solver["dt_ns"] * 1e-9 if "dt_ns" in solver else None
    return spectrum.shift_scan(
        pulses, moving, centers, list(range(-p_max, p_max + 1, 2)),
        omegas=omegas, detuning=detuning, gamma1=gamma1,
        repetitions=solver.get("repetitions", 16), beats=solver.get("beats", 3),
        dt=dt, record_every=solver.get("record_every", 8),
        threshold=grid.get("threshold", spectrum.DEFAULT_THRESHOLD), workers=workers,
    )


def _spectrum_rows(ps, values):
    return [(p, v.real, v.imag, abs(v)) for p, v in zip(ps, values)]


def cmd_shift_scan(cfg, out_dir: Path, workers: int = 1) -> list[Path]:
    from . import plotting

    centers, grid, _ = _scan_settings(cfg)
    scan = _run_scan(cfg, centers, workers)
    centers_ns = np.round(scan.centers * 1e9, 9)
    threshold = grid.get("threshold", spectrum.DEFAULT_THRESHOLD)
    csv_base = _stem(cfg, out_dir, "csv_path", "shift_scan.csv")
    written = []
    for k, om in enumerate(scan.omegas):
        path = csv_base if len(scan.omegas) == 1 else _suffixed(csv_base, f"rabi{k}", ".csv")
        rows = [
            (c, p, abs(scan.amplitudes[k, i, j]))
            for i, c in enumerate(centers_ns)
            for j, p in enumerate(scan.components)
        ]
        written.append(write_csv(path, ["t2_center_ns", "p", "value"], rows))
    counts = scan.column_counts(threshold)
    written.append(write_csv(_suffixed(csv_base, "regions", ".csv"), ["t2_center", "peak_count"],
                             zip(centers_ns, counts)))
    regions = spectrum.classify_regions(centers_ns, counts)
    summary = {
        "rabi_hz": (scan.omegas / TWO_PI).tolist(),
        "threshold": threshold,
        "regions": [
            {k: v for k, v in r.items() if k != "counts"} | {"max_count": max(r["counts"])}
            for r in regions
        ],
        "boundaries_ns": [r["upper_boundary"] for r in regions if "upper_boundary" in r],
    }
    written.append(write_json(_suffixed(csv_base, "regions", ".json"), summary))
    if len(cfg.get("sequence", [])) == 2:
        written.append(_write_symmetry(scan, csv_base))
    if len(scan.centers) == 1:
        vals = scan.amplitudes[0, 0]
        written.append(write_csv(_suffixed(csv_base, "spectrum", ".csv"),
                                 ["p", "real", "imag", "abs"], _spectrum_rows(scan.components, vals)))
    svg = _stem(cfg, out_dir, "svg_path", "shift_scan.svg")
    written.append(plotting.shift_scan_svg(scan, svg, regions))
    for m in scan.maps():
        if len(scan.omegas) > 1:
            written.append(plotting.heatmap_svg(m, _suffixed(svg, f"p{m.component:+d}", ".svg")))
    return written


def _write_symmetry(scan, csv_base) -> Path:
    """|V_p(Ω, t)| next to |V_{-p}(Ω, -t)| on the mirrored grid points."""
    centers = np.round(scan.centers * 1e12).astype(np.int64)  # ps, to match mirrored points
    index = {c: i for i, c in enumerate(centers)}
    rows = []
    top = np.abs(scan.amplitudes).max()
    for k, om in enumerate(scan.omegas):
        for i, c in enumerate(centers):
            j = index.get(-c)
            if j is None:
                continue
            for n, p in enumerate(scan.components):
                if -p not in scan.components:
                    continue
                a = abs(scan.amplitudes[k, i, n])
                b = abs(scan.amplitudes[k, j, scan.components.index(-p)])
                rows.append((om / TWO_PI, c * 1e-3, p, a, b, abs(a - b) / top if top else 0.0))
    return write_csv(_suffixed(csv_base, "symmetry", ".csv"),
                     ["rabi_hz", "t2_center_ns", "p", "value", "mirror_value", "relative_difference"], rows)


def cmd_spectrum(cfg, out_dir: Path, workers: int = 1) -> list[Path]:
    from . import plotting

    pulses = build_pulses(cfg)
    gamma1, detuning = _physics(cfg)
    grid = cfg.get("grid", {})
    solver = cfg.get("solver", {})
    p_max = grid.get("p_max", 2 * len(pulses) + 9)
    p_max -= 1 - p_max % 2
    ps = list(range(-p_max, p_max + 1, 2))
    reps, beats = solver.get("repetitions", 16), solver.get("beats", 3)
    period = lindblad.beat_locked_period(detuning, reps, beats)
    seq = lindblad.PulseSequence(pulses, detuning, gamma1, period, reps)
    if "dt_ns" in solver:
        dt = solver["dt_ns"] * 1e-9
    elif pulses:
        dt = min(min(p.duration for p in pulses) / 128, lindblad.max_step(seq))
    else:
        dt = 1e-9
    trace = lindblad.evolve(seq, dt, record_every=solver.get("record_every", 8))
    table = spectrum.comb_amplitudes(trace, detuning, p_max)
    values = np.array([table[p] for p in ps], dtype=complex)
    csv_base = _stem(cfg, out_dir, "csv_path", "spectrum.csv")
    written = [write_csv(csv_base, ["p", "real", "imag", "abs"], _spectrum_rows(ps, values))]
    freqs = full = None
    if cfg.get("output", {}).get("full_fft", False):
        full = np.fft.fftshift(np.fft.fft(trace.samples)) / len(trace.samples)
        freqs = np.fft.fftshift(np.fft.fftfreq(len(trace.samples), trace.dt)) * TWO_PI / detuning
        keep = np.abs(freqs) <= p_max + 1
        freqs, full = freqs[keep], full[keep]
        written.append(write_csv(_suffixed(csv_base, "fft", ".csv"),
                                 ["p", "real", "imag", "abs"], _spectrum_rows(freqs, full)))
    svg = _stem(cfg, out_dir, "svg_path", "spectrum.svg")
    written.append(plotting.spectrum_svg(ps, values, svg, freqs, full))
    return written


def cmd_validate(cfg, out_dir: Path, workers: int = 1, quick: bool = False) -> tuple[list[Path], bool]:
    from .validation import run_checks

    report = run_checks(quick=quick, workers=workers)
    path = _stem(cfg, out_dir, "csv_path", "validate_report.json").with_suffix(".json")
    for c in report["checks"]:
        status = "PASS" if c["passed"] else "FAIL"
        print(f"{status} {c['name']}", file=sys.stderr)
    return [write_json(path, report)], report["passed"]


def _rabi_trace(rcfg, gamma1, rabi_hz, rng):
    duration = rcfg.get("duration_ns", 1000.0) * 1e-9
    dt = rcfg.get("dt_ns", 1.0) * 1e-9
    n = int(round(duration / dt))
    t = dt * np.arange(n)
    source = rcfg.get("source", "analytic")
    params = calib.RabiParams(TWO_PI * rabi_hz, gamma1)
    if source == "analytic":
        data = calib.rabi_analytic(params, t)[1]
    else:
        sub = max(1, math.ceil(dt * 20 * params.omega))
        seq = lindblad.PulseSequence(
            (lindblad.PulseSpec("+", 0.0, duration, params.omega),), 0.0, gamma1, 2 * duration, 1
        )
        trace = lindblad.evolve(seq, dt / sub, duration, record_every=sub)
        data = -2 * np.imag(trace.samples[:n])
    noise = rcfg.get("noise", 0.0)
    if noise:
        data = data + noise * rng.standard_normal(len(data))
    return t, data


def cmd_rabi_fit(cfg, out_dir: Path, workers: int = 1) -> list[Path]:
    from . import plotting

    rcfg = cfg.get("rabi", {})
    gamma1, _ = _physics(cfg)
    rng = np.random.default_rng(cfg.get("seed", 0))
    csv_base = _stem(cfg, out_dir, "csv_path", "rabi.csv")
    svg_base = _stem(cfg, out_dir, "svg_path", "rabi.svg")
    written = []
    if "amplitudes" in rcfg:
        per_amp = rcfg.get("hz_per_amplitude", 20e6)
        amps = np.asarray(rcfg["amplitudes"], dtype=float)
        fits = []
        for a in amps:
            t, data = _rabi_trace(rcfg, gamma1, per_amp * a, rng)
            fits.append(calib.fit_rabi(data, t[1] - t[0]))
        om = np.array([f.params.omega for f in fits])
        slope, intercept = np.polyfit(amps, om, 1)
        r2 = float(np.corrcoef(amps, om)[0, 1] ** 2)
        written.append(write_csv(_suffixed(csv_base, "linearity", ".csv"),
                                 ["amplitude", "omega", "omega_stderr", "gamma1"],
                                 [(a, f.params.omega, f.stderr["omega"], f.params.gamma1)
                                  for a, f in zip(amps, fits)]))
        written.append(write_json(_suffixed(csv_base, "linearity", ".json"), {
            "slope_rad_per_s": slope, "intercept_rad_per_s": intercept, "r_squared": r2,
        }))
        written.append(plotting.linearity_svg(amps, om, slope, intercept,
                                              _suffixed(svg_base, "linearity", ".svg")))
        return written
    if rcfg.get("source") == "file":
        if "trace_csv" not in rcfg:
            raise ConfigError("rabi.source 'file' needs rabi.trace_csv")
        raw = np.loadtxt(rcfg["trace_csv"], delimiter=",", skiprows=1, ndmin=2)
        t, data = raw[:, 0], raw[:, 1]
    else:
        t, data = _rabi_trace(rcfg, gamma1, rcfg.get("rabi_hz", 20e6), rng)
    fit = calib.fit_rabi(data, t[1] - t[0])
    model = fit.model(t - t[0])
    written.append(write_json(csv_base.with_suffix(".json"), {
        "omega": fit.params.omega,
        "gamma1": fit.params.gamma1,
        "omega_prime": fit.params.omega_prime,
        "scale": fit.scale,
        "stderr": fit.stderr,
    }))
    written.append(write_csv(_suffixed(csv_base, "overlay", ".csv"), ["t", "data", "fit"],
                             zip(t, data, model)))
    written.append(plotting.rabi_svg(t, data, model, svg_base))
    return written


COMMANDS = {
    "map": cmd_map,
    "shift-scan": cmd_shift_scan,
    "spectrum": cmd_spectrum,
    "rabi-fit": cmd_rabi_fit,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qwm", description=__doc__.split("\n")[0])
    ap.add_argument("command", choices=[*COMMANDS, "validate"])
    ap.add_argument("--config", help="JSON configuration file")
    ap.add_argument("--out-dir", default=".", help="directory for relative output paths")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--quick", action="store_true", help="validate: symbolic checks only")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    out_dir = Path(args.out_dir)
    start = time.perf_counter()
    try:
        if args.command != "validate" and args.config is None:
            raise ConfigError(f"{args.command} needs --config")
        cfg = load_config(args.config)
        if args.workers < 1:
            raise ConfigError("--workers must be >= 1")
        if args.command == "validate":
            written, ok = cmd_validate(cfg, out_dir, args.workers, args.quick)
        else:
            written, ok = COMMANDS[args.command](cfg, out_dir, args.workers), True
    except ConfigError as exc:
        print(f"qwm: config error: {exc}", file=sys.stderr)
        return 2
    except _NUMERICAL as exc:
        print(f"qwm: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except (opalgebra.EmptySequence, ValueError) as exc:
        print(f"qwm: config error: {exc}", file=sys.stderr)
        return 2
    for path in written:
        print(path)
    log.info("done in %.2f s", time.perf_counter() - start)
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
