"""Elastic comb extraction, quadrature rotation and sweep maps."""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from . import opalgebra
from .lindblad import (
    DEFAULT_DETUNING,
    DEFAULT_GAMMA1,
    PulseSequence,
    PulseSpec,
    TimeTrace,
    beat_locked_period,
    beat_period,
    evolve,
    max_step,
)
from .opalgebra import ComponentTable, RotationAngles

__all__ = [
    "BadWindow",
    "AllZero",
    "SpectrumMap",
    "OracleSettings",
    "ShiftScan",
    "comb_amplitudes",
    "rotate_quadrature",
    "count_peaks",
    "theta_grid",
    "angle_map",
    "angle_maps",
    "oracle_table",
    "pattern_sequence",
    "shift_scan",
    "three_pulse_geometry",
    "two_pulse_geometry",
    "classify_regions",
    "scaled_correlation",
    "duration_sequence",
    "DEFAULT_THRESHOLD",
]

DEFAULT_THRESHOLD = 0.02
_FLOOR = 1e-14


class BadWindow(ValueError):
    """Trace length is not a whole number of beat periods."""


class AllZero(ValueError):
    """No component rises above the numerical floor."""


@dataclass
class SpectrumMap:
    x_name: str
    x_values: np.ndarray
    y_name: str
    y_values: np.ndarray
    component: int
    values: np.ndarray  # shape (len(x_values), len(y_values))

    def __post_init__(self):
        self.x_values = np.asarray(self.x_values, dtype=float)
        self.y_values = np.asarray(self.y_values, dtype=float)
        self.values = np.asarray(self.values)
        if self.values.shape != (len(self.x_values), len(self.y_values)):
            raise ValueError(
                f"values shape {self.values.shape} does not match axes "
                f"({len(self.x_values)}, {len(self.y_values)})"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("map contains non-finite values")


def comb_amplitudes(
    trace: TimeTrace, detuning: float, max_p: int, *, gate_drive: bool = False
) -> ComponentTable:
    """Complex amplitudes ``(1/T) Σ trace(t) e^{-ipδω t} dt`` at odd ``|p| <= max_p``.

    ``gate_drive`` zeroes the samples recorded while any pulse is on, so only
    the free emission after each sequence is analysed.
    """
    if not detuning > 0:
        raise BadWindow("comb extraction needs a non-zero detuning")
    window = trace.duration
    beats = window / beat_period(detuning)
    if round(beats) < 1 or abs(beats - round(beats)) > 1e-3 * max(round(beats), 1):
        raise BadWindow(f"window spans {beats:.6f} beat periods, not an integer")
    t = trace.times
    samples = np.asarray(trace.samples)
    if gate_drive and trace.drive_on is not None:
        samples = np.where(trace.drive_on, 0.0, samples)
    entries = {}
    for p in range(-max_p if max_p % 2 else -(max_p - 1), max_p + 1, 2):
        entries[p] = complex(np.sum(samples * np.exp(-1j * p * detuning * t)) * trace.dt / window)
    return ComponentTable(entries, 0, (0, 0))


def rotate_quadrature(table: ComponentTable) -> tuple[ComponentTable, float]:
    """Rotate all entries by one phase so the field sits in the real quadrature.

    ``φ = arg(Σ V_p²) / 2`` minimises ``Σ |Im(e^{-iφ} V_p)|²``; of the two
    minimisers the one that makes the largest entry positive is returned.
    """
    values = np.array([table.entries[p] for p in table.keys()], dtype=complex)
    if values.size == 0 or np.max(np.abs(values)) < _FLOOR:
        raise AllZero("every component is below the numerical floor")
    phi = 0.5 * np.angle(np.sum(values**2))
    rotated = values * np.exp(-1j * phi)
    if rotated.real[np.argmax(np.abs(rotated))] < 0:
        phi += math.pi
        rotated = -rotated
    phi = (phi + math.pi) % (2 * math.pi) - math.pi
    entries = {p: float(v.real) for p, v in zip(table.keys(), rotated)}
    return replace(table, entries=entries), float(phi)


def count_peaks(table: ComponentTable, threshold_fraction: float = DEFAULT_THRESHOLD) -> int:
    if not 0 < threshold_fraction < 1:
        raise ValueError("threshold_fraction must lie in (0, 1)")
    mags = np.abs(np.array(list(table.entries.values()), dtype=complex))
    if mags.size == 0 or mags.max() < _FLOOR:
        return 0
    return int(np.sum(mags >= threshold_fraction * mags.max()))


def theta_grid(grid_size: int) -> np.ndarray:
    """``grid_size`` evenly spaced angles covering [0, 2π)."""
    return 2 * math.pi * np.arange(grid_size) / grid_size


@dataclass(frozen=True)
class OracleSettings:
    """Numerical knobs of the Lindblad backend.

    ``gamma1=None`` means ``gamma1_ratio`` times the strongest Rabi frequency
    on the grid, which is the one needed to reach the largest angle within
    ``pulse_duration``.  With ``vary="duration"`` every pulse runs at that
    Rabi frequency and its length sets the angle, so weak pulses spend less
    time decaying.  The sequence repeats ``repetitions`` times over ``beats``
    beat periods so that its start samples the beat phase evenly.
    """

    pulse_duration: float = 8e-9
    gap: float = 0.0
    lead: float = 8e-9
    detuning: float = DEFAULT_DETUNING
    gamma1: float | None = None
    gamma1_ratio: float = 0.02
    repetitions: int = 16
    beats: int = 3
    steps_per_pulse: int = 128
    record_every: int = 8
    max_p: int | None = None
    gate_drive: bool = False
    vary: str = "duration"  # or "amplitude": fixed pulse length, θ set by Rabi frequency

    def step(self) -> float:
        return self.pulse_duration / self.steps_per_pulse


def pattern_sequence(
    pattern: Sequence[str],
    omegas: dict[str, float],
    settings: OracleSettings,
    gamma1: float,
) -> PulseSequence:
    """Non-overlapping train for ``pattern`` with per-carrier Rabi frequencies."""
    pulses = []
    t = settings.lead
    for sign in pattern:
        pulses.append(PulseSpec(sign, t, settings.pulse_duration, omegas[sign]))
        t += settings.pulse_duration + settings.gap
    period = beat_locked_period(settings.detuning, settings.repetitions, settings.beats)
    return PulseSequence(tuple(pulses), settings.detuning, gamma1, period, settings.repetitions)


def oracle_table(
    seq: PulseSequence, dt: float, max_p: int, record_every: int = 1, gate_drive: bool = False
) -> ComponentTable:
    trace = evolve(seq, dt, record_every=record_every)
    return comb_amplitudes(trace, seq.detuning, max_p, gate_drive=gate_drive)


def duration_sequence(
    pattern: Sequence[str],
    angles: dict[str, float],
    omega: float,
    settings: OracleSettings,
    gamma1: float,
    dt: float,
) -> PulseSequence:
    """Train at Rabi frequency ~``omega`` whose pulse lengths set the angles.

    Lengths are rounded to whole steps and the amplitude is adjusted so the
    rotation angle stays exact.  Zero-angle pulses are left out.
    """
    pulses = []
    t = settings.lead
    for sign in pattern:
        theta = angles[sign]
        steps = round(theta / (omega * dt))
        if steps == 0:
            continue
        length = steps * dt
        pulses.append(PulseSpec(sign, t, length, theta / length))
        t += length + settings.gap
    period = beat_locked_period(settings.detuning, settings.repetitions, settings.beats)
    return PulseSequence(tuple(pulses), settings.detuning, gamma1, period, settings.repetitions)


def _oracle_point(args):
    pattern, tm, tp, settings, gamma1, omega_max, max_p, dt = args
    if settings.vary == "duration":
        seq = duration_sequence(pattern, {"-": tm, "+": tp}, omega_max, settings, gamma1, dt)
    else:
        omegas = {"-": tm / settings.pulse_duration, "+": tp / settings.pulse_duration}
        seq = pattern_sequence(pattern, omegas, settings, gamma1)
    return oracle_table(seq, dt, max_p, settings.record_every, settings.gate_drive).entries


def _map_workers(func: Callable, jobs: list, workers: int) -> list:
    if workers <= 1 or len(jobs) < 2:
        return [func(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, jobs, chunksize=max(1, len(jobs) // (4 * workers))))


def angle_maps(
    pattern: Sequence[str],
    grid_size: int | None = None,
    backend: str = "algebra",
    *,
    theta_minus: Sequence[float] | None = None,
    theta_plus: Sequence[float] | None = None,
    components: Sequence[int] | None = None,
    settings: OracleSettings | None = None,
    workers: int = 1,
    complex_values: bool = False,
) -> dict[int, SpectrumMap]:
    """Maps of every requested component over a (θ₋, θ₊) grid.

    The oracle backend rotates all components and grid points by a single
    common phase, so signs are consistent across the map.  With
    ``complex_values`` the unrotated complex amplitudes are returned.
    """
    pattern = tuple(pattern)
    if theta_minus is None or theta_plus is None:
        if grid_size is None:
            raise ValueError("give grid_size or explicit angle axes")
        grid = theta_grid(grid_size)
        theta_minus = grid if theta_minus is None else theta_minus
        theta_plus = grid if theta_plus is None else theta_plus
    tm_axis = np.asarray(theta_minus, dtype=float)
    tp_axis = np.asarray(theta_plus, dtype=float)
    n = len(pattern)
    if components is None:
        components = sorted(opalgebra.matrix_element_terms(pattern))
    components = list(components)
    shape = (len(tm_axis), len(tp_axis))

    if backend == "algebra":
        out = {}
        for p in components:
            vals = np.empty(shape)
            for i, tm in enumerate(tm_axis):
                for j, tp in enumerate(tp_axis):
                    vals[i, j] = opalgebra.evaluate_component(pattern, p, RotationAngles(tm, tp))
            out[p] = SpectrumMap("theta_minus", tm_axis, "theta_plus", tp_axis, p, vals)
        return out
    if backend != "oracle":
        raise ValueError(f"unknown backend {backend!r}")

    settings = settings or OracleSettings()
    max_theta = max(np.max(np.abs(tm_axis)), np.max(np.abs(tp_axis)), 1e-12)
    omega_max = max_theta / settings.pulse_duration
    gamma1 = settings.gamma1 if settings.gamma1 is not None else settings.gamma1_ratio * omega_max
    max_p = settings.max_p or (2 * n - 1)
    probe = pattern_sequence(pattern, {"-": omega_max, "+": omega_max}, settings, gamma1)
    dt = min(settings.step(), max_step(probe))
    jobs = [
        (pattern, tm, tp, settings, gamma1, omega_max, max_p, dt)
        for tm in tm_axis
        for tp in tp_axis
    ]
    results = _map_workers(_oracle_point, jobs, workers)
    cube = np.array(
        [[res.get(p, 0.0) for p in components] for res in results], dtype=complex
    ).reshape(shape + (len(components),))
    if not complex_values:
        flat = ComponentTable({i: v for i, v in enumerate(cube.ravel())})
        if np.max(np.abs(cube)) >= _FLOOR:
            _, phi = rotate_quadrature(flat)
            cube = (cube * np.exp(-1j * phi)).real
        else:
            cube = cube.real
    return {
        p: SpectrumMap("theta_minus", tm_axis, "theta_plus", tp_axis, p, cube[..., k])
        for k, p in enumerate(components)
    }


def angle_map(pattern, p, grid_size, backend="algebra", **kwargs) -> SpectrumMap:
    return angle_maps(pattern, grid_size, backend, components=[p], **kwargs)[p]


# ---------------------------------------------------------------------------
# pulse shift scans


def three_pulse_geometry(
    omega: float,
    durations=(8e-9, 12e-9, 8e-9),
    padding: float = 8e-9,
    lead: float = 80e-9,
) -> tuple[PulseSpec, ...]:
    """ω₋, ω₊, ω₋ pulses; the middle one is centred between the outer two."""
    d1, d2, d3 = durations
    p1 = PulseSpec("-", lead, d1, omega)
    p2 = PulseSpec("+", p1.end + padding, d2, omega)
    p3 = PulseSpec("-", p2.end + padding, d3, omega)
    return p1, p2, p3


def two_pulse_geometry(omega: float, duration: float = 8e-9, lead: float = 80e-9) -> tuple[PulseSpec, ...]:
    """ω₋ and ω₊ pulses with coincident centres (zero shift is full overlap)."""
    return PulseSpec("-", lead, duration, omega), PulseSpec("+", lead, duration, omega)


@dataclass
class ShiftScan:
    """Component amplitudes over (Rabi frequency, centre shift)."""

    centers: np.ndarray  # seconds, shift of the moving pulse centre
    omegas: np.ndarray  # rad/s
    components: list
    amplitudes: np.ndarray  # complex, shape (n_omega, n_centers, n_components)
    peak_counts: np.ndarray = field(default=None)  # shape (n_omega, n_centers)

    def component(self, p: int) -> np.ndarray:
        return self.amplitudes[..., self.components.index(p)]

    def column_counts(self, threshold_fraction: float = DEFAULT_THRESHOLD) -> np.ndarray:
        """Lines present at each shift for at least one drive strength.

        Each spectrum is normalised to its own strongest line first, so an
        accidental zero of one line at one Rabi frequency does not hide it.
        """
        mag = np.abs(self.amplitudes)
        top = mag.max(axis=2, keepdims=True)
        rel = np.divide(mag, top, out=np.zeros_like(mag), where=top > _FLOOR)
        return (rel.max(axis=0) > threshold_fraction).sum(axis=1)

    def maps(self) -> list[SpectrumMap]:
        return [
            SpectrumMap(
                "t2_center", self.centers, "omega", self.omegas, p,
                np.abs(self.component(p)).T,
            )
            for p in self.components
        ]


def _shift_point(args):
    seq, dt, max_p, record_every = args
    return oracle_table(seq, dt, max_p, record_every).entries


def shift_scan(
    base_pulses: Sequence[PulseSpec],
    moving_pulse_index: int,
    centers: Sequence[float],
    p_list: Sequence[int] | None = None,
    *,
    omegas: Sequence[float] | None = None,
    detuning: float = DEFAULT_DETUNING,
    gamma1: float = DEFAULT_GAMMA1,
    repetitions: int = 16,
    beats: int = 3,
    dt: float | None = None,
    record_every: int = 8,
    threshold: float = DEFAULT_THRESHOLD,
    workers: int = 1,
) -> ShiftScan:
    """Move one pulse by each offset in ``centers`` and extract the comb.

    ``omegas`` rescales every pulse to a common Rabi frequency; by default
    the amplitudes in ``base_pulses`` are used unchanged.
    """
    base_pulses = tuple(base_pulses)
    if not 0 <= moving_pulse_index < len(base_pulses):
        raise IndexError("moving pulse index out of range")
    centers = np.atleast_1d(np.asarray(centers, dtype=float))
    if not np.all(np.isfinite(centers)):
        raise ValueError("shift range must be finite")
    if p_list is None:
        top = 2 * len(base_pulses) + 5
        p_list = list(range(-top, top + 1, 2))
    p_list = list(p_list)
    max_p = max(abs(p) for p in p_list)
    omega_axis = (
        np.array([max(p.rabi_amplitude for p in base_pulses)])
        if omegas is None
        else np.asarray(omegas, dtype=float)
    )
    period = beat_locked_period(detuning, repetitions, beats)
    jobs = []
    step = dt
    for om in omega_axis:
        for c in centers:
            pulses = [
                replace(p, rabi_amplitude=om) if omegas is not None else p
                for p in base_pulses
            ]
            pulses[moving_pulse_index] = pulses[moving_pulse_index].shifted(c)
            seq = PulseSequence(tuple(pulses), detuning, gamma1, period, repetitions)
            if step is None:
                shortest = min(p.duration for p in base_pulses)
                step = min(shortest / 128, max_step(seq))
            jobs.append((seq, step, max_p, record_every))
    results = _map_workers(_shift_point, jobs, workers)
    amps = np.array([[r.get(p, 0.0) for p in p_list] for r in results], dtype=complex)
    amps = amps.reshape(len(omega_axis), len(centers), len(p_list))
    counts = np.array(
        [count_peaks(ComponentTable(dict(zip(p_list, row))), threshold) for row in amps.reshape(-1, len(p_list))]
    ).reshape(len(omega_axis), len(centers))
    return ShiftScan(centers, omega_axis, p_list, amps, counts)


def classify_regions(
    centers: Sequence[float], counts: Sequence[int], min_plateau: int = 3
) -> list[dict]:
    """Split a shift scan into stable peak-count plateaus and overlap stretches.

    A plateau is a run of at least ``min_plateau`` consecutive points with the
    same count below 7.  Everything between plateaus (pulse overlap, including
    its partially-developed edges) forms one stretch labelled by its largest
    count, reported as ">=7" when that reaches 7.  Each region records its span
    and the midpoint boundary to the next one.
    """
    centers = np.asarray(centers, dtype=float)
    counts = [int(n) for n in counts]
    if len(centers) != len(counts):
        raise ValueError("centers and counts differ in length")
    runs: list[list[int]] = []
    for i, n in enumerate(counts):
        if runs and counts[runs[-1][0]] == n:
            runs[-1].append(i)
        else:
            runs.append([i])
    stable = [len(r) >= min_plateau and counts[r[0]] < 7 for r in runs]
    groups: list[tuple[bool, list[int]]] = []
    for run, is_plateau in zip(runs, stable):
        if groups and not is_plateau and not groups[-1][0]:
            groups[-1][1].extend(run)
        else:
            groups.append((is_plateau, list(run)))
    regions = []
    for is_plateau, idx in groups:
        peak = max(counts[i] for i in idx)
        regions.append({
            "label": ">=7" if peak >= 7 else str(peak),
            "plateau": is_plateau,
            "start": centers[idx[0]],
            "stop": centers[idx[-1]],
            "counts": [counts[i] for i in idx],
        })
    for left, right in zip(regions, regions[1:]):
        left["upper_boundary"] = 0.5 * (left["stop"] + right["start"])
    return regions


def scaled_correlation(reference: dict, measured: dict) -> tuple[complex, dict]:
    """Pearson r per component after one complex scale shared by all components.

    ``reference`` maps p to real arrays and ``measured`` maps p to complex
    arrays on the same grid.  The scale is the least-squares fit
    ``measured ≈ scale · reference`` over everything at once.
    """
    keys = sorted(reference)
    ref = np.concatenate([np.ravel(reference[p]) for p in keys]).astype(complex)
    got = np.concatenate([np.ravel(measured[p]) for p in keys]).astype(complex)
    norm = np.vdot(ref, ref)
    if abs(norm) < _FLOOR:
        raise AllZero("reference maps are identically zero")
    scale = np.vdot(ref, got) / norm
    out = {}
    for p in keys:
        a = np.ravel(reference[p]).real
        b = (np.ravel(measured[p]) / scale).real
        out[p] = float(np.corrcoef(a, b)[0, 1]) if np.std(a) > 0 and np.std(b) > 0 else float("nan")
    return complex(scale), out
