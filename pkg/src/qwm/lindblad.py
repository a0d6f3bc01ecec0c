"""Lindblad oracle for a two-level system under bichromatic pulsed drive.

Frame and conventions
---------------------
* Basis index 0 is the ground state, 1 the excited state.
* In the frame rotating at the central drive frequency the Hamiltonian is
  ``H = [[0, h], [h*, 0]]`` with ``h = (Ω₊ e^{-iδω t} + Ω₋ e^{+iδω t}) / 2``.
  ``Ω`` is the Rabi frequency, so a rectangular pulse rotates the qubit by
  ``θ = Ω Δt``.  The carrier phase is continuous in time (no reset per pulse).
* Radiative decay ``Γ₁ (σ⁻ ρ σ⁺ - {σ⁺σ⁻, ρ}/2)`` is the only dissipator.
* The recorded coherence is ``⟨σ⁻⟩ = Tr(ρ σ⁻) = ρ[1, 0]``.  A term that
  varies as ``e^{+ipδω t₀}`` with the sequence start ``t₀`` feeds side peak
  ``p``.

Driven steps use classical RK4; undriven steps use the exact free-decay
propagator.  Rectangular edges are snapped to the integration grid so no step
straddles a discontinuity.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from numba import njit

__all__ = [
    "PulseSpec",
    "PulseSequence",
    "TimeTrace",
    "OverlongStep",
    "StepTooLarge",
    "NonPhysicalState",
    "DEFAULT_GAMMA1",
    "DEFAULT_DETUNING",
    "beat_period",
    "beat_locked_period",
    "sample_envelopes",
    "rwa_hamiltonian",
    "evolve",
    "max_step",
]

TWO_PI = 2.0 * math.pi
DEFAULT_GAMMA1 = TWO_PI * 1.64e6
DEFAULT_DETUNING = TWO_PI * 50e3

_TRACE_TOL = 1e-9
_PSD_TOL = -1e-9


class OverlongStep(ValueError):
    """Step does not resolve the fastest Rabi rotation."""


class StepTooLarge(OverlongStep):
    """Step does not resolve the Rabi rotation or the detuning beat."""


class NonPhysicalState(RuntimeError):
    """Density matrix lost trace, hermiticity or positivity."""


@dataclass(frozen=True)
class PulseSpec:
    carrier: str  # "-" or "+"
    start: float
    duration: float
    rabi_amplitude: float
    edge: float = 0.0  # cosine ramp length; 0 means rectangular

    def __post_init__(self):
        if self.carrier not in ("-", "+"):
            raise ValueError(f"carrier must be '-' or '+', got {self.carrier!r}")
        if not self.duration > 0:
            raise ValueError("pulse duration must be positive")
        if self.rabi_amplitude < 0:
            raise ValueError("rabi_amplitude must be non-negative")
        if self.edge < 0 or (self.edge > 0 and self.edge >= self.duration / 2):
            raise ValueError("ramp edge must satisfy 0 <= edge < duration/2")

    @property
    def end(self) -> float:
        return self.start + self.duration

    @property
    def center(self) -> float:
        return self.start + self.duration / 2

    def shifted(self, offset: float) -> "PulseSpec":
        return replace(self, start=self.start + offset)


@dataclass(frozen=True)
class PulseSequence:
    """Pulses of one repetition plus the drive/decay constants.

    The pulse pattern repeats ``repetitions`` times with period
    ``repetition_period``; pulse times are relative to each repetition start.
    """

    pulses: tuple = ()
    detuning: float = DEFAULT_DETUNING
    gamma1: float = DEFAULT_GAMMA1
    repetition_period: float = 40e-6
    repetitions: int = 1

    def __post_init__(self):
        object.__setattr__(self, "pulses", tuple(self.pulses))
        if self.detuning < 0 or self.gamma1 < 0:
            raise ValueError("detuning and gamma1 must be non-negative")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if self.pulses and self.repetition_period <= max(p.end for p in self.pulses):
            raise ValueError("repetition_period must exceed the last pulse end")
        if self.pulses and min(p.start for p in self.pulses) < 0:
            raise ValueError("pulse starts must be non-negative")

    @property
    def window(self) -> float:
        return self.repetitions * self.repetition_period

    @property
    def max_rabi(self) -> float:
        """Largest summed envelope, counting overlaps of same-carrier pulses."""
        best = 0.0
        for carrier in ("-", "+"):
            same = [p for p in self.pulses if p.carrier == carrier]
            for p in same:
                total = sum(q.rabi_amplitude for q in same if q.start < p.end and p.start < q.end)
                best = max(best, total)
        return best

    def expanded(self) -> list[PulseSpec]:
        return [
            p.shifted(k * self.repetition_period)
            for k in range(self.repetitions)
            for p in self.pulses
        ]


@dataclass
class TimeTrace:
    """Uniformly sampled ``⟨σ⁻(t)⟩`` starting at ``t0``."""

    dt: float
    samples: np.ndarray
    t0: float = 0.0
    excited: np.ndarray | None = None
    final_state: np.ndarray | None = None
    diagnostics: dict = field(default_factory=dict)
    drive_on: np.ndarray | None = None  # True where a recorded interval overlaps a pulse

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(len(self.samples))

    @property
    def duration(self) -> float:
        return self.dt * len(self.samples)


def beat_period(detuning: float) -> float:
    """Period of the two-tone envelope, ``2π / (2δω)``."""
    return math.pi / detuning


def beat_locked_period(detuning: float, repetitions: int, beats: int) -> float:
    """Repetition period that spreads the sequence starts evenly over the beat.

    ``repetitions`` starts span ``beats`` beat periods; with
    ``gcd(repetitions, beats) == 1`` the starts sample the beat phase at
    ``repetitions`` distinct, evenly spaced points.
    """
    if math.gcd(repetitions, beats) != 1:
        raise ValueError("repetitions and beats must be coprime")
    return beats * beat_period(detuning) / repetitions


def max_step(seq: PulseSequence) -> float:
    """Largest integration step allowed for ``seq``."""
    limits = []
    if seq.max_rabi > 0:
        limits.append(1.0 / (20.0 * seq.max_rabi))
    if seq.detuning > 0 and seq.max_rabi > 0:
        limits.append(1.0 / (20.0 * seq.detuning))
    return min(limits) if limits else math.inf


def _pulse_arrays(pulses: Sequence[PulseSpec], dt: float):
    starts = np.array([round(p.start / dt) for p in pulses], dtype=np.int64)
    ends = np.array([round(p.end / dt) for p in pulses], dtype=np.int64)
    amps = np.array([p.rabi_amplitude for p in pulses], dtype=np.float64)
    signs = np.array([-1 if p.carrier == "-" else 1 for p in pulses], dtype=np.int64)
    edges = np.array([p.edge for p in pulses], dtype=np.float64)
    return starts, ends, amps, signs, edges


@njit(cache=True)
def _envelope_at(t, k_step, dt, starts, ends, amps, signs, edges):
    """(Ω₋, Ω₊) at time t inside integration step k_step."""
    om_m = 0.0
    om_p = 0.0
    for j in range(starts.shape[0]):
        if k_step < starts[j] or k_step >= ends[j]:
            continue
        a = amps[j]
        e = edges[j]
        if e > 0.0:
            t0 = starts[j] * dt
            t1 = ends[j] * dt
            if t < t0 + e:
                a *= 0.5 * (1.0 - math.cos(math.pi * (t - t0) / e))
            elif t > t1 - e:
                a *= 0.5 * (1.0 - math.cos(math.pi * (t1 - t) / e))
        if signs[j] < 0:
            om_m += a
        else:
            om_p += a
    return om_m, om_p


@njit(cache=True)
def _rhs(r00, r01, r10, r11, h, gamma):
    # H = [[0, h], [conj(h), 0]]; L = sigma_minus = |0><1|
    hc = h.conjugate()
    # commutator part: -i (H rho - rho H)
    hr00 = h * r10
    hr01 = h * r11
    hr10 = hc * r00
    hr11 = hc * r01
    rh00 = r01 * hc
    rh01 = r00 * h
    rh10 = r11 * hc
    rh11 = r10 * h
    d00 = -1j * (hr00 - rh00) + gamma * r11
    d01 = -1j * (hr01 - rh01) - 0.5 * gamma * r01
    d10 = -1j * (hr10 - rh10) - 0.5 * gamma * r10
    d11 = -1j * (hr11 - rh11) - gamma * r11
    return d00, d01, d10, d11


@njit(cache=True)
def _coupling(om_m, om_p, detuning, t):
    return 0.5 * (om_p * np.exp(-1j * detuning * t) + om_m * np.exp(1j * detuning * t))


@njit(cache=True)
def _driven_mask(n_steps, starts, ends):
    mask = np.zeros(n_steps, dtype=np.bool_)
    for j in range(starts.shape[0]):
        lo = max(starts[j], 0)
        hi = min(ends[j], n_steps)
        for k in range(lo, hi):
            mask[k] = True
    return mask


@njit(cache=True)
def _integrate(rho0, n_steps, record_every, dt, detuning, gamma, starts, ends, amps, signs, edges):
    n_rec = n_steps // record_every
    coh = np.empty(n_rec, dtype=np.complex128)
    exc = np.empty(n_rec, dtype=np.float64)
    gated = np.zeros(n_rec, dtype=np.bool_)
    r00 = rho0[0, 0]
    r01 = rho0[0, 1]
    r10 = rho0[1, 0]
    r11 = rho0[1, 1]
    driven = _driven_mask(n_steps, starts, ends)
    free_pop = math.exp(-gamma * dt)
    free_coh = math.exp(-0.5 * gamma * dt)
    worst_trace = 0.0
    worst_eig = 0.0
    worst_herm = 0.0
    for k in range(n_steps):
        if k % record_every == 0:
            i = k // record_every
            if i < n_rec:
                coh[i] = r10
                exc[i] = r11.real
        if driven[k]:
            gated[min(k // record_every, n_rec - 1)] = True
        t = k * dt
        if driven[k]:
            om_m, om_p = _envelope_at(t, k, dt, starts, ends, amps, signs, edges)
            h1 = _coupling(om_m, om_p, detuning, t)
            om_m, om_p = _envelope_at(t + 0.5 * dt, k, dt, starts, ends, amps, signs, edges)
            h2 = _coupling(om_m, om_p, detuning, t + 0.5 * dt)
            om_m, om_p = _envelope_at(t + dt, k, dt, starts, ends, amps, signs, edges)
            h3 = _coupling(om_m, om_p, detuning, t + dt)
            a00, a01, a10, a11 = _rhs(r00, r01, r10, r11, h1, gamma)
            b00, b01, b10, b11 = _rhs(
                r00 + 0.5 * dt * a00, r01 + 0.5 * dt * a01,
                r10 + 0.5 * dt * a10, r11 + 0.5 * dt * a11, h2, gamma)
            c00, c01, c10, c11 = _rhs(
                r00 + 0.5 * dt * b00, r01 + 0.5 * dt * b01,
                r10 + 0.5 * dt * b10, r11 + 0.5 * dt * b11, h2, gamma)
            d00, d01, d10, d11 = _rhs(
                r00 + dt * c00, r01 + dt * c01,
                r10 + dt * c10, r11 + dt * c11, h3, gamma)
            r00 = r00 + dt / 6.0 * (a00 + 2 * b00 + 2 * c00 + d00)
            r01 = r01 + dt / 6.0 * (a01 + 2 * b01 + 2 * c01 + d01)
            r10 = r10 + dt / 6.0 * (a10 + 2 * b10 + 2 * c10 + d10)
            r11 = r11 + dt / 6.0 * (a11 + 2 * b11 + 2 * c11 + d11)
            tr = abs(r00 + r11 - 1.0)
            if tr > worst_trace:
                worst_trace = tr
            herm = abs(r01 - r10.conjugate())
            if herm > worst_herm:
                worst_herm = herm
            half = 0.5 * (r00.real + r11.real)
            diff = 0.5 * (r00.real - r11.real)
            lam = half - math.sqrt(diff * diff + abs(r01) ** 2)
            if lam < worst_eig:
                worst_eig = lam
        else:
            moved = r11 * (1.0 - free_pop)
            r11 = r11 * free_pop
            r00 = r00 + moved
            r01 = r01 * free_coh
            r10 = r10 * free_coh
    final = np.empty((2, 2), dtype=np.complex128)
    final[0, 0] = r00
    final[0, 1] = r01
    final[1, 0] = r10
    final[1, 1] = r11
    return coh, exc, gated, final, worst_trace, worst_herm, worst_eig


def sample_envelopes(seq: PulseSequence, dt: float, t_end: float | None = None):
    """Summed (Ω₋, Ω₊) on the grid ``t_k = k dt`` over ``[0, t_end)``.

    Pulse edges are snapped to the nearest grid point.  Raises
    :class:`OverlongStep` when ``dt`` under-resolves the strongest drive.
    """
    if seq.max_rabi > 0 and dt > 1.0 / (20.0 * seq.max_rabi):
        raise OverlongStep(
            f"dt={dt:.3e} s exceeds 1/(20 max Ω)={1.0 / (20.0 * seq.max_rabi):.3e} s"
        )
    t_end = seq.window if t_end is None else t_end
    n = int(round(t_end / dt))
    if abs(n * dt - t_end) > 1e-3 * t_end:
        raise ValueError("dt must divide the window within 0.1%")
    starts, ends, amps, signs, edges = _pulse_arrays(seq.expanded(), dt)
    om_m = np.zeros(n)
    om_p = np.zeros(n)
    for k in np.flatnonzero(_driven_mask(n, starts, ends)):
        om_m[k], om_p[k] = _envelope_at(k * dt, k, dt, starts, ends, amps, signs, edges)
    return om_m, om_p


def rwa_hamiltonian(omega_minus: float, omega_plus: float, detuning: float, t: float) -> np.ndarray:
    """2×2 RWA Hamiltonian with off-diagonal ``Ω₊e^{-iδωt} + Ω₋e^{iδωt}``.

    The arguments are the literal off-diagonal amplitudes; :func:`evolve`
    passes half the Rabi frequency so that ``θ = Ω Δt``.
    """
    h = omega_plus * np.exp(-1j * detuning * t) + omega_minus * np.exp(1j * detuning * t)
    return np.array([[0.0, h], [np.conj(h), 0.0]], dtype=complex)


def evolve(
    seq: PulseSequence,
    dt: float,
    t_end: float | None = None,
    *,
    record_every: int = 1,
    rho0: np.ndarray | None = None,
    check: bool = True,
) -> TimeTrace:
    """Integrate the master equation and record ``⟨σ⁻⟩`` every ``record_every`` steps.

    ``dt`` is the integration step.  ``rho0`` overrides the ground-state
    start and exists for tests.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    limit = max_step(seq)
    if dt > limit * (1 + 1e-12):
        raise StepTooLarge(f"dt={dt:.3e} s exceeds the resolvable step {limit:.3e} s")
    t_end = seq.window if t_end is None else t_end
    n_steps = int(round(t_end / dt))
    if n_steps < 1:
        raise ValueError("t_end must cover at least one step")
    if record_every < 1:
        raise ValueError("record_every must be >= 1")
    n_steps -= n_steps % record_every
    if rho0 is None:
        rho0 = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex)
    rho0 = np.asarray(rho0, dtype=complex)
    pulses = seq.expanded()
    if pulses:
        starts, ends, amps, signs, edges = _pulse_arrays(pulses, dt)
    else:
        starts = ends = signs = np.zeros(0, dtype=np.int64)
        amps = edges = np.zeros(0)
    coh, exc, gated, final, worst_trace, worst_herm, worst_eig = _integrate(
        rho0, n_steps, record_every, dt, seq.detuning, seq.gamma1,
        starts, ends, amps, signs, edges,
    )
    diagnostics = {
        "max_trace_error": worst_trace,
        "max_hermiticity_error": worst_herm,
        "min_eigenvalue": worst_eig,
        "steps": n_steps,
    }
    if check:
        if worst_trace > _TRACE_TOL or worst_herm > _TRACE_TOL:
            raise NonPhysicalState(f"trace/hermiticity drift: {diagnostics}")
        if worst_eig < _PSD_TOL:
            raise NonPhysicalState(f"negative eigenvalue: {diagnostics}")
    return TimeTrace(dt * record_every, coh, 0.0, exc, final, diagnostics, gated)
