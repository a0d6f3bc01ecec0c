"""Damped resonant Rabi oscillations and extraction of (Ω, Γ₁) from traces.

Conventions match :mod:`qwm.lindblad`: the drive rotates the qubit about +x,
``⟨σ_z⟩ = -1`` in the ground state and radiative decay is the only loss.  The
Bloch equations are

    d⟨σ_y⟩/dt = -Ω ⟨σ_z⟩ - Γ₁/2 ⟨σ_y⟩
    d⟨σ_z⟩/dt =  Ω ⟨σ_y⟩ - Γ₁ (⟨σ_z⟩ + 1)
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import curve_fit

__all__ = [
    "RabiParams",
    "RabiFit",
    "OverdampedRegime",
    "NoConvergence",
    "rabi_analytic",
    "bloch_rhs",
    "fit_rabi",
]


class OverdampedRegime(ValueError):
    """Ω ≤ Γ₁/4: no oscillation, outside the supported branch."""


class NoConvergence(RuntimeError):
    pass


@dataclass(frozen=True)
class RabiParams:
    omega: float
    gamma1: float

    @property
    def omega_prime(self) -> float:
        if self.omega <= self.gamma1 / 4:
            raise OverdampedRegime(
                f"Ω={self.omega:.4g} must exceed Γ₁/4={self.gamma1 / 4:.4g}"
            )
        return math.sqrt(self.omega**2 - self.gamma1**2 / 16)


def rabi_analytic(params: RabiParams, t):
    """(⟨σ_x⟩, ⟨σ_y⟩, ⟨σ_z⟩) under constant resonant drive from the ground state."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be non-negative")
    om, g = params.omega, params.gamma1
    omp = params.omega_prime
    denom = 2 * om**2 + g**2
    decay = np.exp(-0.75 * g * t)
    c, s = np.cos(omp * t), np.sin(omp * t)
    sy = 2 * om / denom * (g - decay * (g * c - (4 * om**2 - g**2) / (4 * omp) * s))
    if g > 0:
        sz = -g / denom * (g + decay * (1.5 * om**2 / omp * s + 2 * om**2 / g * c))
    else:
        sz = -c
    return np.zeros_like(sy), sy, sz


def bloch_rhs(params: RabiParams, sy, sz):
    """Time derivatives of (⟨σ_y⟩, ⟨σ_z⟩)."""
    om, g = params.omega, params.gamma1
    return -om * sz - 0.5 * g * sy, om * sy - g * (sz + 1)


@dataclass(frozen=True)
class RabiFit:
    params: RabiParams
    scale: float
    stderr: dict
    covariance: np.ndarray

    def model(self, t):
        return self.scale * rabi_analytic(self.params, t)[1]


def _initial_guess(y: np.ndarray, dt: float) -> tuple[float, float, float]:
    n = len(y)
    centred = y - np.mean(y[n // 2:])
    spectrum = np.abs(np.fft.rfft(centred * np.hanning(n), 8 * n))
    freqs = np.fft.rfftfreq(8 * n, dt)
    k = np.argmax(spectrum[1:]) + 1
    omega = 2 * math.pi * freqs[k]
    # log-envelope slope from the local extrema of the centred trace
    idx = [i for i in range(1, n - 1)
           if abs(centred[i]) >= abs(centred[i - 1]) and abs(centred[i]) >= abs(centred[i + 1])]
    peaks = [i for i in idx if abs(centred[i]) > 0.05 * np.max(np.abs(centred))]
    gamma = 0.0
    if len(peaks) >= 3:
        tp = np.array(peaks) * dt
        slope = np.polyfit(tp, np.log(np.abs(centred[peaks])), 1)[0]
        gamma = max(-slope / 0.75, 0.0)
    if gamma <= 0:
        gamma = 0.05 * omega
    scale = np.max(np.abs(y)) or 1.0
    return omega, min(gamma, 3.9 * omega), scale


def fit_rabi(trace, dt: float, *, max_iterations: int = 2000) -> RabiFit:
    """Least-squares fit of ``scale · ⟨σ_y⟩(t; Ω, Γ₁)`` to samples at ``t = k dt``."""
    y = np.asarray(trace, dtype=float)
    if y.ndim != 1 or len(y) < 16:
        raise ValueError("trace must be a 1-D array with at least 16 samples")
    t = dt * np.arange(len(y))
    omega0, gamma0, scale0 = _initial_guess(y, dt)
    if omega0 * t[-1] < 3 * 2 * math.pi:
        raise ValueError("trace must span at least three Rabi periods")

    def model(tt, omega, gamma, scale):
        if omega <= abs(gamma) / 4:
            return np.full_like(tt, 1e6)
        return scale * rabi_analytic(RabiParams(omega, abs(gamma)), tt)[1]

    try:
        popt, pcov = curve_fit(
            model, t, y, p0=(omega0, gamma0, scale0), maxfev=max_iterations
        )
    except RuntimeError as exc:
        raise NoConvergence(str(exc)) from exc
    omega, gamma, scale = popt[0], abs(popt[1]), popt[2]
    params = RabiParams(omega, gamma)
    params.omega_prime  # raises OverdampedRegime
    err = np.sqrt(np.clip(np.diag(pcov), 0, None))
    return RabiFit(params, scale, {"omega": err[0], "gamma1": err[1], "scale": err[2]}, pcov)
