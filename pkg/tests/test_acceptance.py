"""Acceptance criteria, one test each, at the stated tolerances.

Each test records a PASS/FAIL line that pytest prints in its summary; run
this file directly to print the lines without pytest.
"""
import math
import time

import numpy as np
import pytest

from qwm import opalgebra, reference, spectrum, validation
from qwm.calib import RabiParams, fit_rabi, rabi_analytic
from qwm.lindblad import PulseSequence, PulseSpec, evolve
from qwm.opalgebra import RotationAngles, alternating_pattern, evaluate_component

try:
    from conftest import ACCEPTANCE
except ImportError:  # run as a script
    ACCEPTANCE = {}


def record(number, passed, detail):
    ACCEPTANCE[number] = (bool(passed), detail)
    print(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")
    assert passed, detail


def test_criterion_1_symbolic_lists():
    start = time.perf_counter()
    checks = validation.symbolic_checks()
    elapsed = time.perf_counter() - start
    failed = [c.name for c in checks if not c.passed]
    detail = f"{len(checks) - len(failed)}/{len(checks)} lists equal, {elapsed:.2f} s"
    if failed:
        diffs = {c.name: c.detail for c in checks if not c.passed}
        detail += f"; mismatches {diffs}"
    record(1, not failed and elapsed < 1.0, detail)


def test_criterion_2_closed_forms():
    start = time.perf_counter()
    errors = {}
    ok = True
    for n, forms in reference.CLOSED_FORMS.items():
        for p in forms:
            passed, info = validation.closed_form_check(n, p, grid_size=33)
            errors[f"N{n} p{p:+d}"] = f"{info['max_abs_error']:.1e}"
            ok &= passed
    elapsed = time.perf_counter() - start
    record(2, ok and elapsed < 10, f"max |error| {errors}, {elapsed:.1f} s")


def test_criterion_3_spot_values():
    worst = 0.0
    for (n, p, tm, tp), want in reference.SPOT_VALUES.items():
        worst = max(worst, abs(evaluate_component(alternating_pattern(n), p, RotationAngles(tm, tp)) - want))
    for n in range(2, 7):
        table = opalgebra.component_table(alternating_pattern(n), RotationAngles(math.pi, math.pi))
        worst = max([worst] + [abs(v) for v in table.entries.values()])
    record(3, worst <= 1e-12, f"max |error| {worst:.1e}")


def test_criterion_4_component_support():
    passed, detail = validation._support()
    summary = {k: (len(v["components"]), v["extremes_single_term"]) for k, v in detail.items()}
    record(4, passed, f"(count, extremes single-term) {summary}")


@pytest.mark.slow
def test_criterion_5_oracle_cross_validation():
    start = time.perf_counter()
    checks, arbitration = validation.oracle_checks(grid_size=11)
    elapsed = time.perf_counter() - start
    rs = {c.name[-2:]: {p: round(v, 4) for p, v in c.detail["pearson_r"].items()} for c in checks}
    ok = all(c.passed for c in checks) and elapsed < 600
    record(5, ok, f"r {rs}; p=3 two-pulse form: {arbitration['winner']} "
                  f"{ {k: round(v, 3) for k, v in arbitration['pearson_r'].items()} }; {elapsed:.0f} s")


def test_criterion_6_integrator():
    gamma = 2 * math.pi * 1.64e6
    omega = 2 * math.pi * 20e6
    excited = np.array([[0, 0], [0, 1]], dtype=complex)
    tr = evolve(PulseSequence((), 0.0, gamma, 1e-6, 1), 1e-10, 1e-6, rho0=excited)
    decay = float(np.max(np.abs(tr.excited / np.exp(-gamma * tr.times) - 1)))

    def drive(dt, duration, record_dt):
        seq = PulseSequence((PulseSpec("+", 0.0, duration, omega),), 0.0, gamma, 2 * duration, 1)
        out = evolve(seq, dt, duration, record_every=int(round(record_dt / dt)))
        _, sy, _ = rabi_analytic(RabiParams(omega, gamma), out.times)
        return float(np.max(np.abs(-2 * np.imag(out.samples) - sy)))

    drive_err = drive(1e-11, 500e-9, 1e-10)
    errs = [drive(dt, 204.8e-9, 3.2e-10) for dt in (3.2e-10, 1.6e-10, 8e-11)]
    orders = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
    ok = decay < 1e-6 and drive_err < 1e-6 and all(abs(o - 4) < 0.3 for o in orders)
    record(6, ok, f"decay rel {decay:.1e}, drive abs {drive_err:.1e}, "
                  f"orders {[round(o, 3) for o in orders]}")


@pytest.mark.slow
def test_criterion_7_shift_scan():
    omegas = 2 * math.pi * np.arange(30e6, 121e6, 10e6)
    centers = np.arange(-45, 45.01, 0.5) * 1e-9
    scan = spectrum.shift_scan(spectrum.three_pulse_geometry(omegas[0]), 1, centers,
                               list(range(-15, 16, 2)), omegas=omegas)
    regions = spectrum.classify_regions(np.round(centers * 1e9, 9), scan.column_counts())
    labels = [r["label"] for r in regions]
    bounds = [float(r["upper_boundary"]) for r in regions if "upper_boundary" in r]
    target = [-28, -8, 8, 28]
    geometry_ok = labels == ["3", ">=7", "5", ">=7", "3"] and len(bounds) == 4 and all(
        abs(b - t) <= 2 for b, t in zip(bounds, target)
    )

    two = spectrum.shift_scan(spectrum.two_pulse_geometry(omegas[0]), 1, np.arange(-20, 20.01, 1) * 1e-9,
                              list(range(-11, 12, 2)), omegas=2 * math.pi * np.array([30e6, 60e6, 90e6]))
    a = np.abs(two.amplitudes)
    mirror = float(np.max(np.abs(a - a[:, ::-1, ::-1])) / a.max())
    record(7, geometry_ok and mirror < 0.01,
           f"regions {labels} boundaries {bounds} ns; two-pulse mirror deviation {mirror:.1e}")


def test_criterion_8_net_field():
    theta = 2 * math.pi * np.arange(64) / 64
    two = np.array([opalgebra.net_field(alternating_pattern(2), RotationAngles(t, t)) for t in theta])
    err2 = float(np.max(np.abs(two + 0.5 * np.sin(2 * theta))))
    fits = {}
    ok = err2 <= 1e-12
    for n in (3, 4, 5):
        diag = np.array([opalgebra.net_field(alternating_pattern(n), RotationAngles(t, t)) for t in theta])
        basis = np.sin(n * theta)
        amp = float(basis @ diag / (basis @ basis))
        resid = float(np.max(np.abs(diag - amp * basis))) / abs(amp)
        fits[n] = (round(amp, 12), f"{resid:.1e}")
        ok &= resid < 1e-6
    record(8, ok, f"N=2 error {err2:.1e}; (A, residual/A) {fits}")


def test_criterion_9_rabi_fit():
    omega, gamma, dt = 2 * math.pi * 20e6, 2 * math.pi * 1.64e6, 1e-9
    t = dt * np.arange(1000)
    clean = rabi_analytic(RabiParams(omega, gamma), t)[1]
    fit = fit_rabi(clean, dt)
    d_om, d_g = abs(fit.params.omega / omega - 1), abs(fit.params.gamma1 / gamma - 1)
    rng = np.random.default_rng(2024)
    noisy = max(abs(fit_rabi(clean + 0.02 * rng.standard_normal(len(t)), dt).params.omega / omega - 1)
                for _ in range(20))
    amps = np.geomspace(0.1, 1.0, 10)
    tt = 0.5e-9 * np.arange(2000)
    fitted = [fit_rabi(rabi_analytic(RabiParams(a * 2 * math.pi * 40e6, gamma), tt)[1]
                       + 0.02 * rng.standard_normal(len(tt)), 0.5e-9).params.omega for a in amps]
    r2 = float(np.corrcoef(amps, fitted)[0, 1] ** 2)
    ok = d_om < 1e-3 and d_g < 1e-3 and noisy < 1e-2 and r2 > 0.999
    record(9, ok, f"noiseless rel err Ω {d_om:.1e} Γ₁ {d_g:.1e}; noisy worst Ω {noisy:.1e}; r² {r2:.7f}")


if __name__ == "__main__":
    for name, func in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                func()
            except AssertionError:
                pass
