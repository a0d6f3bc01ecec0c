import math

import numpy as np
import pytest

from qwm.lindblad import PulseSequence, PulseSpec, TimeTrace, beat_locked_period, beat_period
from qwm.opalgebra import ComponentTable, alternating_pattern
from qwm import spectrum as sp

DETUNING = 2 * math.pi * 50e3
OMEGA = 2 * math.pi * 31.25e6


def synthetic(p_values, beats=2, n=4000):
    window = beats * beat_period(DETUNING)
    dt = window / n
    t = dt * np.arange(n)
    samples = sum(a * np.exp(1j * p * DETUNING * t) for p, a in p_values.items())
    return TimeTrace(dt, samples)


def oracle_spectrum(pulses, max_p=13):
    period = beat_locked_period(DETUNING, 16, 3)
    seq = PulseSequence(tuple(pulses), DETUNING, 2 * math.pi * 1.64e6, period, 16)
    return sp.oracle_table(seq, 8e-9 / 128, max_p, record_every=8)


def test_single_line_extracted():
    table = sp.comb_amplitudes(synthetic({3: 0.5}), DETUNING, 9)
    assert table[3] == pytest.approx(0.5, abs=1e-12)
    assert max(abs(table[p]) for p in table.keys() if p != 3) < 1e-10


def test_mixed_lines_extracted():
    lines = {-5: 0.1j, 1: -0.2, 7: 0.05 + 0.05j}
    table = sp.comb_amplitudes(synthetic(lines, beats=3), DETUNING, 9)
    for p in table.keys():
        assert table[p] == pytest.approx(lines.get(p, 0), abs=1e-12)


def test_parseval_bound():
    rng = np.random.default_rng(0)
    trace = synthetic({}, n=2048)
    trace.samples = 0.3 * (rng.standard_normal(2048) + 1j * rng.standard_normal(2048))
    table = sp.comb_amplitudes(trace, DETUNING, 41)
    power = np.mean(np.abs(trace.samples) ** 2)
    assert sum(abs(v) ** 2 for v in table.entries.values()) <= power + 1e-12


def test_window_must_hold_whole_beats():
    trace = synthetic({1: 0.1})
    trace.dt *= 1.01
    with pytest.raises(sp.BadWindow):
        sp.comb_amplitudes(trace, DETUNING, 3)
    with pytest.raises(sp.BadWindow):
        sp.comb_amplitudes(synthetic({1: 0.1}), 0.0, 3)


def test_rotate_quadrature_real_and_sign():
    phase = np.exp(0.7j)
    table = ComponentTable({-1: -0.2 * phase, 1: 0.4 * phase, 3: 0.1 * phase})
    rotated, phi = sp.rotate_quadrature(table)
    assert rotated[1] == pytest.approx(0.4)
    assert rotated[-1] == pytest.approx(-0.2)
    assert phi == pytest.approx(0.7)


def test_rotate_quadrature_negative_largest():
    table = ComponentTable({1: -0.5j, 3: 0.1j})
    rotated, phi = sp.rotate_quadrature(table)
    assert rotated[1] == pytest.approx(0.5)
    assert rotated[3] == pytest.approx(-0.1)
    assert phi == pytest.approx(-math.pi / 2)


def test_rotate_quadrature_all_zero():
    with pytest.raises(sp.AllZero):
        sp.rotate_quadrature(ComponentTable({1: 0.0, 3: 0.0}))


def test_count_peaks_threshold():
    table = ComponentTable({-1: 1.0, 1: 0.5, 3: 0.019, 5: 0.021})
    assert sp.count_peaks(table) == 3
    assert sp.count_peaks(ComponentTable({1: 0.0})) == 0
    with pytest.raises(ValueError):
        sp.count_peaks(table, 1.5)


def test_two_pulses_give_three_lines():
    pulses = [PulseSpec("-", 80e-9, 8e-9, OMEGA), PulseSpec("+", 88e-9, 8e-9, OMEGA)]
    assert sp.count_peaks(oracle_spectrum(pulses)) == 3


def test_three_pulses_give_five_lines():
    pulses = sp.three_pulse_geometry(OMEGA)
    table = oracle_spectrum(pulses)
    assert sp.count_peaks(table) == 5
    top = max(abs(v) for v in table.entries.values())
    present = sorted(p for p, v in table.entries.items() if abs(v) >= 0.02 * top)
    assert present == [-5, -3, -1, 1, 3]


def test_overlap_gives_many_lines():
    pulses = [PulseSpec("-", 80e-9, 8e-9, 3 * OMEGA), PulseSpec("+", 80e-9, 8e-9, 3 * OMEGA)]
    assert sp.count_peaks(oracle_spectrum(pulses)) >= 7


def test_four_pulse_train_has_p7_line():
    pulses = [PulseSpec(s, 80e-9 + 8e-9 * k, 8e-9, OMEGA) for k, s in enumerate(alternating_pattern(4))]
    table = oracle_spectrum(pulses, max_p=9)
    top = max(abs(v) for v in table.entries.values())
    assert abs(table[7]) > 0.02 * top


def test_algebra_map_shape_and_zero_point():
    maps = sp.angle_maps(alternating_pattern(2), theta_minus=[math.pi], theta_plus=[math.pi])
    assert sorted(maps) == [-1, 1, 3]
    assert all(abs(m.values[0, 0]) < 1e-12 for m in maps.values())
    with pytest.raises(ValueError):
        sp.angle_maps(alternating_pattern(2))


def test_spectrum_map_validates_shape():
    with pytest.raises(ValueError):
        sp.SpectrumMap("x", np.arange(3), "y", np.arange(2), 1, np.zeros((2, 3)))


def test_scaled_correlation_recovers_scale():
    rng = np.random.default_rng(2)
    ref = {1: rng.standard_normal((4, 4)), 3: rng.standard_normal((4, 4))}
    scale = 0.3 * np.exp(1.1j)
    got = {p: scale * v for p, v in ref.items()}
    fitted, r = sp.scaled_correlation(ref, got)
    assert fitted == pytest.approx(scale)
    assert all(v == pytest.approx(1.0) for v in r.values())


def test_classify_regions_plateaus_and_overlap():
    centers = np.arange(-10, 11, 1.0)
    counts = [3] * 5 + [4, 8, 9, 6] + [5] * 3 + [6, 9, 7, 4] + [3] * 5
    regions = sp.classify_regions(centers, counts)
    assert [r["label"] for r in regions] == ["3", ">=7", "5", ">=7", "3"]
    assert [r["upper_boundary"] for r in regions[:-1]] == [-5.5, -1.5, 1.5, 5.5]


def test_column_counts_ignore_accidental_zeros():
    amps = np.zeros((2, 1, 5), dtype=complex)
    amps[0, 0] = [1.0, 0.5, 0.0, 0.0, 0.0]
    amps[1, 0] = [0.0, 0.5, 1.0, 0.0, 0.0]
    scan = sp.ShiftScan(np.zeros(1), np.array([1.0, 2.0]), [-3, -1, 1, 3, 5], amps)
    assert scan.column_counts().tolist() == [3]


@pytest.mark.slow
def test_two_pulse_shift_symmetry():
    centers = np.arange(-16, 16.01, 2) * 1e-9
    scan = sp.shift_scan(sp.two_pulse_geometry(OMEGA), 1, centers, list(range(-9, 10, 2)),
                         omegas=[OMEGA, 2 * OMEGA])
    a = np.abs(scan.amplitudes)
    assert np.max(np.abs(a - a[:, ::-1, ::-1])) < 0.01 * a.max()
