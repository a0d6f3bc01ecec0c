"""Self-consistency suite behind ``qwm validate``.

Each check returns a :class:`Check`; :func:`run_checks` collects them.  The
reference tables are parameters so a perturbed copy can be injected.
"""
from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import calib, opalgebra, reference, spectrum
from .opalgebra import RotationAngles, alternating_pattern, evaluate_component

__all__ = ["Check", "run_checks", "symbolic_checks", "closed_form_check", "oracle_checks"]


@dataclass
class Check:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0

    def as_dict(self) -> dict:
        return asdict(self)


def _timed(name, func, *args, **kwargs) -> Check:
    start = time.perf_counter()
    try:
        passed, detail = func(*args, **kwargs)
    except Exception as exc:  # a crashing check is a failing check
        passed, detail = False, {"error": f"{type(exc).__name__}: {exc}"}
    return Check(name, bool(passed), detail, time.perf_counter() - start)


def _compare_sums(built: opalgebra.OperatorSum, printed: str):
    want = opalgebra.parse_sum(printed).as_dict()
    got = built.as_dict()
    missing = {opalgebra.word_str(w): c for w, c in want.items() if got.get(w) != c}
    extra = {opalgebra.word_str(w): c for w, c in got.items() if want.get(w) != c}
    return not missing and not extra, {"expected_only": missing, "built_only": extra}


def symbolic_checks(pruned=None, right=None, left=None) -> list[Check]:
    tables = {
        "pruned": pruned or reference.PRUNED,
        "right": right or reference.RIGHT,
        "left": left or reference.LEFT,
    }
    checks = []
    for n in range(2, 7):
        ops = opalgebra.reduced_operators(alternating_pattern(n))
        for kind, table in tables.items():
            checks.append(_timed(f"symbolic_{kind}_N{n}", _compare_sums, ops[kind], table[n]))
    return checks


def closed_form_check(n: int, p: int, grid_size: int = 33, tol: float | None = None,
                      margin: float = 0.05):
    """Max deviation between the algebra and the closed form for one component."""
    tol = tol if tol is not None else (1e-12 if n == 3 else 1e-9)
    form = reference.CLOSED_FORMS[n][p]
    grid = 2 * math.pi * np.arange(grid_size) / grid_size
    pattern = alternating_pattern(n)
    worst = 0.0
    skipped = 0
    for tp in grid:
        if any(abs(tp - s) < margin for s in reference.SINGULAR_THETA_PLUS[n]):
            skipped += grid_size
            continue
        for tm in grid:
            a = evaluate_component(pattern, p, RotationAngles(tm, tp))
            worst = max(worst, abs(a - form(tm, tp)))
    return worst <= tol, {"max_abs_error": worst, "tolerance": tol, "skipped_points": skipped}


def _spot_values():
    errs = {}
    for (n, p, tm, tp), want in reference.SPOT_VALUES.items():
        errs[f"N{n}_p{p}"] = abs(evaluate_component(alternating_pattern(n), p, RotationAngles(tm, tp)) - want)
    return max(errs.values()) <= 1e-12, errs


def _zero_point():
    worst = 0.0
    for n in range(2, 7):
        table = opalgebra.component_table(alternating_pattern(n), RotationAngles(math.pi, math.pi))
        worst = max([worst] + [abs(v) for v in table.entries.values()])
    return worst <= 1e-12, {"max_abs": worst}


def _support():
    rng = np.random.default_rng(0)
    pts = rng.uniform(0, 2 * math.pi, size=(16, 2))
    detail = {}
    ok = True
    for n in range(2, 7):
        pattern = alternating_pattern(n)
        present = [
            p for p in range(-(2 * n + 1), 2 * n + 2, 2)
            if any(abs(evaluate_component(pattern, p, RotationAngles(*x))) > 1e-12 for x in pts)
        ]
        terms = opalgebra.matrix_element_terms(pattern)
        lo, hi = min(present), max(present)
        single = len(terms[lo]) == 1 and len(terms[hi]) == 1
        detail[f"N{n}"] = {"components": present, "extremes_single_term": single}
        ok &= len(present) == 2 * n - 1 and single and max(abs(p) for p in present) == 2 * n - 1
    return ok, detail


def _antisymmetry():
    rng = np.random.default_rng(1)
    pts = rng.uniform(0, 2 * math.pi, size=(24, 2))
    worst = 0.0
    for n in (3, 4):
        pattern = alternating_pattern(n)
        for p in opalgebra.matrix_element_terms(pattern):
            f = lambda tm, tp: evaluate_component(pattern, p, RotationAngles(tm, tp))  # noqa: E731
            for tm, tp in pts:
                if p % 4 == 3:
                    worst = max(worst, abs(f(2 * math.pi - tm, tp) + f(tm, tp)), abs(f(math.pi, tp)))
                else:
                    worst = max(worst, abs(f(tm, 2 * math.pi - tp) + f(tm, tp)), abs(f(tm, math.pi)))
    return worst <= 1e-12, {"max_abs_error": worst}


def _net_field():
    theta = 2 * math.pi * np.arange(64) / 64
    diag2 = np.array([opalgebra.net_field(alternating_pattern(2), RotationAngles(t, t)) for t in theta])
    err2 = float(np.max(np.abs(diag2 + 0.5 * np.sin(2 * theta))))
    detail = {"N2_max_abs_error": err2}
    ok = err2 <= 1e-12
    for n in (3, 4, 5):
        diag = np.array([opalgebra.net_field(alternating_pattern(n), RotationAngles(t, t)) for t in theta])
        basis = np.sin(n * theta)
        amp = float(basis @ diag / (basis @ basis))
        resid = float(np.max(np.abs(diag - amp * basis)))
        detail[f"N{n}"] = {"amplitude": amp, "relative_residual": resid / abs(amp)}
        ok &= resid < 1e-6 * abs(amp)
    return ok, detail


def _rabi_round_trip():
    params = calib.RabiParams(2 * math.pi * 20e6, 2 * math.pi * 1.64e6)
    dt = 1e-9
    t = dt * np.arange(1000)
    sy = calib.rabi_analytic(params, t)[1]
    fit = calib.fit_rabi(sy, dt)
    d_om = abs(fit.params.omega / params.omega - 1)
    d_g = abs(fit.params.gamma1 / params.gamma1 - 1)
    return max(d_om, d_g) < 1e-3, {"omega_rel_error": d_om, "gamma1_rel_error": d_g}


def oracle_checks(grid_size: int = 11, workers: int = 1, threshold: float = 0.99) -> tuple[list[Check], dict]:
    """Lindblad-vs-algebra correlation for N=2 and N=3, plus the p=3 form arbitration."""
    checks = []
    arbitration = {}
    for n in (2, 3):
        start = time.perf_counter()
        pattern = alternating_pattern(n)
        oracle = spectrum.angle_maps(pattern, grid_size, "oracle", workers=workers, complex_values=True)
        algebra = spectrum.angle_maps(pattern, grid_size, "algebra")
        _, r = spectrum.scaled_correlation(
            {p: m.values for p, m in algebra.items()}, {p: m.values for p, m in oracle.items()}
        )
        checks.append(Check(
            f"oracle_correlation_N{n}",
            all(v > threshold for v in r.values()),
            {"pearson_r": {str(p): v for p, v in r.items()}, "threshold": threshold},
            time.perf_counter() - start,
        ))
        if n == 2:
            m = algebra[3]
            tm, tp = np.meshgrid(m.x_values, m.y_values, indexing="ij")
            scores = {}
            for name, form in reference.TWO_PULSE_P3_CANDIDATES.items():
                _, rr = spectrum.scaled_correlation({3: form(tm, tp)}, {3: oracle[3].values})
                scores[name] = rr[3]
            arbitration = {"pearson_r": scores, "winner": max(scores, key=lambda k: scores[k])}
    return checks, arbitration


def run_checks(quick: bool = False, *, pruned=None, right=None, left=None, workers: int = 1) -> dict:
    checks = symbolic_checks(pruned, right, left)
    for n, forms in reference.CLOSED_FORMS.items():
        for p in forms:
            checks.append(_timed(f"closed_form_N{n}_p{p}", closed_form_check, n, p))
    checks.append(_timed("spot_values", _spot_values))
    checks.append(_timed("zero_point", _zero_point))
    checks.append(_timed("component_support", _support))
    checks.append(_timed("antisymmetry", _antisymmetry))
    checks.append(_timed("net_field_harmonic", _net_field))
    report = {"quick": quick}
    if not quick:
        checks.append(_timed("rabi_round_trip", _rabi_round_trip))
        oracle, arbitration = oracle_checks(workers=workers)
        checks.extend(oracle)
        report["two_pulse_p3_form"] = arbitration
    report["checks"] = [c.as_dict() for c in checks]
    report["failed"] = [c.name for c in checks if not c.passed]
    report["passed"] = not report["failed"]
    return report
