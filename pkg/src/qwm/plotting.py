"""SVG figures for component maps, shift scans and spectra."""
from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.colors import ListedColormap  # noqa: E402

# 256-step blue-white-red palette, fixed so figures do not depend on rc state
DIVERGING = ListedColormap(plt.get_cmap("RdBu_r")(np.linspace(0, 1, 256)), name="qwm_div")

# stable SVG ids and no timestamp, so reruns give identical files
_SVG_META = {"Date": None, "Creator": None}
plt.rcParams["svg.hashsalt"] = "qwm"


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata=_SVG_META, bbox_inches="tight")
    plt.close(fig)
    return path


def _angle_label(name: str) -> str:
    return {"theta_minus": "θ₋ (rad)", "theta_plus": "θ₊ (rad)", "t2_center": "shift (ns)",
            "omega": "Ω/2π (MHz)"}.get(name, name)


def heatmap_svg(smap, path, title: str | None = None) -> Path:
    """Render a SpectrumMap with a colour scale symmetric about zero."""
    values = np.real(np.asarray(smap.values))
    vmax = float(np.max(np.abs(values))) or 1.0
    x, y = np.asarray(smap.x_values), np.asarray(smap.y_values)
    if smap.x_name == "t2_center":
        x = x * 1e9
    if smap.y_name == "omega":
        y = y / (2 * math.pi * 1e6)
    fig, ax = plt.subplots(figsize=(4.2, 3.6))
    mesh = ax.pcolormesh(x, y, values.T, cmap=DIVERGING, vmin=-vmax, vmax=vmax, shading="nearest")
    fig.colorbar(mesh, ax=ax, label=f"V_{{{smap.component}}}")
    ax.set_xlabel(_angle_label(smap.x_name))
    ax.set_ylabel(_angle_label(smap.y_name))
    ax.set_title(title or f"p = {smap.component:+d}")
    return _save(fig, path)


def shift_scan_svg(scan, path, regions=None) -> Path:
    """Peak count and line magnitudes versus moving-pulse shift."""
    centers = np.asarray(scan.centers) * 1e9
    mag = np.abs(scan.amplitudes).max(axis=0)
    fig, (top, bottom) = plt.subplots(2, 1, figsize=(6, 5), sharex=True)
    for k, p in enumerate(scan.components):
        top.plot(centers, mag[:, k], lw=1, label=f"{p:+d}")
    top.set_ylabel("max |V_p| over Ω")
    top.legend(ncol=4, fontsize=6)
    bottom.step(centers, scan.column_counts(), where="mid", color="k")
    for reg in regions or []:
        if "upper_boundary" in reg:
            bottom.axvline(reg["upper_boundary"], color="0.6", ls="--", lw=0.8)
    bottom.set_ylabel("lines above threshold")
    bottom.set_xlabel("shift (ns)")
    return _save(fig, path)


def spectrum_svg(ps, amplitudes, path, freqs=None, full=None) -> Path:
    """Comb line magnitudes, optionally over the continuous FFT magnitude."""
    fig, ax = plt.subplots(figsize=(5, 3))
    if full is not None:
        ax.plot(freqs, np.abs(full), color="0.7", lw=0.8)
    ax.stem(ps, np.abs(amplitudes), basefmt=" ")
    ax.set_xlabel("p")
    ax.set_ylabel("|V_p|")
    return _save(fig, path)


def rabi_svg(t, data, fit, path) -> Path:
    fig, ax = plt.subplots(figsize=(5, 3))
    ax.plot(np.asarray(t) * 1e9, data, ".", ms=2, color="0.4", label="data")
    ax.plot(np.asarray(t) * 1e9, fit, color="C3", lw=1, label="fit")
    ax.set_xlabel("t (ns)")
    ax.set_ylabel("⟨σ_y⟩")
    ax.legend(fontsize=7)
    return _save(fig, path)


def linearity_svg(amplitudes, omegas, slope, intercept, path) -> Path:
    fig, ax = plt.subplots(figsize=(4, 3))
    ax.plot(amplitudes, np.asarray(omegas) / (2 * math.pi * 1e6), "o", ms=3)
    a = np.asarray(amplitudes)
    ax.plot(a, (slope * a + intercept) / (2 * math.pi * 1e6), color="C3", lw=1)
    ax.set_xlabel("drive amplitude")
    ax.set_ylabel("Ω/2π (MHz)")
    return _save(fig, path)
