"""Figure layouts for the simulator outputs.

Style is pinned (backend, fonts, sizes) so that byte-identical CSV input
yields pixel-identical images.  Real parts are drawn solid, imaginary parts
dashed; the pulse-area panels mark the reference area 0.14 pi with a
vertical dashed line.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from . import reader

_RC = {
    "font.family": "DejaVu Sans",
    "font.size": 9,
    "axes.linewidth": 0.8,
    "figure.dpi": 110,
    "savefig.dpi": 110,
    "lines.linewidth": 1.4,
}

_SPECTRA_PANELS = [("kappa = 1, detection x", 0), ("kappa = 1, detection y", 1),
                   ("kappa = 2, detection x", 2), ("kappa = 2, detection y", 3)]

_SCAN_STYLES = [
    ("P_1_y_par", "1QC  y  par", "tab:blue", "-"),
    ("P_1_x_par", "1QC  x  par", "tab:orange", "--"),
    ("P_2_x_par", "2QC  par", "tab:green", ":"),
    ("P_2_perp", "2QC  perp", "tab:purple", "-."),
]

REFERENCE_AREA_PI = 0.14


def spectra_grid(csv_paths, xlabel=None, ylabel=None):
    """2x2 grid: demodulation order by rows, detection direction by columns.

    Expects four spectrum CSVs ordered (k1 x, k1 y, k2 x, k2 y).
    """
    if len(csv_paths) != 4:
        raise reader.CsvFormatError("spectra_grid needs exactly four spectrum CSVs")
    data = [reader.read_spectrum(p) for p in csv_paths]
    with plt.rc_context(_RC):
        fig, axes = plt.subplots(2, 2, figsize=(7.0, 5.0), sharex=False)
        for (title, idx), ax in zip(_SPECTRA_PANELS, axes.ravel()):
            d = data[idx]
            ax.plot(d["detuning"], d["re"], "-", color="tab:blue", label="Re")
            ax.plot(d["detuning"], d["im"], "--", color="tab:red", label="Im")
            ax.axhline(0.0, color="0.6", lw=0.6)
            ax.set_title(title)
            ax.set_xlabel(xlabel or "(omega - kappa omega0) / gamma")
            ax.set_ylabel(ylabel or "S  [f^2 / gamma^2]")
            ax.legend(loc="upper right", frameon=False)
        fig.tight_layout()
    return fig


def peak_scan(csv_paths, xlabel=None, ylabel=None):
    """Normalized peak amplitudes versus pulse area, signs preserved."""
    if len(csv_paths) != 1:
        raise reader.CsvFormatError("peak_scan needs exactly one peakscan CSV")
    d = reader.read_peakscan(csv_paths[0])
    th = d["theta_over_pi"]
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(5.2, 3.6))
        for name, label, color, style in _SCAN_STYLES:
            if d["_has_norm"]:
                curve = d[f"norm_{name}"]
            else:
                curve = d[name] / np.max(np.abs(d[name]))   # display scaling only
            ax.plot(th, curve, style, color=color, label=label)
        ax.axvline(REFERENCE_AREA_PI, color="0.4", ls="--", lw=0.9)
        ax.axhline(0.0, color="0.6", lw=0.6)
        ax.set_ylim(-1.05, 1.05)
        ax.set_xlabel(xlabel or "pulse area / pi")
        ax.set_ylabel(ylabel or "normalized peak amplitude")
        ax.legend(loc="lower right", frameon=False, ncol=2)
        fig.tight_layout()
    return fig


def harmonics_bars(csv_paths, xlabel=None, ylabel=None):
    """Grouped bars of the half-angle series coefficients per signal."""
    if len(csv_paths) != 1:
        raise reader.CsvFormatError("harmonics_bars needs exactly one harmonics CSV")
    table = reader.read_harmonics(csv_paths[0])
    signals = [name for name, *_ in _SCAN_STYLES if name in table]
    if not signals:
        raise reader.CsvFormatError("no known signals in the harmonics table")
    ns = sorted({n for sig in signals for n in table[sig]})
    width = 0.8 / len(signals)
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(5.2, 3.6))
        for k, (name, label, color, _style) in enumerate(
                s for s in _SCAN_STYLES if s[0] in table):
            vals = [table[name].get(n, (0.0, 0.0))[0] for n in ns]
            pos = np.arange(len(ns)) + (k - (len(signals) - 1) / 2.0) * width
            ax.bar(pos, vals, width=width, color=color, label=label)
        ax.axhline(0.0, color="0.4", lw=0.8)
        ax.set_xticks(np.arange(len(ns)))
        ax.set_xticklabels([str(n) for n in ns])
        ax.set_xlabel(xlabel or "harmonic n")
        ax.set_ylabel(ylabel or "A_n")
        ax.legend(loc="upper right", frameon=False)
        fig.tight_layout()
    return fig


LAYOUTS = {
    "spectra_grid": spectra_grid,
    "peak_scan": peak_scan,
    "harmonics_bars": harmonics_bars,
}


def render(layout: str, csv_paths, out_path, xlabel=None, ylabel=None) -> None:
    """Render one layout from CSV inputs to an image file."""
    try:
        fn = LAYOUTS[layout]
    except KeyError:
        raise reader.CsvFormatError(
            f"unknown layout {layout!r}; choose from {sorted(LAYOUTS)}") from None
    fig = fn(list(csv_paths), xlabel=xlabel, ylabel=ylabel)
    try:
        fig.savefig(out_path, metadata={"Software": "figgen"})
    finally:
        plt.close(fig)
