"""Render figures to files alongside the delimited CLI output.

Everything here draws with the Agg backend and writes straight to disk; no
window is ever opened.  PNG metadata is pinned so repeated runs with the same
inputs produce byte-identical files.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_SAVE_KWARGS = {"dpi": 130, "metadata": {"Software": "iontherm"}}


def _finish(fig, path: str):
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KWARGS)
    plt.close(fig)


def save_spectrum_plot(path: str, orders, amplitudes, model=None, title: str = ""):
    """Sideband amplitudes vs order, with an optional fitted model overlay."""
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    markers, stems, base = ax.stem(orders, amplitudes, basefmt=" ")
    plt.setp(stems, linewidth=1.0)
    plt.setp(markers, markersize=5)
    if model is not None:
        ax.plot(orders, model, "o--", mfc="none", color="tab:red", label="fit")
        ax.legend(frameon=False)
    ax.set_xlabel("sideband order m")
    ax.set_ylabel("excitation probability")
    ax.set_ylim(0, 1.05)
    if title:
        ax.set_title(title)
    _finish(fig, path)


def save_rabi_plot(path: str, times_s, excitations, model_times=None, model=None, title: str = ""):
    """Carrier flopping data (points) plus an optional fitted curve."""
    fig, ax = plt.subplots(figsize=(5.6, 3.4))
    ax.plot(np.asarray(times_s) * 1e6, excitations, ".", ms=4, label="data")
    if model is not None:
        ax.plot(np.asarray(model_times) * 1e6, model, "-", lw=1.0, color="tab:red", label="fit")
        ax.legend(frameon=False)
    ax.set_xlabel("probe time (us)")
    ax.set_ylabel("excitation probability")
    ax.set_ylim(-0.02, 1.02)
    if title:
        ax.set_title(title)
    _finish(fig, path)


def save_heating_plot(path: str, delays_ms, nbars, sigmas, slope, intercept, title: str = ""):
    """Heating series with one-sigma bars and the fitted line."""
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    ax.errorbar(delays_ms, nbars, yerr=sigmas, fmt="o", ms=4, capsize=2, label="data")
    t = np.linspace(min(delays_ms), max(delays_ms), 64)
    ax.plot(t, intercept + slope * t, "-", color="tab:red", lw=1.0,
            label=f"{slope:.3g} quanta/ms")
    ax.set_xlabel("delay (ms)")
    ax.set_ylabel("mean quantum number")
    ax.legend(frameon=False)
    if title:
        ax.set_title(title)
    _finish(fig, path)


def save_scan_plot(path: str, freqs_hz, quanta, title: str = ""):
    """Transport-heating scan on a log scale."""
    freqs_khz = np.asarray(freqs_hz) / 1e3
    quanta = np.asarray(quanta)
    fig, ax = plt.subplots(figsize=(5.6, 3.4))
    positive = quanta > 0
    ax.semilogy(freqs_khz[positive], quanta[positive], "-", lw=0.8)
    ax.set_xlabel("update frequency (kHz)")
    ax.set_ylabel("quanta per round trip")
    if title:
        ax.set_title(title)
    _finish(fig, path)
