"""Report figures for the CLI: metric histograms and the error-model curve.

Kept out of the stats core so headless batch runs never import matplotlib
unless a figure was actually requested.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .lwe import decryption_error_rate
from .stats import MetricSummary


def save_metric_histogram(summary: MetricSummary, path: str | Path, title: str | None = None) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    centers = (summary.bin_edges[:-1] + summary.bin_edges[1:]) / 2
    nz = summary.bin_counts > 0
    width = summary.bin_edges[1] - summary.bin_edges[0]
    ax.bar(100 * centers[nz], summary.bin_counts[nz], width=100 * width, color="#39618f", edgecolor="none")
    ax.set_xlabel(f"{summary.name} (%)")
    ax.set_ylabel("instances")
    ax.set_title(title or f"{summary.name}: mean {100*summary.mean:.2f}%, std {100*summary.std:.2f}%")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_error_model_curve(m: int, path: str | Path, alphas: np.ndarray | None = None) -> None:
    if alphas is None:
        alphas = np.linspace(0.004, 0.06, 120)
    rates = [decryption_error_rate(float(a), m) for a in alphas]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogy(100 * alphas, rates)
    ax.set_xlabel("noise rate alpha (%)")
    ax.set_ylabel("per-bit decryption error")
    ax.set_title(f"analytic decryption error, m={m}")
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
