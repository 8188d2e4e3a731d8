"""Figure rendering for the command-line report paths.

Every writer takes already-computed arrays, renders one PNG next to the
delimited output, and returns the path.  The Agg backend keeps this
usable on headless machines; nothing here feeds back into the numbers.
"""

from __future__ import annotations

import math
from typing import Mapping, Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .measures import MeasureReport

#: Axis labels for the measure panels shared by sweep and check figures.
_MEASURE_LABELS = {
    "fidelity": "fidelity",
    "t_q": "joint transfer",
    "v_q": "conditional-variance product",
    "m": "normalized product",
    "var_plus": "output variance (+)",
    "var_minus": "output variance (-)",
    "i_final": "inseparability after swap",
    "eve_t_q": "eavesdropper joint transfer",
    "eve_v_q": "eavesdropper conditional-variance product",
}


def _label(metric: str) -> str:
    return _MEASURE_LABELS.get(metric, metric)


def save_scenario_figure(report: MeasureReport, path: str) -> str:
    """Input/output quadrature variances of one scenario as grouped bars."""
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    groups = np.arange(2)
    ax.bar(groups - 0.18, report.in_variances, width=0.32, label="input")
    ax.bar(groups + 0.18, report.out_variances, width=0.32, label="output")
    ax.axhline(1.0, color="0.4", linewidth=0.8, linestyle="--")
    ax.set_xticks(groups, ["plus", "minus"])
    ax.set_ylabel("variance (shot-noise units)")
    parts = [f"t_q={report.t_q:.3f}", f"v_q={report.v_q:.3f}", f"m={report.m:.3f}"]
    if report.fidelity is not None:
        parts.insert(0, f"fidelity={report.fidelity:.3f}")
    ax.set_title(", ".join(parts), fontsize=9)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def save_curves_figure(
    axis_label: str,
    curves: Mapping[str, tuple[np.ndarray, Mapping[str, np.ndarray]]],
    path: str,
    reference_lines: Optional[Mapping[str, float]] = None,
) -> str:
    """One panel per metric, one line per curve, shared x axis.

    ``curves`` maps a legend label to ``(x, {metric: y})``; metrics are
    collected across curves and panels are laid out on a near-square
    grid.  ``reference_lines`` draws a dashed horizontal marker on the
    named metric's panel (classical boundaries and the like).
    """
    metrics: list[str] = []
    for _x, series in curves.values():
        for name in series:
            if name not in metrics:
                metrics.append(name)
    if not metrics:
        raise ValueError("no metrics to plot")
    cols = 2 if len(metrics) > 1 else 1
    rows = math.ceil(len(metrics) / cols)
    fig, axes = plt.subplots(rows, cols, figsize=(5.2 * cols, 3.2 * rows), squeeze=False)
    flat = axes.ravel()
    for ax in flat[len(metrics):]:
        ax.set_visible(False)
    for ax, metric in zip(flat, metrics):
        for label, (x, series) in curves.items():
            y = series.get(metric)
            if y is None:
                continue
            y = np.asarray(y, dtype=float)
            if np.all(np.isnan(y)):
                continue
            ax.plot(x, y, label=label, linewidth=1.2)
        if reference_lines and metric in reference_lines:
            ax.axhline(reference_lines[metric], color="0.4", linewidth=0.8, linestyle="--")
        ax.set_xlabel(axis_label)
        ax.set_ylabel(_label(metric))
        if len(curves) > 1:
            ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def save_tv_figure(
    traces: Mapping[str, tuple[np.ndarray, np.ndarray]], path: str
) -> str:
    """Transfer-versus-conditional-variance plane, one trace per label.

    The classical square (joint transfer 1, product 1) is marked; the
    lower-right region beyond both lines needs entanglement.
    """
    fig, ax = plt.subplots(figsize=(5.4, 4.2))
    for label, (t_q, v_q) in traces.items():
        ax.plot(t_q, v_q, linewidth=1.1, label=label)
    ax.axvline(1.0, color="0.4", linewidth=0.8, linestyle="--")
    ax.axhline(1.0, color="0.4", linewidth=0.8, linestyle="--")
    ax.set_xlabel("joint signal transfer")
    ax.set_ylabel("conditional-variance product")
    ax.set_ylim(bottom=0.0)
    if len(traces) > 1:
        ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def save_histogram_figure(
    verified: np.ndarray, assumed: np.ndarray, path: str
) -> str:
    """Overlaid fidelity histograms for the two gain treatments.

    Runs whose gains could not be verified arrive as NaN in the
    verified array and are dropped from that series only.
    """
    verified = verified[np.isfinite(verified)]
    assumed = assumed[np.isfinite(assumed)]
    pooled = np.concatenate([verified, assumed])
    if pooled.size == 0:
        raise ValueError("no finite fidelity estimates to plot")
    fig, ax = plt.subplots(figsize=(5.4, 3.6))
    lo = float(pooled.min())
    hi = float(pooled.max())
    if hi <= lo:
        hi = lo + 1e-6
    bins = np.linspace(lo, hi, 40)
    if verified.size:
        ax.hist(verified, bins=bins, alpha=0.6, label="verified gain")
    ax.hist(assumed, bins=bins, alpha=0.6, label="assume unity gain")
    ax.set_xlabel("fidelity estimate")
    ax.set_ylabel("runs")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def save_check_figure(
    gain_grid: np.ndarray,
    model_curves: Mapping[str, np.ndarray],
    datapoints: Sequence[tuple[str, Optional[float], float, Optional[float]]],
    path: str,
) -> str:
    """Model measure curves versus gain with reference datapoints overlaid.

    ``datapoints`` rows are ``(metric, gain, value, uncertainty)``;
    points without a recorded gain are drawn as horizontal bands.
    """
    metrics = list(model_curves)
    cols = 2
    rows = math.ceil(len(metrics) / cols)
    fig, axes = plt.subplots(rows, cols, figsize=(5.2 * cols, 3.2 * rows), squeeze=False)
    flat = axes.ravel()
    for ax in flat[len(metrics):]:
        ax.set_visible(False)
    for ax, metric in zip(flat, metrics):
        ax.plot(gain_grid, model_curves[metric], linewidth=1.2, label="model")
        for name, gain, value, unc in datapoints:
            if name != metric:
                continue
            if gain is not None:
                ax.errorbar([gain], [value], yerr=None if unc is None else [unc],
                            fmt="o", markersize=4, capsize=3, label="measured")
            else:
                ax.axhline(value, color="tab:orange", linewidth=0.9)
                if unc:
                    ax.axhspan(value - unc, value + unc, color="tab:orange", alpha=0.15)
        ax.set_xlabel("feed-forward gain")
        ax.set_ylabel(_label(metric))
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
