"""Static figures for CLI reports, rendered to files with the Agg backend."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = [
    "STYLE",
    "plot_trace",
    "plot_eigenvalues",
    "plot_fitness_history",
    "plot_envelope",
    "plot_delta_k",
    "plot_disturbance_sweep",
]

STYLE = {
    "figure.figsize": (6.0, 4.0),
    "figure.dpi": 100,
    "savefig.dpi": 150,
    "savefig.bbox": "tight",
    "axes.grid": True,
    "grid.linestyle": "--",
    "grid.alpha": 0.5,
    "lines.linewidth": 1.2,
    "legend.fontsize": 8,
    "font.size": 10,
}


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path)
    plt.close(fig)
    return path


def plot_trace(trace, path) -> Path:
    """Errors, inputs and input rates against time, one panel each."""
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(3, 1, sharex=True, figsize=(6.0, 7.0))
        states = trace.state_names or tuple(f"x{i + 1}" for i in range(trace.e.shape[1]))
        inputs = trace.input_names or tuple(f"u{i + 1}" for i in range(trace.u.shape[1]))
        for j, name in enumerate(states):
            axes[0].plot(trace.t, trace.e[:, j], label=f"e({name})")
        for j, name in enumerate(inputs):
            axes[1].plot(trace.t, trace.u[:, j], label=name)
            axes[2].plot(trace.t, trace.udot[:, j], label=f"d{name}/dt")
        for ax, ylabel in zip(axes, ("error", "input", "input rate")):
            ax.set_ylabel(ylabel)
            if ax.lines:
                ax.legend(loc="upper right")
        axes[-1].set_xlabel("t [s]")
        return _save(fig, path)


def plot_eigenvalues(report, path) -> Path:
    """Spectrum of ``A_K(0)`` in the complex plane."""
    z = np.asarray(report.eigenvalues, dtype=complex)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.axvline(0.0, color="k", lw=0.8)
        ax.scatter(z.real, z.imag, marker="x", color="C3")
        ax.set_xlabel("Re")
        ax.set_ylabel("Im")
        ax.set_title(f"R_K = {report.r_k:.4g}, I_K = {report.i_k:.4g}" if report.hurwitz
                     else "not Hurwitz")
        return _save(fig, path)


def plot_fitness_history(history, path) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.plot(np.arange(len(history)), history, marker=".")
        ax.set_xlabel("generation")
        ax.set_ylabel("best fitness")
        return _save(fig, path)


def plot_envelope(t, f_norms, bound, radius, path) -> Path:
    """``|f(x(t))|`` against its certified envelope and terminal radius."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.semilogy(t, f_norms, label="|f(x(t))|")
        ax.semilogy(t, bound, "--", label="envelope")
        ax.axhline(radius, color="k", ls=":", label="radius")
        ax.set_xlabel("t [s]")
        ax.legend()
        return _save(fig, path)


def plot_delta_k(rows, path) -> Path:
    """``R_K`` and ``I_K`` along the gain-perturbation family."""
    rows = [r for r in rows if r[1] is not None]
    eps = [r[0] for r in rows]
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.plot(eps, [r[1] for r in rows], "o-", color="C0", label="R_K")
        ax.set_xlabel("epsilon")
        ax.set_ylabel("R_K", color="C0")
        ax2 = ax.twinx()
        ax2.plot(eps, [r[2] for r in rows], "s--", color="C1", label="I_K")
        ax2.set_ylabel("I_K", color="C1")
        ax2.grid(False)
        return _save(fig, path)


def plot_disturbance_sweep(rows, path) -> Path:
    """Settled mean per channel against disturbance amplitude, one line per frequency."""
    channels = sorted({r.channel for r in rows})
    omegas = sorted({r.omega for r in rows})
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(1, len(channels), figsize=(3.0 * len(channels), 3.5), squeeze=False)
        for ax, ch in zip(axes[0], channels):
            for w in omegas:
                sel = sorted((r.l_d, r.ms) for r in rows if r.channel == ch and r.omega == w)
                ax.plot(*zip(*sel), "o-", label=f"omega={w:g}")
            ax.set_title(ch)
            ax.set_xlabel("L_d")
        axes[0][0].set_ylabel("settled mean")
        axes[0][0].legend()
        return _save(fig, path)
