"""Minimal SVG line plots of result tables (matplotlib, no pyplot state)."""

from __future__ import annotations

from pathlib import Path

import matplotlib
import numpy as np
from matplotlib.figure import Figure

# fixed id salt and no timestamp keep the SVG bytes reproducible
_RC = {"svg.hashsalt": "cdwork", "svg.fonttype": "none", "axes.grid": True}


def new_axes(width=6.0, height=4.0):
    fig = Figure(figsize=(width, height))
    return fig, fig.add_subplot(111)


def _series(table, y, x="s"):
    """Yield (label, x, y) per (protocol, tau) run in row order."""
    proto = np.asarray(table["protocol"])
    tau = np.asarray(table["tau"], dtype=float)
    keys = list(dict.fromkeys(zip(proto.tolist(), tau.tolist())))
    many_protocols = len({p for p, _ in keys}) > 1
    for p, t in keys:
        sel = (proto == p) & (tau == t)
        label = f"{p}, tau={t:g}" if many_protocols else f"tau={t:g}"
        yield label, np.asarray(table[x], dtype=float)[sel], np.asarray(table[y], dtype=float)[sel]


def plot_timeseries(result, ax):
    for label, s, p in _series(result.tables["timeseries"], "p_minus_total"):
        ax.plot(s, p, label=label)
    ax.set_xlabel("s = t / tau")
    ax.set_ylabel("ground-state population of H(s)")


def plot_qsl(result, ax):
    q = result.tables["qsl"]
    tau = np.asarray(q["tau"], dtype=float)

    def col(name):
        return np.array([np.nan if v is None else v for v in q[name]], dtype=float)

    ax.plot(tau, tau, "k--", label="tau")
    ax.plot(tau, col("tau_mt"), "o-", label="Mandelstam-Tamm")
    ax.plot(tau, col("tau_wex"), "s-", label="excess work")
    ax.plot(tau, col("tau_ml"), "^-", label="trace norm")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("tau")
    ax.set_ylabel("minimal time")


def plot_work(result, ax):
    w = result.tables["work_summary"]
    if len(w) > 1:
        proto = np.asarray(w["protocol"])
        tau = np.asarray(w["tau"], dtype=float)
        vals = np.asarray(w["avg_excess_work"], dtype=float)
        for p in dict.fromkeys(proto.tolist()):
            sel = proto == p
            ax.plot(tau[sel], vals[sel], "o-", label=p)
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel("tau")
        ax.set_ylabel("time-averaged excess work")
    else:
        for label, s, wex in _series(result.tables["work"], "excess_work"):
            ax.plot(s, wex, label=label)
        ax.set_xlabel("s = t / tau")
        ax.set_ylabel("excess work")


def plot_spectra(result, ax):
    sp = result.tables["spectra"]
    if result.config.figure == "fig5":
        for label, s, c in _series(sp, "C"):
            ax.plot(s, c, label=label)
        ax.set_ylabel("counterdiabatic amplitude C(s)")
    else:
        for name, style in (("E_minus_h0", "-"), ("E_plus_h0", "-"),
                            ("E_minus_total", "--"), ("E_plus_total", "--")):
            for label, s, y in _series(sp, name):
                ax.plot(s, y, style, label=f"{name}, {label}")
        ax.set_ylabel("eigenenergy")
    ax.set_xlabel("s = t / tau")


PLOTTERS = {
    "timeseries": plot_timeseries,
    "qsl": plot_qsl,
    "work": plot_work,
    "spectra": plot_spectra,
}


def emit_svg(result, kind: str, path) -> Path:
    """Render output ``kind`` of ``result`` to an SVG file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with matplotlib.rc_context(_RC):
        fig, ax = new_axes()
        PLOTTERS[kind](result, ax)
        ax.legend(fontsize="small")
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
    return path
