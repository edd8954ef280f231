"""Figure rendering for the CLI report path (matplotlib, Agg backend).

Every function takes the same records the CLI writes as CSV/JSON and saves
one PNG; nothing here feeds back into the numbers.
"""

from __future__ import annotations

import os


def _plt():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams.update({"font.size": 9, "axes.grid": True, "grid.alpha": 0.3})
    return plt


def _save(fig, path):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    return path


def plot_coeffs(path, values, title=""):
    plt = _plt()
    fig, ax = plt.subplots(figsize=(5, 3.2))
    t = range(1, len(values))
    ax.loglog(list(t), [abs(v) for v in values[1:]], ".", ms=3)
    ax.set_xlabel("t")
    ax.set_ylabel("|beta_t|")
    ax.set_title(title)
    out = _save(fig, path)
    plt.close(fig)
    return out


def plot_trace(path, steps, values, title=""):
    plt = _plt()
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.semilogy(steps, values, lw=0.8)
    ax.set_xlabel("step")
    ax.set_ylabel("suboptimality")
    ax.set_title(title)
    out = _save(fig, path)
    plt.close(fig)
    return out


_XLABEL = {"dimension": "dimension d", "eigen_decay": "effective dimension", "learning_rate": "learning rate"}


def plot_sweep(path, axis, rows, fits):
    """Log-log estimates with error bars and fitted lines, one series per algorithm."""
    import numpy as np

    plt = _plt()
    fig, ax = plt.subplots(figsize=(5, 3.6))
    algs = sorted({r["algorithm"] for r in rows})
    for alg in algs:
        rr = [r for r in rows if r["algorithm"] == alg]
        x = np.array([r["x"] for r in rr])
        y = np.array([r["estimate"] for r in rr])
        e = np.array([r["stderr"] for r in rr])
        lab = alg
        if alg in fits:
            f = fits[alg]
            lab = f"{alg} (slope {f['slope']:.2f})"
            xs = np.linspace(np.log(x.min()), np.log(x.max()), 20)
            ax.plot(np.exp(xs), np.exp(f["slope"] * xs + f["intercept"]), "--", lw=0.8)
        ax.errorbar(x, y, yerr=e, fmt="o", ms=3, label=lab)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel(_XLABEL.get(axis, axis))
    ax.set_ylabel("stationary error")
    ax.legend(fontsize=7)
    out = _save(fig, path)
    plt.close(fig)
    return out


def plot_bounds(path, records):
    """Bound against condition number, one series per profile."""
    plt = _plt()
    fig, ax = plt.subplots(figsize=(5, 3.6))
    profiles = []
    for r in records:
        if r["profile"] not in profiles:
            profiles.append(r["profile"])
    for p in profiles:
        rr = sorted((r for r in records if r["profile"] == p and r["feasible"]), key=lambda r: r["kappa"])
        if rr:
            ax.loglog([r["kappa"] for r in rr], [r["bound"] for r in rr], "o-", ms=3, label=p)
    ax.set_xlabel("condition number")
    ax.set_ylabel("bound on F_inf")
    ax.legend(fontsize=7)
    out = _save(fig, path)
    plt.close(fig)
    return out
