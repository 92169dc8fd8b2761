"""Figure rendering for simulation output.

Figures are written next to the delimited time-series output; everything
here is presentation only and no verification logic depends on it.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def plot_timeseries(rows, monitors, outpath, title="conserved integrals"):
    """Drift and flux-corrected budget of each monitored integral vs time."""
    if not rows:
        return None
    t = [r["t"] for r in rows]
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7, 6), sharex=True)
    for m in monitors:
        v0 = rows[0][m]
        ax1.plot(t, [r[m] - v0 for r in rows], label=m)
        ax2.plot(t, [r[m + "_budget"] for r in rows], label=m)
    ax1.set_ylabel("drift")
    ax1.set_title(title)
    ax1.legend(loc="best", fontsize=8)
    ax2.set_ylabel("drift - boundary flux")
    ax2.set_xlabel("t")
    ax2.legend(loc="best", fontsize=8)
    for ax in (ax1, ax2):
        ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(outpath, dpi=150)
    plt.close(fig)
    return outpath


def plot_convergence(study, outpath, title="manufactured-solution convergence"):
    """Max-norm error versus grid spacing with a second-order guide line."""
    h = study["h"]
    err = study["errors"]
    fig, ax = plt.subplots(figsize=(5.5, 4.2))
    ax.loglog(h, err, "o-", label="observed")
    guide = [err[0] * (hi / h[0]) ** 2 for hi in h]
    ax.loglog(h, guide, "k--", alpha=0.6, label="order 2 guide")
    ax.set_xlabel("dx")
    ax.set_ylabel("max error")
    ax.set_title(f"{title} (order ~ {study['order_mean']:.2f})")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(outpath, dpi=150)
    plt.close(fig)
    return outpath


def plot_snapshot(grid, state, outpath, title="final field"):
    """Heat map of the final discrete field."""
    fig, ax = plt.subplots(figsize=(6, 4.5))
    im = ax.imshow(state.u_curr.T, origin="lower", aspect="auto",
                   extent=[grid.x_min, grid.x_max, 0.0, 6.283185307179586],
                   cmap="RdBu_r")
    fig.colorbar(im, ax=ax, label="u")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title(f"{title} at t = {state.time:.3f}")
    fig.tight_layout()
    fig.savefig(outpath, dpi=150)
    plt.close(fig)
    return outpath
