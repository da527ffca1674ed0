"""Figure rendering for the report paths (portrait and scan outputs).

Uses the non-interactive Agg backend; every function writes a file and
returns its path.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def render_portrait(
    path, kind_label: str, orbits, nullclines, title: str | None = None
):
    """Phase portrait: distinguished orbits over the nullcline polylines.

    ``orbits`` is a list of (x, y, label); ``nullclines`` a list of Nx2 arrays.
    The phase axis is shown reduced to [-pi, pi)."""
    fig, ax = plt.subplots(figsize=(7, 5))
    for line in nullclines:
        ax.plot(line[:, 0], line[:, 1], color="0.6", lw=0.8)
    for x, y, label in orbits:
        y_red = np.mod(np.asarray(y) + np.pi, 2.0 * np.pi) - np.pi
        # Break the polyline where the reduced phase wraps.
        jumps = np.where(np.abs(np.diff(y_red)) > np.pi)[0]
        segments = np.split(np.column_stack([np.asarray(x, dtype=float), y_red]), jumps + 1)
        for i, seg in enumerate(segments):
            ax.plot(seg[:, 0], seg[:, 1], lw=1.6, label=label if i == 0 else None)
    ax.set_xlabel("base coordinate")
    ax.set_ylabel(f"{kind_label} phase (reduced)")
    if title:
        ax.set_title(title)
    if orbits:
        ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_scan(path, x, y, xlabel: str, ylabel: str, title: str | None = None):
    """Line plot of one eigenvalue map sampled on a grid."""
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(x, y, marker="o", ms=3, lw=1.2)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_profiles(path, rad, ang):
    """Two-panel figure of the reconstructed bound-state profiles."""
    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    axes[0].plot(rad.r, np.exp(rad.lnR), lw=1.2)
    axes[0].set_xlabel("r")
    axes[0].set_ylabel("R(r)")
    axes[1].plot(ang.theta, np.exp(ang.lnS), lw=1.2)
    axes[1].set_xlabel("theta")
    axes[1].set_ylabel("S(theta)")
    for ax in axes:
        ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
