"""Figure rendering for the CLI report paths.

The curve report draws the convergence-domain boundary with its named
points; the verify report draws the log tails along each checked ray with
the fitted lines.  Figures are written next to the delimited output as
PNG files; data emission never depends on them.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["render_curve_figure", "render_verify_figure"]


def render_curve_figure(geometry, points, path):
    """Boundary curve with labeled marker points.

    ``points`` maps labels (P1, Q1, R_(1,1), ...) to tilt pairs.
    """
    fig, ax = plt.subplots(figsize=(6.0, 5.5))
    samples = np.asarray(geometry.boundary_samples)
    closed = np.vstack([samples, samples[:1]])
    ax.plot(closed[:, 0], closed[:, 1], "-", color="tab:blue", lw=1.4, label="spr = 1")
    ax.axhline(0.0, color="0.8", lw=0.7)
    ax.axvline(0.0, color="0.8", lw=0.7)
    for label, (x, y) in sorted(points.items()):
        ax.plot([x], [y], "o", ms=5, color="tab:red")
        ax.annotate(label, (x, y), textcoords="offset points", xytext=(5, 4), fontsize=9)
    ax.set_xlabel("theta1")
    ax.set_ylabel("theta2")
    ax.set_title("convergence domain boundary")
    ax.grid(alpha=0.25)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def render_verify_figure(ts, rows, path):
    """Log tails along each verified ray, with the fitted slopes."""
    usable = [row for row in rows if not row.get("error")]
    if not usable:
        return
    fig, ax = plt.subplots(figsize=(6.5, 5.0))
    for row in usable:
        c1, c2 = row["direction"]
        fit = row["fit"]
        ks = np.arange(fit.k_lo, fit.k_hi + 1)
        probs = ts.pi[ks * c1, ks * c2, fit.phase]
        line, = ax.plot(ks, np.log(probs), "o", ms=3, label=f"c=({c1},{c2})")
        ax.plot(
            ks,
            fit.slope * ks + (np.log(probs[0]) - fit.slope * ks[0]),
            "-",
            lw=1.0,
            color=line.get_color(),
        )
    ax.set_xlabel("ray step k")
    ax.set_ylabel("log stationary probability")
    ax.set_title(f"truncated-window tails (N={ts.N})")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.25)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
