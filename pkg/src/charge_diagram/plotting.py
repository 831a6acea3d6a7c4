"""Figure rendering for sampled diagrams and rate sweeps.

Used by the CLI when --plot is given: figures are written next to the
delimited output, never shown interactively.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

STYLE = {
    "figure.figsize": (6.0, 4.0),
    "font.size": 11,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "savefig.dpi": 150,
    "savefig.bbox": "tight",
}


def render_sample_plot(rows, varying, path: str) -> None:
    """Plot a max-entropy surface sample.

    rows: sequence of (a_1..a_c, s_max) tuples; varying: indices of the
    swept charge axes. One axis gives a curve, two give a scatter map.
    """
    if not rows:
        raise ValueError("nothing to plot: no achievable grid points")
    if len(varying) not in (1, 2):
        raise ValueError(
            f"plotting needs 1 or 2 varying axes, got {len(varying)}"
        )
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        if len(varying) == 1:
            j = varying[0]
            xs = [r[j] for r in rows]
            ys = [r[-1] for r in rows]
            ax.plot(xs, ys, "-", lw=1.5)
            ax.set_xlabel(f"charge value a_{j + 1}")
            ax.set_ylabel("max entropy S(tau(a)) [nats]")
        else:
            j, k = varying
            xs = [r[j] for r in rows]
            ys = [r[k] for r in rows]
            cs = [r[-1] for r in rows]
            sc = ax.scatter(xs, ys, c=cs, s=14, cmap="viridis")
            fig.colorbar(sc, ax=ax, label="max entropy [nats]")
            ax.set_xlabel(f"charge value a_{j + 1}")
            ax.set_ylabel(f"charge value a_{k + 1}")
        ax.set_title("max-entropy diagram sample")
        fig.savefig(path)
        plt.close(fig)


def render_sweep_plot(rows, path: str) -> None:
    """Log-log plot of exact and quadratic bath rates against delta.

    rows: sequence of (delta, r_exact, r_quadratic).
    """
    if not rows:
        raise ValueError("nothing to plot: empty sweep")
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        deltas = [r[0] for r in rows]
        ax.loglog(deltas, [r[1] for r in rows], "o-", label="exact R*")
        ax.loglog(deltas, [r[2] for r in rows], "s--", label="quadratic")
        ax.set_xlabel("second-law gap delta [nats]")
        ax.set_ylabel("bath rate R")
        ax.set_title("optimal bath rate vs gap")
        ax.legend()
        fig.savefig(path)
        plt.close(fig)
