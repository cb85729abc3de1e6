"""Fringe figures rendered next to CSV output."""

from __future__ import annotations

import math


def save_fringe_figure(result, path) -> None:
    """Render the fringe curves of a run result to an image file.

    Analytic curves are drawn as lines; Monte Carlo runs additionally show
    the empirical per-phase frequencies as markers.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    series_list = [result.unconditioned, *result.subensembles]
    for series in series_list:
        name = "unconditioned" if series.label is None else f"subensemble {series.label}"
        (line,) = ax.plot(result.phases, series.probabilities, lw=1.4, label=name)
        if series.counts is not None:
            mask = series.shots_per_phase > 0
            ax.plot(
                result.phases[mask],
                series.counts[mask] / series.shots_per_phase[mask],
                "o",
                ms=3,
                color=line.get_color(),
                alpha=0.6,
            )
    ax.set_xlabel("probe phase (rad)")
    ax.set_ylabel("detection probability")
    ax.set_xlim(-math.pi, math.pi)
    ax.set_ylim(-0.02, 1.02)
    ax.legend(loc="upper right", fontsize=8)
    ax.set_title(f"{result.mode}: V = {result.unconditioned.visibility:.4f}")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
