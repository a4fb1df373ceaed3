"""Static figure rendering for scenario traces.

Figures are written as SVG next to the CSV output; the CSV remains the
authoritative record and the figures are line charts for quick reading.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .metrics import moving_average

__all__ = ["render_scenario_figures"]


def render_scenario_figures(result, out_dir, ma_window: int = 1) -> list:
    """Write risk_global.svg and risk_nodes.svg for a ScenarioResult."""
    written = []

    fig, ax = plt.subplots(figsize=(7, 4.5))
    for name, trace in result.traces.items():
        g = moving_average(trace.global_risks(), ma_window)
        ax.plot(range(1, trace.rounds + 1), g, label=name, linewidth=1.4)
    ax.set_xlabel("round")
    ax.set_ylabel("global empirical risk"
                  + (f" (moving avg, w={ma_window})" if ma_window > 1 else ""))
    ax.set_title(result.name)
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    path = out_dir / "risk_global.svg"
    fig.savefig(path, format="svg", bbox_inches="tight")
    plt.close(fig)
    written.append(path)

    n = len(result.traces)
    fig, axes = plt.subplots(n, 1, figsize=(7, 3.2 * n), squeeze=False)
    for ax, (name, trace) in zip(axes.ravel(), result.traces.items()):
        for v in range(trace.node_count):
            ax.plot(range(1, trace.rounds + 1),
                    moving_average(trace.local_risks(v), ma_window),
                    label=f"node {v}", linewidth=1.0)
        ax.set_title(f"{result.name}: {name}", fontsize=9)
        ax.set_xlabel("round")
        ax.set_ylabel("node risk")
        ax.grid(True, alpha=0.3)
        ax.legend(fontsize=7)
    fig.tight_layout()
    path = out_dir / "risk_nodes.svg"
    fig.savefig(path, format="svg", bbox_inches="tight")
    plt.close(fig)
    written.append(path)
    return written
