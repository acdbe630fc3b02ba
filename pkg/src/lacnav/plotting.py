"""Static trajectory rendering from a parsed trace.

Produces a deterministic SVG: per-agent trajectory polylines, start and
target markers, group coloring (two colors for the reflection layout, an
even colormap spread otherwise).
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .traceio import ParsedTrace  # noqa: E402


def _colors(parsed: ParsedTrace) -> dict[int, tuple]:
    ids = sorted(parsed.starts)
    if parsed.scenario_kind == "reflection":
        return {
            i: ("tab:blue" if parsed.starts[i].x < 0 else "tab:red") for i in ids
        }
    cmap = plt.get_cmap("viridis")
    n = max(1, len(ids) - 1)
    return {i: cmap(pos / n) for pos, i in enumerate(ids)}


def render_trace(parsed: ParsedTrace, out_path: str | Path) -> None:
    # Stable element ids inside the SVG; without a fixed salt matplotlib
    # derives them from object addresses and the bytes change run to run.
    with plt.rc_context({"svg.hashsalt": "lacnav"}):
        fig, ax = plt.subplots(figsize=(8.0, 8.0))
        colors = _colors(parsed)
        for aid in sorted(parsed.starts):
            xs = [rows[aid][0] for _, rows in parsed.steps]
            ys = [rows[aid][1] for _, rows in parsed.steps]
            color = colors[aid]
            if xs:
                ax.plot(xs, ys, color=color, linewidth=0.8, alpha=0.8)
            s = parsed.starts[aid]
            t = parsed.targets[aid]
            ax.plot([s.x], [s.y], marker="o", markersize=4, color=color,
                    markerfacecolor="none")
            ax.plot([t.x], [t.y], marker="x", markersize=4, color=color)
        ax.set_aspect("equal")
        ax.set_title(
            f"{parsed.policy} / {parsed.scenario_kind} "
            f"({parsed.n_agents} agents, seed {parsed.seed})"
        )
        ax.set_xlabel("x")
        ax.set_ylabel("y")
        fig.savefig(out_path, format="svg", metadata={"Date": None})
        plt.close(fig)
