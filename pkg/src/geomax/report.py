"""Matplotlib figures written next to the bench CSV."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .bench import summarize  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.titlesize": 10,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 150,
    "svg.hashsalt": "geomax",
}


def plot_gaps(records, path, title: str = "Mean gap per instance class") -> None:
    """Grouped bars of mean gap (percent) per instance class and algorithm.

    The left panel measures against the tightest bound; the right panel,
    drawn only when exact optima are in the records, against the optimum.
    The format follows the file extension (png, svg, pdf).
    """
    rows = summarize(records)
    instances = list(dict.fromkeys(r.instance for r in rows))
    algos = list(dict.fromkeys(r.algorithm for r in rows))
    by_key = {(r.instance, r.algorithm): r for r in rows}
    width = 0.8 / max(len(algos), 1)
    has_opt = any(r.vs_opt_pct is not None for r in rows)
    panels = [("gap_pct", "vs tightest bound")] + ([("vs_opt_pct", "vs optimum")] if has_opt else [])

    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(1, len(panels), squeeze=False,
                                 figsize=(len(panels) * max(3.5, 1.0 * len(instances) + 2), 3.2))
        for ax, (attr, label) in zip(axes[0], panels):
            for k, algo in enumerate(algos):
                xs, ys = [], []
                for i, inst in enumerate(instances):
                    r = by_key.get((inst, algo))
                    if r is not None and getattr(r, attr) is not None:
                        xs.append(i + k * width)
                        ys.append(getattr(r, attr))
                ax.bar(xs, ys, width, label=algo, color=f"C{k}")
            ax.set_xticks([i + 0.4 - width / 2 for i in range(len(instances))])
            ax.set_xticklabels(instances, rotation=30, ha="right")
            ax.set_ylabel("gap (%)")
            ax.set_title(label)
        if algos:
            axes[0][0].legend(frameon=False, fontsize=7)
        fig.suptitle(title)
        fig.tight_layout()
        fig.savefig(path, metadata={"Date": None} if str(path).endswith(".svg") else None)
        plt.close(fig)
