"""Static SVG plots for experiment outputs (byte-reproducible)."""

from __future__ import annotations

import io

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

_RC = {"svg.hashsalt": "dimwall", "svg.fonttype": "none", "figure.figsize": (6.0, 4.0)}


def line_plot(series, *, xlabel: str, ylabel: str, title: str, logx: bool = False) -> bytes:
    """Render ``series`` (list of ``(label, xs, ys, style)``) to SVG bytes."""
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        for label, xs, ys, style in series:
            ax.plot(xs, ys, style, label=label)
        if logx:
            ax.set_xscale("log", base=2)
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        ax.set_title(title)
        ax.grid(True, alpha=0.3)
        ax.legend(loc="best")
        fig.tight_layout()
        buf = io.BytesIO()
        fig.savefig(buf, format="svg", metadata={"Date": None})
        plt.close(fig)
    return buf.getvalue()
