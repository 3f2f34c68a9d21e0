"""SVG line charts for experiment reports."""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def line_plot(series, path, title="", xlabel="", ylabel="", logx=False, vline=None):
    """``series`` maps a legend label to ``(x, y)``; optional ``(style)`` third item."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, xy in series.items():
        style = xy[2] if len(xy) > 2 else "-"
        ax.plot(xy[0], xy[1], style, label=label, marker="o" if len(xy[0]) < 12 else None)
    if vline is not None:
        ax.axvline(vline, color="grey", linestyle=":", linewidth=1)
    if logx:
        ax.set_xscale("log")
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if series:
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
    return path
