"""Optional figure rendering for CLI tables (requires matplotlib)."""

from __future__ import annotations

import math

STYLE = {
    "figure.figsize": (6.0, 6.0 * (math.sqrt(5) - 1) / 2),
    "font.family": "serif",
    "font.size": 10,
    "axes.labelsize": 10,
    "legend.fontsize": 8,
    "xtick.direction": "in",
    "ytick.direction": "in",
    "lines.linewidth": 1.0,
    "savefig.dpi": 150,
    "savefig.bbox": "tight",
}


def render(columns, rows, x, y, path, group=None, logx=False, logy=False, title=None):
    """Line plot of column ``y`` against ``x``, one curve per value of ``group``."""
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError as exc:  # pragma: no cover - depends on the environment
        raise RuntimeError("figure output needs matplotlib (pip install 'artifact[plot]')") from exc

    ix, iy = columns.index(x), columns.index(y)
    ig = columns.index(group) if group else None
    curves: dict = {}
    for row in rows:
        xv, yv = row[ix], row[iy]
        if not (isinstance(xv, (int, float)) and isinstance(yv, (int, float))):
            continue
        key = row[ig] if ig is not None else None
        curves.setdefault(key, ([], []))
        curves[key][0].append(xv)
        curves[key][1].append(yv)

    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for key, (xs, ys) in curves.items():
            ax.plot(xs, ys, label=None if key is None else f"{group} = {key}")
        ax.set_xlabel(x)
        ax.set_ylabel(y)
        if logx:
            ax.set_xscale("log")
        if logy:
            ax.set_yscale("log")
        if title:
            ax.set_title(title)
        if len(curves) > 1 or (curves and next(iter(curves)) is not None):
            ax.legend(frameon=False)
        for side in ("top", "right"):
            ax.spines[side].set_visible(False)
        fig.savefig(path)
        plt.close(fig)
