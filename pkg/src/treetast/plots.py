"""Static line plots for experiment datasets.

Pure functions from parsed CSV rows to SVG files; rendering is headless
(Agg) so figures can be produced on any box alongside the CSV itself.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .errors import InvalidInput

_MARKERS = ("o", "s", "^", "d", "v", "*")


def _column(rows, name):
    try:
        return [row[name] for row in rows]
    except KeyError:
        raise InvalidInput(f"dataset has no column {name!r}")


def line_plot(rows, x: str, y: str, series: str, out_base: str,
              title: str | None = None) -> list:
    """Group rows by the series column and draw y against x, once with a
    linear y axis ({out_base}.svg) and once log ({out_base}_log.svg).
    Rows with an empty y value are skipped; an empty plot is an error.
    Returns the list of files written."""
    if not rows:
        raise InvalidInput("empty dataset")
    _column(rows, x), _column(rows, y), _column(rows, series)
    groups: dict = {}
    for row in rows:
        if row[y] == "" or row[x] == "":
            continue
        groups.setdefault(row[series], []).append((float(row[x]), float(row[y])))
    if not groups or all(len(pts) == 0 for pts in groups.values()):
        raise InvalidInput(f"no plottable rows for y = {y!r}")

    written = []
    for suffix, yscale in (("", "linear"), ("_log", "log")):
        fig, ax = plt.subplots(figsize=(6.4, 4.8))
        for i, (label, pts) in enumerate(sorted(groups.items())):
            pts = sorted(pts)
            ax.plot([p[0] for p in pts], [p[1] for p in pts],
                    marker=_MARKERS[i % len(_MARKERS)], label=str(label))
        ax.set_xlabel(x)
        ax.set_ylabel(y)
        ax.set_yscale(yscale)
        if title:
            ax.set_title(title)
        ax.grid(True, which="both", alpha=0.4)
        ax.legend()
        path = f"{out_base}{suffix}.svg"
        fig.savefig(path, format="svg")
        plt.close(fig)
        written.append(path)
    return written
