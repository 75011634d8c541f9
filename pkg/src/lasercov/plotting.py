"""Figure rendering for experiment tables.

Figures are drawn with the non-interactive Agg backend and written next to
the CSV they illustrate. :func:`plot_script` emits a small standalone script
that redraws the same figure from the CSV alone, for users who want to
restyle it.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


@dataclass
class FigureSpec:
    x: str  # column plotted on the horizontal axis
    y: list[str]  # one line per column (and per group)
    group: str | None = None  # column whose values split rows into lines
    logx: bool = False
    title: str = ""
    ylabel: str = ""
    markers: list[str] = field(default_factory=list)  # columns drawn as markers only


def read_table(path) -> tuple[list[str], list[dict[str, str]]]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        return list(reader.fieldnames or []), list(reader)


def _as_float(values):
    out = []
    for v in values:
        try:
            out.append(float(v))
        except (TypeError, ValueError):
            out.append(np.nan)
    return np.array(out)


def render(csv_path, png_path, spec: FigureSpec) -> Path:
    """Draw ``spec`` from the CSV at ``csv_path`` into ``png_path``."""
    _, rows = read_table(csv_path)
    groups = sorted({r[spec.group] for r in rows}, key=str) if spec.group else [None]
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    colors = plt.rcParams["axes.prop_cycle"].by_key()["color"]
    for n, g in enumerate(groups):
        sel = [r for r in rows if spec.group is None or r[spec.group] == g]
        x = _as_float(r[spec.x] for r in sel)
        order = np.argsort(x)
        for col in spec.y:
            y = _as_float(r[col] for r in sel)
            if np.all(np.isnan(y)):
                continue
            label = col if g is None else f"{g} {col}"
            style = dict(linestyle="none", marker="o", markersize=4) if col in spec.markers else dict(linewidth=1.5)
            if spec.group:
                style["color"] = colors[n % len(colors)]
            ax.plot(x[order], y[order], label=label, **style)
    if spec.logx:
        ax.set_xscale("log")
    ax.set_xlabel(spec.x)
    ax.set_ylabel(spec.ylabel or ", ".join(spec.y))
    if spec.title:
        ax.set_title(spec.title)
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=7)
    fig.tight_layout()
    png_path = Path(png_path)
    fig.savefig(png_path, dpi=120)
    plt.close(fig)
    return png_path


_SCRIPT = '''"""Redraw {png} from {csv}."""
import csv

import matplotlib.pyplot as plt

X = {x!r}
Y = {y!r}
GROUP = {group!r}
MARKERS = {markers!r}

with open({csv!r}, newline="") as fh:
    rows = list(csv.DictReader(fh))


def num(v):
    try:
        return float(v)
    except ValueError:
        return float("nan")


groups = sorted({{r[GROUP] for r in rows}}) if GROUP else [None]
fig, ax = plt.subplots()
for g in groups:
    sel = sorted((r for r in rows if GROUP is None or r[GROUP] == g), key=lambda r: num(r[X]))
    for col in Y:
        label = col if g is None else f"{{g}} {{col}}"
        fmt = "o" if col in MARKERS else "-"
        ax.plot([num(r[X]) for r in sel], [num(r[col]) for r in sel], fmt, label=label)
if {logx!r}:
    ax.set_xscale("log")
ax.set_xlabel(X)
ax.set_title({title!r})
ax.legend()
fig.savefig({png!r}, dpi=150)
'''


def plot_script(csv_path, png_path, spec: FigureSpec) -> str:
    """Source of a standalone script that redraws the figure from the CSV."""
    return _SCRIPT.format(csv=str(csv_path), png=str(png_path), x=spec.x, y=list(spec.y),
                          group=spec.group, markers=list(spec.markers), logx=spec.logx,
                          title=spec.title)
