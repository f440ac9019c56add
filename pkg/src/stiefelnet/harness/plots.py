"""Report rendering: matplotlib figure panels and a gnuplot-compatible script.

The figure path is what experiment runs use (PNG written next to the CSV);
the script emitter produces a plain-text gnuplot program for environments
where no plotting library is available.
"""

import csv
import os

import numpy as np

from ..errors import ValidationError

# column -> (CSV index starting at 1, panel title, log-scale y)
PANELS = [
    ("grad_norm_sq", 3, "squared gradient norm at the mean", True),
    ("consensus_error", 2, "consensus error", True),
    ("objective", 4, "objective", False),
    ("dist_to_opt", 5, "distance to optimum", True),
]


def read_csv(path: str) -> dict:
    """Load a run CSV into arrays; absent dist_to_opt entries become NaN."""
    with open(path, "r", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        rows = list(reader)
    out = {}
    for key in ("k", "consensus_error", "grad_norm_sq", "objective",
                "dist_to_opt", "sfo_batches", "wall_ns"):
        out[key] = np.array([float(row[key]) if row[key] != "" else np.nan
                             for row in rows])
    return out


def render_figures(csv_paths: list, out_png: str) -> str:
    """Render the four metric panels to one PNG, one curve per CSV."""
    if not csv_paths:
        raise ValidationError("csv_paths", "need at least one CSV to plot")
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, axes = plt.subplots(2, 2, figsize=(10, 7))
    for path in csv_paths:
        data = read_csv(path)
        label = os.path.splitext(os.path.basename(path))[0]
        for ax, (column, _, _, logy) in zip(axes.ravel(), PANELS):
            values = data[column]
            if np.all(np.isnan(values)):
                continue
            if logy and np.all(values[np.isfinite(values)] > 0):
                ax.semilogy(data["k"], values, label=label)
            else:
                ax.plot(data["k"], values, label=label)
    for ax, (column, _, title, _) in zip(axes.ravel(), PANELS):
        ax.set_xlabel("iteration")
        ax.set_title(title)
        ax.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(out_png, dpi=120)
    plt.close(fig)
    return out_png


def emit_plot_script(csv_paths: list, out_path: str) -> str:
    """Write a gnuplot script with the four panels; references only the
    given CSV paths and needs no plotting library on our side."""
    if not csv_paths:
        raise ValidationError("csv_paths", "need at least one CSV to plot")
    lines = [
        "# gnuplot script generated by stiefelnet",
        "set datafile separator ','",
        "set terminal pngcairo size 1200,840",
        f"set output '{os.path.splitext(out_path)[0]}.png'",
        "set multiplot layout 2,2",
    ]
    for column, index, title, logy in PANELS:
        lines.append(f"set title '{title}'")
        lines.append("set xlabel 'iteration'")
        lines.append("set logscale y" if logy else "unset logscale y")
        plots = ", ".join(
            f"'{path}' using 1:{index} skip 1 with lines title '{os.path.basename(path)}'"
            for path in csv_paths
        )
        lines.append(f"plot {plots}")
    lines.append("unset multiplot")
    with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return out_path
