"""Surface figures: relative-error surface and exact/numeric pair."""

from __future__ import annotations

import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .csvio import MissingColumnError, field_grid, load_columns


def _surface(ax, x, y, z, cmap="viridis"):
    X, Y = np.meshgrid(x, y, indexing="ij")
    return ax.plot_surface(X, Y, z, cmap=cmap, linewidth=0, antialiased=True)


def plot_error_surface(field_csv: str, out_path: str) -> float:
    """Draw the relative-error surface; returns the color-scale maximum."""
    x, y, z = field_grid(load_columns(field_csv), "rel_err")
    fig = plt.figure(figsize=(7, 5))
    ax = fig.add_subplot(projection="3d")
    mappable = _surface(ax, x, y, z)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_zlabel("relative error")
    fig.colorbar(mappable, shrink=0.6)
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return float(z.max())


def plot_solution_pair(field_csv: str, out_path: str) -> None:
    """Draw exact and numeric solution surfaces side by side."""
    columns = load_columns(field_csv)
    x, y, exact = field_grid(columns, "u_exact")
    _, _, numeric = field_grid(columns, "u_numeric")
    fig = plt.figure(figsize=(11, 5))
    for idx, (z, title) in enumerate([(exact, "exact"), (numeric, "numerical")], start=1):
        ax = fig.add_subplot(1, 2, idx, projection="3d")
        _surface(ax, x, y, z)
        ax.set_xlabel("x")
        ax.set_ylabel("y")
        ax.set_zlabel("u")
        ax.set_title(title)
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def _main(argv, fn, usage: str) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if len(argv) != 2:
        print(usage, file=sys.stderr)
        return 2
    try:
        result = fn(argv[0], argv[1])
    except (OSError, ValueError, MissingColumnError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if result is not None:
        print(f"color scale max: {result:.6e}")
    print(f"wrote {argv[1]}")
    return 0


def error_main(argv=None) -> int:
    return _main(argv, plot_error_surface, "usage: plot-error <field.csv> <out.png>")


def pair_main(argv=None) -> int:
    return _main(argv, plot_solution_pair, "usage: plot-pair <field.csv> <out.png>")


if __name__ == "__main__":
    sys.exit(error_main())
