"""Log-log convergence figure from a study report.csv."""

from __future__ import annotations

import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .csvio import MissingColumnError, load_columns

# Candidate abscissae in tie-break preference order.  The plotted (and
# fitted) axis is the one refining by the smallest factor per row, matching
# how the solver reports its order columns.
RESOLUTION_COLUMNS = ("h1", "dbeta", "tau")


def pick_abscissa(columns: dict) -> str:
    best, best_factor = None, None
    n = len(columns["err_inf"])
    for name in RESOLUTION_COLUMNS:
        col = columns.get(name)
        if col is None or n < 2:
            continue
        steps = col[:-1] / col[1:]
        if np.any(steps <= 1.0):
            continue  # not refining in this parameter
        factor = float(np.exp(np.mean(np.log(steps))))
        if best_factor is None or factor < best_factor:
            best, best_factor = name, factor
    return best


def plot_convergence(report_csv: str, out_path: str):
    """Draw err_inf/err_l2 against the controlling resolution parameter.

    Returns the fitted slope of err_inf, or None for a single-row report
    (points are still plotted).
    """
    columns = load_columns(report_csv)
    for required in ("err_inf", "err_l2"):
        if required not in columns:
            raise MissingColumnError(f"column {required!r} not present")
    err_inf = columns["err_inf"]
    err_l2 = columns["err_l2"]

    fig, ax = plt.subplots(figsize=(6, 4.5))
    slope = None
    abscissa = pick_abscissa(columns) if err_inf.size > 1 else None
    if abscissa is None:
        ax.loglog(np.arange(1, err_inf.size + 1), err_inf, "o", label="max norm")
        ax.loglog(np.arange(1, err_l2.size + 1), err_l2, "s", label="L2 norm")
        ax.set_xlabel("row")
    else:
        res = columns[abscissa]
        ax.loglog(res, err_inf, "o-", label="max norm")
        ax.loglog(res, err_l2, "s--", label="L2 norm")
        slope = float(np.polyfit(np.log(res), np.log(err_inf), 1)[0])
        for order, style in ((1, ":"), (2, "-.")):
            guide = err_inf[0] * (res / res[0]) ** order
            ax.loglog(res, guide, style, color="gray", label=f"slope {order}")
        ax.set_xlabel(abscissa)
        ax.set_title(f"fitted slope {slope:.3f} vs {abscissa}")
    ax.set_ylabel("error at final time")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return slope


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if len(argv) != 2:
        print("usage: plot-conv <report.csv> <out.png>", file=sys.stderr)
        return 2
    try:
        slope = plot_convergence(argv[0], argv[1])
    except (OSError, ValueError, MissingColumnError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if slope is None:
        print("single-row report: slope omitted")
    else:
        print(f"fitted slope: {slope:.4f}")
    print(f"wrote {argv[1]}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
