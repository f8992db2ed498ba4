"""Error norms, observed convergence orders, and refinement studies.

Errors are measured at the final time against the case's known solution, on
interior nodes, in the discrete max norm and the area-weighted L2 norm.
Orders between consecutive rows are reported against the smallest refinement
factor among the parameters that changed (so a schedule that quarters tau
while doubling the order panels reports against the panel doubling).
"""

from __future__ import annotations

import datetime as _dt
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from math import log
from typing import Optional, Sequence, Union

import numpy as np

from . import stepper
from .errors import InvalidProblemError, UndefinedOrderError
from .model import Discretization, ProblemSpec, case_by_name, eval_on_grid

__all__ = [
    "error_norms",
    "observed_order",
    "relative_error_field",
    "StudyRow",
    "StudyReport",
    "run_study",
    "SCHEDULES",
    "history_bytes",
    "CSV_COLUMNS",
]

RELATIVE_ERROR_FLOOR = 1e-12

# Built-in schedules as (M1, M2, N, K); named schedules are part of the CLI
# config schema.  The *-full variants extend the refinement past desk scale.
SCHEDULES = {
    "table1": [(500, 500, n, 160) for n in (5, 10, 20, 40, 80)],
    "table2": [(500, 500, 50, 10), (500, 500, 200, 20), (500, 500, 800, 40)],
    "table2-full": [
        (500, 500, 50, 10),
        (500, 500, 200, 20),
        (500, 500, 800, 40),
        (500, 500, 3200, 80),
    ],
    "table3": [(2, 2, 32, 8), (4, 4, 128, 16), (8, 8, 512, 32), (16, 16, 2048, 64)],
    "table3-full": [
        (2, 2, 32, 8),
        (4, 4, 128, 16),
        (8, 8, 512, 32),
        (16, 16, 2048, 64),
        (32, 32, 8192, 128),
        (64, 64, 32768, 256),
    ],
}

CSV_COLUMNS = ("tau", "h1", "h2", "dbeta", "err_inf", "order_inf", "err_l2", "order_l2", "seconds")


def error_norms(numeric: np.ndarray, exact: np.ndarray, disc: Discretization) -> tuple[float, float]:
    """Interior max-abs difference and sqrt(h1 h2 * sum of squared differences)."""
    if numeric.shape != exact.shape:
        raise ValueError(f"shape mismatch: {numeric.shape} vs {exact.shape}")
    diff = np.abs(numeric[1:-1, 1:-1] - exact[1:-1, 1:-1])
    e_inf = float(diff.max())
    e_l2 = float(np.sqrt(disc.h1 * disc.h2 * np.sum(diff * diff)))
    return e_inf, e_l2


def observed_order(e_coarse: float, e_fine: float, ratio: float) -> float:
    """log(e_coarse / e_fine) / log(ratio) for a refinement by the given factor."""
    if not (e_coarse > 0.0 and e_fine > 0.0):
        raise UndefinedOrderError(f"errors must be positive, got {e_coarse!r}, {e_fine!r}")
    if not ratio > 1.0:
        raise UndefinedOrderError(f"refinement ratio must exceed 1, got {ratio!r}")
    return log(e_coarse / e_fine) / log(ratio)


def relative_error_field(numeric: np.ndarray, exact: np.ndarray) -> np.ndarray:
    """|exact - numeric| / max(|exact|, floor) nodewise, floor = 1e-12."""
    if numeric.shape != exact.shape:
        raise ValueError(f"shape mismatch: {numeric.shape} vs {exact.shape}")
    return np.abs(exact - numeric) / np.maximum(np.abs(exact), RELATIVE_ERROR_FLOOR)


def history_bytes(M1: int, M2: int, N: int) -> int:
    """Size of the per-run history buffer: N * (M1-1) * (M2-1) * 8 bytes."""
    return N * (M1 - 1) * (M2 - 1) * 8


@dataclass
class StudyRow:
    M1: int
    M2: int
    N: int
    K: int
    tau: float
    h1: float
    h2: float
    dbeta: float
    err_inf: Optional[float] = None
    err_l2: Optional[float] = None
    order_inf: Optional[float] = None
    order_l2: Optional[float] = None
    seconds: Optional[float] = None
    error: Optional[str] = None  # failure message; errors/orders stay None

    def to_dict(self) -> dict:
        return {
            "M1": self.M1, "M2": self.M2, "N": self.N, "K": self.K,
            "tau": self.tau, "h1": self.h1, "h2": self.h2, "dbeta": self.dbeta,
            "err_inf": self.err_inf, "err_l2": self.err_l2,
            "order_inf": self.order_inf, "order_l2": self.order_l2,
            "seconds": self.seconds, "error": self.error,
        }


@dataclass
class StudyReport:
    rows: list
    metadata: dict = field(default_factory=dict)

    def to_json_text(self) -> str:
        return json.dumps(
            {"metadata": self.metadata, "rows": [r.to_dict() for r in self.rows]},
            indent=2,
        )

    def to_csv_text(self) -> str:
        def cell(v):
            return "" if v is None else format(v, ".17g")

        lines = [",".join(CSV_COLUMNS)]
        for r in self.rows:
            lines.append(
                ",".join(
                    cell(getattr(r, name)) for name in CSV_COLUMNS
                )
            )
        return "\n".join(lines) + "\n"


def _refinement_ratio(coarse: StudyRow, fine: StudyRow) -> Optional[float]:
    """Smallest factor > 1 among the resolution parameters that changed."""
    factors = [
        fine.N / coarse.N,       # tau refinement
        fine.M1 / coarse.M1,
        fine.M2 / coarse.M2,
        fine.K / coarse.K,       # dbeta refinement
    ]
    changed = [f for f in factors if f > 1.0]
    return min(changed) if changed else None


def _solve_row(spec: ProblemSpec, row: StudyRow) -> None:
    t0 = time.perf_counter()
    disc = Discretization.of(spec, row.M1, row.M2, row.N, row.K)
    final = stepper.run(spec, disc)
    exact = eval_on_grid(spec.analytic, disc.x, disc.y, spec.T)
    row.err_inf, row.err_l2 = error_norms(final, exact, disc)
    row.seconds = time.perf_counter() - t0


def run_study(
    case: Union[str, ProblemSpec],
    schedule: Union[str, Sequence[tuple]],
    parallel: bool = False,
    max_workers: int = 2,
) -> StudyReport:
    """Run the solver per schedule row and tabulate errors and orders.

    ``case`` is a built-in name or a ProblemSpec carrying a known solution;
    ``schedule`` is a built-in schedule name or explicit (M1, M2, N, K)
    tuples.  Row failures are recorded in the row and the study continues.
    """
    spec = case_by_name(case) if isinstance(case, str) else case
    if spec.analytic is None:
        raise InvalidProblemError(f"case {spec.name!r} has no known solution to study against")
    if isinstance(schedule, str):
        try:
            tuples = SCHEDULES[schedule]
        except KeyError:
            raise KeyError(f"unknown schedule {schedule!r}; known: {', '.join(sorted(SCHEDULES))}")
    else:
        tuples = list(schedule)

    rows = []
    for (M1, M2, N, K) in tuples:
        rows.append(
            StudyRow(
                M1=M1, M2=M2, N=N, K=K,
                tau=spec.T / N, h1=spec.L1 / M1, h2=spec.L2 / M2, dbeta=1.0 / K,
            )
        )

    def attempt(row: StudyRow) -> None:
        try:
            _solve_row(spec, row)
        except Exception as exc:  # per-row failures recorded, study continues
            row.error = f"{type(exc).__name__}: {exc}"

    if parallel and len(rows) > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            list(pool.map(attempt, rows))
    else:
        for row in rows:
            attempt(row)

    for prev, cur in zip(rows, rows[1:]):
        ratio = _refinement_ratio(prev, cur)
        if ratio is None or prev.error or cur.error:
            continue
        if prev.err_inf > 0.0 and cur.err_inf > 0.0:
            cur.order_inf = observed_order(prev.err_inf, cur.err_inf, ratio)
        if prev.err_l2 > 0.0 and cur.err_l2 > 0.0:
            cur.order_l2 = observed_order(prev.err_l2, cur.err_l2, ratio)

    metadata = {
        "case": spec.name,
        "norms": "discrete interior max norm; sqrt(h1*h2*sum of squared interior differences)",
        "order_ratio_convention": "smallest refinement factor among changed parameters",
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
    }
    return StudyReport(rows=rows, metadata=metadata)
