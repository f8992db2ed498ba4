"""Discrete spatial operators and the tridiagonal (Thomas) solver.

Stencils read boundary entries of the input field directly and define their
result on interior nodes only; boundary rows/columns of the result are
zero-filled and must not be used.  The factored sweep matrices are symmetric
tridiagonal with dominance margin exactly sqrt(mu) per row, so elimination
without pivoting is safe.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SingularSystemError

__all__ = [
    "apply_dxx",
    "apply_dyy",
    "apply_dxxdyy",
    "TridiagonalSystem",
    "TridiagonalFactors",
    "factor_tridiagonal",
    "solve_factored",
    "thomas_solve",
    "sweep_matrix",
]


def apply_dxx(u: np.ndarray, h1: float) -> np.ndarray:
    """Second difference along x: (u[i-1,j] - 2u[i,j] + u[i+1,j]) / h1^2.

    Computed for 1 <= i <= M1-1 at every j (including boundary columns, which
    the intermediate-boundary formula of the sweeps needs); rows i = 0, M1 of
    the result are zero.
    """
    out = np.zeros_like(u)
    out[1:-1, :] = (u[:-2, :] - 2.0 * u[1:-1, :] + u[2:, :]) / (h1 * h1)
    return out


def apply_dyy(u: np.ndarray, h2: float) -> np.ndarray:
    """Second difference along y; mirror of apply_dxx with h2."""
    out = np.zeros_like(u)
    out[:, 1:-1] = (u[:, :-2] - 2.0 * u[:, 1:-1] + u[:, 2:]) / (h2 * h2)
    return out


def apply_dxxdyy(u: np.ndarray, h1: float, h2: float) -> np.ndarray:
    """Mixed fourth difference (9-point cross stencil), interior nodes only.

    The one-dimensional stencils commute, so the composition order is
    irrelevant up to rounding.
    """
    return apply_dxx(apply_dyy(u, h2), h1)


@dataclass
class TridiagonalSystem:
    """lower/diag/upper of lengths n-1, n, n-1 plus a right-hand side."""

    lower: np.ndarray
    diag: np.ndarray
    upper: np.ndarray
    rhs: np.ndarray


@dataclass(frozen=True)
class TridiagonalFactors:
    """Elimination state reused across many right-hand sides."""

    lower: np.ndarray      # original sub-diagonal
    inv_denom: np.ndarray  # 1 / pivots after forward elimination
    cprime: np.ndarray     # eliminated super-diagonal


def factor_tridiagonal(lower: np.ndarray, diag: np.ndarray, upper: np.ndarray) -> TridiagonalFactors:
    """Forward-eliminate once; no pivoting (dominance is structural here).

    Raises SingularSystemError on a zero pivot, which cannot occur for
    strictly diagonally dominant input (defensive check).
    """
    lower = np.asarray(lower, dtype=float)
    diag = np.asarray(diag, dtype=float)
    upper = np.asarray(upper, dtype=float)
    n = diag.shape[0]
    if lower.shape[0] != n - 1 or upper.shape[0] != n - 1:
        raise ValueError("lower/upper must have length n-1")
    inv_denom = np.empty(n)
    cprime = np.empty(max(n - 1, 0))
    denom = diag[0]
    if denom == 0.0:
        raise SingularSystemError("zero pivot in row 0")
    inv_denom[0] = 1.0 / denom
    for i in range(1, n):
        cprime[i - 1] = upper[i - 1] * inv_denom[i - 1]
        denom = diag[i] - lower[i - 1] * cprime[i - 1]
        if denom == 0.0:
            raise SingularSystemError(f"zero pivot in row {i}")
        inv_denom[i] = 1.0 / denom
    return TridiagonalFactors(lower=lower, inv_denom=inv_denom, cprime=cprime)


def solve_factored(factors: TridiagonalFactors, rhs: np.ndarray) -> np.ndarray:
    """Solve for one rhs of shape (n,) or a batch of shape (n, m).

    Scratch buffers are private to the call; the inputs are never mutated.
    The sweep loops run node-ascending, then node-descending, so results are
    bitwise reproducible.
    """
    rhs = np.asarray(rhs, dtype=float)
    n = factors.inv_denom.shape[0]
    if rhs.shape[0] != n:
        raise ValueError(f"rhs has leading dimension {rhs.shape[0]}, expected {n}")
    work = np.empty_like(rhs)
    work[0] = rhs[0] * factors.inv_denom[0]
    for i in range(1, n):
        work[i] = (rhs[i] - factors.lower[i - 1] * work[i - 1]) * factors.inv_denom[i]
    for i in range(n - 2, -1, -1):
        work[i] -= factors.cprime[i] * work[i + 1]
    return work


def thomas_solve(system: TridiagonalSystem) -> np.ndarray:
    """Solve one tridiagonal system by elimination without pivoting."""
    factors = factor_tridiagonal(system.lower, system.diag, system.upper)
    return solve_factored(factors, np.asarray(system.rhs, dtype=float))


def sweep_matrix(mu: float, h: float, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Coefficients of the one-dimensional sweep operator on n interior unknowns.

    Row i:  -1/(2 sqrt(mu) h^2) u[i-1] + (sqrt(mu) + 1/(sqrt(mu) h^2)) u[i]
            -1/(2 sqrt(mu) h^2) u[i+1],
    i.e. sqrt(mu) I minus the halved, mu-scaled second difference.  The
    dominance margin is exactly sqrt(mu) in every row.  Returns (lower, diag,
    upper); the rhs is supplied per solve.
    """
    if not mu > 0.0:
        raise ValueError(f"mu must be positive, got {mu}")
    if n < 1:
        raise ValueError(f"need at least one interior unknown, got {n}")
    rmu = np.sqrt(mu)
    off = -1.0 / (2.0 * rmu * h * h)
    diag = np.full(n, rmu + 1.0 / (rmu * h * h))
    lower = np.full(n - 1, off)
    upper = np.full(n - 1, off)
    return lower, diag, upper
