"""Distributed-order quadrature nodes and time-memory coefficients.

The order integral over beta in [1, 2] is approximated by the composite
mid-point rule on K uniform panels.  Each node beta_l contributes Caputo
weights a_k = (k+1)^(2-beta_l) - k^(2-beta_l); collapsing the node sum gives
the scalars the stepper actually consumes:

    mu   -- coefficient of the new time level (sets the diagonal dominance),
    W[j] -- weight of the solution difference at lag j+1 (j = 0..N-2),
    s[n] -- weight of the initial-velocity term when stepping to level n+1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InvalidDiscretizationError, InvalidProblemError
from .model import Discretization, ProblemSpec

__all__ = ["CoefficientTable", "quad_nodes", "caputo_a", "build_table", "order_integral"]


@dataclass(frozen=True)
class CoefficientTable:
    """Precomputed, immutable coefficient set for one (spec, disc) pair.

    a[l, k] holds the Caputo weight of lag k at node l (k = 0..N-1).
    W[j] is the collapsed history weight for lag j+1 (length N-1); s[n] is
    the collapsed initial-velocity weight used when stepping to time level
    n+1 (length N).  Both follow 0-based storage of 1-based quantities.
    """

    betas: np.ndarray
    pvals: np.ndarray
    a: np.ndarray
    mu: float
    W: np.ndarray
    s: np.ndarray
    tau: float


def quad_nodes(K: int) -> np.ndarray:
    """Mid-points of the K uniform panels of [1, 2]: beta_l = 1 + (2l-1)/(2K)."""
    if K < 1:
        raise InvalidDiscretizationError(f"K must be >= 1, got {K}")
    l = np.arange(1, K + 1, dtype=float)
    return 1.0 + (2.0 * l - 1.0) / (2.0 * K)


def caputo_a(k: int, beta: float) -> float:
    """Caputo difference weight (k+1)^(2-beta) - k^(2-beta) for k >= 0."""
    g = 2.0 - beta
    if k == 0:
        return 1.0
    # exp/log in one branch; k = 0 handled above to avoid pow(0, g).
    return math.exp(g * math.log(k + 1.0)) - math.exp(g * math.log(k))


def _caputo_row(beta: float, n: int) -> np.ndarray:
    """a_k for k = 0..n-1 at a single node, via one-branch exp/log powers."""
    g = 2.0 - beta
    powers = np.empty(n + 1)
    powers[0] = 0.0
    ks = np.arange(1, n + 1, dtype=float)
    powers[1:] = np.exp(g * np.log(ks))
    return powers[1:] - powers[:-1]


def order_integral(p: Callable[[float], float], K: int) -> float:
    """Mid-point approximation of the order integral of p over [1, 2]."""
    nodes = quad_nodes(K)
    return float(sum(p(b) for b in nodes) / K)


def build_table(spec: ProblemSpec, disc: Discretization) -> CoefficientTable:
    """Evaluate every coefficient the stepper needs, once per run.

    Storage is O(K*N); the collapsed weights remove the node dimension from
    the stepper's inner loop.  Raises if the weight is not strictly positive
    at some quadrature node.
    """
    K, N, tau = disc.K, disc.N, disc.tau
    betas = quad_nodes(K)
    pvals = np.array([float(spec.weight(b)) for b in betas])
    if not np.all(np.isfinite(pvals)) or np.any(pvals <= 0.0):
        bad = betas[~(np.isfinite(pvals) & (pvals > 0.0))][0]
        raise InvalidProblemError(f"weight is not positive at quadrature node beta={bad!r}")

    a = np.empty((K, N))
    for l, beta in enumerate(betas):
        a[l] = _caputo_row(beta, N)

    # Per-node scale dbeta * p(beta_l) * tau^(-beta_l) / Gamma(3 - beta_l).
    scale = np.array(
        [
            disc.dbeta * pvals[l] / (tau**betas[l] * math.gamma(3.0 - betas[l]))
            for l in range(K)
        ]
    )
    mu = float(scale.sum())
    W = (scale[:, None] * (a[:, : N - 1] - a[:, 1:N])).sum(axis=0) if N > 1 else np.empty(0)
    s = tau * (scale[:, None] * a).sum(axis=0)
    return CoefficientTable(betas=betas, pvals=pvals, a=a, mu=mu, W=W, s=s, tau=tau)
