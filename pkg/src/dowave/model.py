"""Continuous problem definition, discretization parameters, and built-in cases.

The unknown u(x, y, t) lives on the rectangle (0, L1) x (0, L2) for t in
[0, T].  A problem consists of a positive weight over the differentiation
order interval [1, 2], initial data psi1 (value) and psi2 (time derivative),
boundary data phi, and a source f(x, y, t, u).

Grid functions ("fields") are plain float64 arrays of shape (M1+1, M2+1),
indexed [i, j] with x varying along axis 0 and y along axis 1, C order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import InvalidDiscretizationError, InvalidProblemError

__all__ = [
    "ProblemSpec",
    "Discretization",
    "example1",
    "analytic_example1",
    "zero_case",
    "constant_case",
    "case_by_name",
    "CASE_NAMES",
    "eval_on_grid",
    "check_compatibility",
    "require_finite",
]


@dataclass(frozen=True)
class ProblemSpec:
    """One instance of the continuous problem.

    ``weight`` maps a scalar order beta in [1, 2] to a positive real.  The
    data functions follow numpy broadcasting: ``psi1(x, y)``, ``psi2(x, y)``
    and ``phi(x, y, t)`` accept array x/y (t is a scalar); ``source(x, y, t,
    u)`` additionally broadcasts over the solution array u.  All callables
    must be pure.

    ``lipschitz`` is the reported Lipschitz bound of the source in u.  It is
    carried for reporting only and never enforced (a quadratic source is only
    locally Lipschitz).
    """

    weight: Callable[[float], float]
    L1: float
    L2: float
    T: float
    psi1: Callable
    psi2: Callable
    phi: Callable
    source: Callable
    lipschitz: float
    analytic: Optional[Callable] = None
    name: str = "custom"

    def __post_init__(self):
        for label, value in (("L1", self.L1), ("L2", self.L2), ("T", self.T)):
            if not (value > 0.0 and math.isfinite(value)):
                raise InvalidProblemError(f"{label} must be positive and finite, got {value!r}")
        if not (self.lipschitz > 0.0):
            raise InvalidProblemError(f"lipschitz must be positive, got {self.lipschitz!r}")


@dataclass(frozen=True)
class Discretization:
    """Uniform grid: M1 x M2 spatial cells, N time steps, K order panels.

    h1, h2, tau, dbeta are derived properties and cannot be set independently.
    """

    M1: int
    M2: int
    N: int
    K: int
    L1: float
    L2: float
    T: float

    def __post_init__(self):
        if self.M1 < 2 or self.M2 < 2:
            raise InvalidDiscretizationError(f"M1, M2 must be >= 2, got {self.M1}, {self.M2}")
        if self.N < 1:
            raise InvalidDiscretizationError(f"N must be >= 1, got {self.N}")
        if self.K < 1:
            raise InvalidDiscretizationError(f"K must be >= 1, got {self.K}")

    @classmethod
    def of(cls, spec: ProblemSpec, M1: int, M2: int, N: int, K: int) -> "Discretization":
        return cls(M1=M1, M2=M2, N=N, K=K, L1=spec.L1, L2=spec.L2, T=spec.T)

    @property
    def h1(self) -> float:
        return self.L1 / self.M1

    @property
    def h2(self) -> float:
        return self.L2 / self.M2

    @property
    def tau(self) -> float:
        return self.T / self.N

    @property
    def dbeta(self) -> float:
        return 1.0 / self.K

    @property
    def x(self) -> np.ndarray:
        """Grid abscissae x_i = i*h1, i = 0..M1."""
        return np.arange(self.M1 + 1) * self.h1

    @property
    def y(self) -> np.ndarray:
        """Grid ordinates y_j = j*h2, j = 0..M2."""
        return np.arange(self.M2 + 1) * self.h2

    def time(self, n: int) -> float:
        return n * self.tau


def eval_on_grid(fn: Callable, x: np.ndarray, y: np.ndarray, *extra) -> np.ndarray:
    """Evaluate fn(x, y, *extra) on the tensor grid, returning a full array.

    x and y are 1-D coordinate vectors; broadcasting does the outer product.
    Constant-returning callables (plain Python numbers) are expanded to the
    grid shape.
    """
    X = np.asarray(x, dtype=float)[:, None]
    Y = np.asarray(y, dtype=float)[None, :]
    out = fn(X, Y, *extra)
    return np.broadcast_to(np.asarray(out, dtype=float), (X.shape[0], Y.shape[1])).copy()


def require_finite(values: np.ndarray, what: str) -> np.ndarray:
    """Assert a field contains no NaN/Inf; returns it unchanged."""
    if not np.all(np.isfinite(values)):
        raise InvalidProblemError(f"{what} contains non-finite entries")
    return values


def check_compatibility(spec: ProblemSpec, disc: Discretization, tol: float = 1e-12) -> None:
    """Check phi(x, y, 0) == psi1(x, y) on the grid boundary within tol."""
    p1 = eval_on_grid(spec.psi1, disc.x, disc.y)
    p0 = eval_on_grid(spec.phi, disc.x, disc.y, 0.0)
    diff = np.abs(p1 - p0)
    edge = np.zeros_like(diff, dtype=bool)
    edge[0, :] = edge[-1, :] = edge[:, 0] = edge[:, -1] = True
    worst = float(diff[edge].max())
    if worst > tol:
        raise InvalidProblemError(
            f"boundary/initial data incompatible at t=0: max |phi - psi1| on the "
            f"boundary is {worst:.3e} (tol {tol:.1e})"
        )


def analytic_example1(x, y, t):
    """Known solution of the built-in trigonometric case: (t^3 + 2t + 4) sin x sin y."""
    return (t**3 + 2.0 * t + 4.0) * np.sin(x) * np.sin(y)


def _example1_source(x, y, t, u):
    # (6t^2 - 6t)/ln t has a removable singularity at t = 0; its limit is 0.
    if t == 0.0:
        g = 0.0
    else:
        g = (6.0 * t * t - 6.0 * t) / math.log(t)
    s = np.sin(x) * np.sin(y)
    poly = t**3 + 2.0 * t + 4.0
    return s * (2.0 * poly + g) - (poly * s) ** 2 + u * u


def example1() -> ProblemSpec:
    """Manufactured trigonometric case with weight Gamma(4 - beta).

    Exact solution (t^3 + 2t + 4) sin x sin y on (0, pi)^2, T = 1/2,
    homogeneous boundary, quadratic source nonlinearity.
    """
    return ProblemSpec(
        weight=lambda beta: math.gamma(4.0 - beta),
        L1=math.pi,
        L2=math.pi,
        T=0.5,
        psi1=lambda x, y: 4.0 * np.sin(x) * np.sin(y),
        psi2=lambda x, y: 2.0 * np.sin(x) * np.sin(y),
        phi=lambda x, y, t: 0.0 * x + 0.0 * y,
        source=_example1_source,
        lipschitz=12.0,
        analytic=analytic_example1,
        name="example1",
    )


def zero_case() -> ProblemSpec:
    """All data zero; the exact solution is identically zero."""
    return constant_case(0.0, name="zero")


def constant_case(c: float, name: str = "constant") -> ProblemSpec:
    """psi1 = phi = c, psi2 = 0, f = 0; the exact solution is u = c.

    Constants are annihilated by the memory term and by every stencil, so the
    discrete solution is u = c too, for any grid.
    """
    c = float(c)
    return ProblemSpec(
        weight=lambda beta: 1.0,
        L1=1.0,
        L2=1.0,
        T=1.0,
        psi1=lambda x, y: c + 0.0 * x + 0.0 * y,
        psi2=lambda x, y: 0.0 * x + 0.0 * y,
        phi=lambda x, y, t: c + 0.0 * x + 0.0 * y,
        source=lambda x, y, t, u: 0.0 * u,
        lipschitz=1.0,
        analytic=lambda x, y, t: c + 0.0 * x + 0.0 * y,
        name=name,
    )


CASE_NAMES = ("example1", "zero", "constant")


def case_by_name(name: str, constant_value: float = 1.0) -> ProblemSpec:
    """Resolve a built-in case name (part of the CLI config schema)."""
    if name == "example1":
        return example1()
    if name == "zero":
        return zero_case()
    if name == "constant":
        return constant_case(constant_value)
    raise InvalidProblemError(f"unknown case name {name!r}; known: {', '.join(CASE_NAMES)}")
