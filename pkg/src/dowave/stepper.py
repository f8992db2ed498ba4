"""ADI time-marching engine.

Each step to time level m solves the factored equation

    (sqrt(mu) I - dxx/(2 sqrt(mu))) (sqrt(mu) I - dyy/(2 sqrt(mu))) u^m = G,

where G collects the mirrored factored operator applied to u^(m-1), the
weighted sum of all past solution differences, the initial-velocity term,
and the source evaluated explicitly at the previous level.  The solve is
split into a sweep of independent tridiagonal systems along x (giving the
intermediate unknown) and then along y.

Steps are strictly sequential; within a step, rows/columns of a sweep are
independent and solved as one batched elimination.
"""

from __future__ import annotations

from typing import Callable, Optional

import numpy as np

from . import operators
from .coefficients import CoefficientTable, build_table
from .errors import DowaveError, SolverError
from .model import (
    Discretization,
    ProblemSpec,
    check_compatibility,
    eval_on_grid,
    require_finite,
)

__all__ = ["HistoryBuffer", "SolverState", "init", "assemble_rhs", "x_sweep", "y_sweep", "step", "run"]


class HistoryBuffer:
    """Append-only store of interior solution differences u^k - u^(k-1).

    Backed by one preallocated (N, interior-size) array so the per-step
    memory sum is a single matrix-vector product.
    """

    def __init__(self, capacity: int, interior_size: int):
        self._data = np.zeros((capacity, interior_size))
        self._count = 0

    def __len__(self) -> int:
        return self._count

    def append(self, diff_flat: np.ndarray) -> None:
        if self._count >= self._data.shape[0]:
            raise IndexError("history buffer is full")
        self._data[self._count] = diff_flat
        self._count += 1

    @property
    def matrix(self) -> np.ndarray:
        """View of the stored differences, shape (len(self), interior size)."""
        return self._data[: self._count]


class SolverState:
    """Mutable per-run state: current level, history, cached sweep factors."""

    def __init__(self, spec: ProblemSpec, disc: Discretization, table: Optional[CoefficientTable] = None):
        check_compatibility(spec, disc)
        self.spec = spec
        self.disc = disc
        self.table = table if table is not None else build_table(spec, disc)
        self.n = 0

        x, y = disc.x, disc.y
        self._xi = x[1:-1][:, None]      # interior abscissae, column
        self._yj = y[1:-1][None, :]      # interior ordinates, row
        self._psi2_int = eval_on_grid(spec.psi2, x, y)[1:-1, 1:-1]

        current = eval_on_grid(spec.psi1, x, y)
        boundary = self._boundary_field(0.0)
        current[0, :] = boundary[0, :]
        current[-1, :] = boundary[-1, :]
        current[:, 0] = boundary[:, 0]
        current[:, -1] = boundary[:, -1]
        self.current = require_finite(current, "initial field")

        ni = (disc.M1 - 1) * (disc.M2 - 1)
        self.history = HistoryBuffer(disc.N, ni)

        mu = self.table.mu
        self._factors_x = operators.factor_tridiagonal(*operators.sweep_matrix(mu, disc.h1, disc.M1 - 1))
        self._factors_y = operators.factor_tridiagonal(*operators.sweep_matrix(mu, disc.h2, disc.M2 - 1))

    @property
    def t(self) -> float:
        return self.disc.time(self.n)

    def _boundary_field(self, t: float) -> np.ndarray:
        """Full-size array whose boundary ring holds phi(., ., t); interior is zero."""
        disc = self.disc
        out = np.zeros((disc.M1 + 1, disc.M2 + 1))
        x, y = disc.x, disc.y
        out[:, 0] = np.broadcast_to(np.asarray(self.spec.phi(x, y[0], t), dtype=float), x.shape)
        out[:, -1] = np.broadcast_to(np.asarray(self.spec.phi(x, y[-1], t), dtype=float), x.shape)
        out[0, :] = np.broadcast_to(np.asarray(self.spec.phi(x[0], y, t), dtype=float), y.shape)
        out[-1, :] = np.broadcast_to(np.asarray(self.spec.phi(x[-1], y, t), dtype=float), y.shape)
        return out

    def commit_level(self, new_field: np.ndarray) -> None:
        """Finalize one time level: record its difference and advance n."""
        diff = new_field[1:-1, 1:-1] - self.current[1:-1, 1:-1]
        self.history.append(diff.ravel())
        self.current = new_field
        self.n += 1


def init(spec: ProblemSpec, disc: Discretization) -> SolverState:
    """State at n = 0: psi1 on the interior, phi(., ., 0) on the boundary."""
    return SolverState(spec, disc)


def assemble_rhs(state: SolverState, factored: bool = True) -> np.ndarray:
    """Right-hand side for the step to level n+1, on interior nodes.

    With factored=True this is the mirrored factored operator applied to the
    current level (including the mixed-stencil term); factored=False omits
    the mixed term and yields the right side of the unsplit scheme, which the
    reference oracle consumes.
    """
    disc, table = state.disc, state.table
    u = state.current
    mu = table.mu
    m = state.n + 1
    if m > disc.N:
        raise SolverError(m, "attempted to step past the final time level")

    dxx = operators.apply_dxx(u, disc.h1)
    dyy = operators.apply_dyy(u, disc.h2)
    rhs = mu * u[1:-1, 1:-1] + 0.5 * (dxx[1:-1, 1:-1] + dyy[1:-1, 1:-1])
    if factored:
        rhs += operators.apply_dxxdyy(u, disc.h1, disc.h2)[1:-1, 1:-1] / (4.0 * mu)

    if m >= 2:
        # Lag weights paired with differences d^1..d^(m-1); ascending k.
        weights = table.W[m - 2 :: -1]
        rhs += weights.dot(state.history.matrix).reshape(rhs.shape)

    rhs += table.s[m - 1] * state._psi2_int
    rhs += np.broadcast_to(
        np.asarray(state.spec.source(state._xi, state._yj, state.t, u[1:-1, 1:-1]), dtype=float),
        rhs.shape,
    )
    return rhs


def x_sweep(state: SolverState, rhs: np.ndarray) -> np.ndarray:
    """Solve the x-direction systems, one per interior j, for the intermediate field.

    The intermediate boundary columns are defined through the boundary data
    of the *new* time level: the y-direction sweep operator applied to
    phi(., ., t_{n+1}) along the x-boundaries.
    """
    disc = state.disc
    mu = state.table.mu
    rmu = np.sqrt(mu)
    t_new = disc.time(state.n + 1)
    b = state._boundary_field(t_new)

    u_star = np.zeros_like(state.current)
    dyy_b = operators.apply_dyy(b, disc.h2)
    for i in (0, -1):
        u_star[i, 1:-1] = rmu * b[i, 1:-1] - dyy_b[i, 1:-1] / (2.0 * rmu)

    coupling_x = 1.0 / (2.0 * rmu * disc.h1 * disc.h1)
    adjusted = rhs.copy()
    adjusted[0, :] += coupling_x * u_star[0, 1:-1]
    adjusted[-1, :] += coupling_x * u_star[-1, 1:-1]
    u_star[1:-1, 1:-1] = operators.solve_factored(state._factors_x, adjusted)
    return u_star


def y_sweep(state: SolverState, u_star: np.ndarray) -> np.ndarray:
    """Solve the y-direction systems, set phi on the boundary, advance the state."""
    disc = state.disc
    mu = state.table.mu
    rmu = np.sqrt(mu)
    t_new = disc.time(state.n + 1)
    b = state._boundary_field(t_new)

    coupling_y = 1.0 / (2.0 * rmu * disc.h2 * disc.h2)
    rhs = u_star[1:-1, 1:-1].T.copy()          # unknown index j leads, batch over i
    rhs[0, :] += coupling_y * b[1:-1, 0]
    rhs[-1, :] += coupling_y * b[1:-1, -1]
    interior = operators.solve_factored(state._factors_y, rhs).T

    new_field = b
    new_field[1:-1, 1:-1] = interior
    require_finite(new_field, f"solution at level {state.n + 1}")
    state.commit_level(new_field)
    return new_field


def step(state: SolverState) -> np.ndarray:
    """Advance one time level and return the new field."""
    rhs = assemble_rhs(state)
    u_star = x_sweep(state, rhs)
    return y_sweep(state, u_star)


def run(
    spec: ProblemSpec,
    disc: Discretization,
    observer: Optional[Callable[[int, float, np.ndarray], None]] = None,
) -> np.ndarray:
    """March all N steps; the observer sees (n, t_n, read-only field) after each."""
    state = init(spec, disc)
    for n in range(1, disc.N + 1):
        try:
            field = step(state)
        except SolverError:
            raise
        except DowaveError as exc:
            raise SolverError(n, str(exc)) from exc
        if observer is not None:
            view = field.view()
            view.flags.writeable = False
            observer(n, state.t, view)
    return state.current
