"""Acceptance suite: table reproduction, oracle equivalence, invariants.

Each test prints one PASS/FAIL line per criterion (run with -s to stream
them).  Expected total runtime is a few minutes, dominated by the finest
temporal row of the mixed tau/panel study.

Known red: the splitting-perturbation window [3, 5] is asserted as specified
and fails by measurement (the halving factor is ~5.7-6.8 because the
perturbation term scales like tau^3 |ln tau|); see notes in the repository
README and the superquadratic-decay test in test_reference.py.
"""

import math

import numpy as np
import pytest

from dowave import reference, stepper
from dowave.analysis import error_norms, run_study
from dowave.coefficients import build_table, order_integral
from dowave.model import Discretization, constant_case, example1, zero_case
from dowave.operators import TridiagonalSystem, thomas_solve

pytestmark = pytest.mark.acceptance

TABLE1 = {
    "err_inf": [0.0839, 0.0439, 0.0227, 0.0117, 0.0059],
    "err_l2": [0.1225, 0.0634, 0.0326, 0.0167, 0.0085],
    "order_inf": [None, 0.9344, 0.9515, 0.9526, 0.9877],
    "order_l2": [None, 0.9502, 0.9596, 0.9650, 0.9743],
}
TABLE2 = {
    "err_inf": [0.0093, 0.0024, 6.0481e-4],
    "order_inf": [None, 1.9542, 1.9885],
    "order_l2": [None, 1.9678, 1.9762],
}
TABLE3 = {
    "err_inf": [0.4602, 0.1195, 0.0301, 0.0075],
    "order_inf": [None, 1.9453, 1.9892, 2.0048],
    "order_l2": [None, 2.0978, 1.9872, 1.9932],
}


def report(name: str, passed: bool, detail: str) -> None:
    print(f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}")


def _check_errors(rows, expected, attr, rel_tol):
    worst = 0.0
    for row, want in zip(rows, expected):
        got = getattr(row, attr)
        worst = max(worst, abs(got - want) / want)
    return worst, worst <= rel_tol


def _check_orders(rows, expected, attr, abs_tol):
    worst = 0.0
    for row, want in zip(rows, expected):
        if want is None:
            continue
        worst = max(worst, abs(getattr(row, attr) - want))
    return worst, worst <= abs_tol


def test_table1_temporal_refinement():
    rep = run_study("example1", "table1")
    e1, ok1 = _check_errors(rep.rows, TABLE1["err_inf"], "err_inf", 0.05)
    e2, ok2 = _check_errors(rep.rows, TABLE1["err_l2"], "err_l2", 0.05)
    o1, ok3 = _check_orders(rep.rows, TABLE1["order_inf"], "order_inf", 0.05)
    o2, ok4 = _check_orders(rep.rows, TABLE1["order_l2"], "order_l2", 0.05)
    passed = ok1 and ok2 and ok3 and ok4
    report(
        "table1-reproduction",
        passed,
        f"max rel err dev inf={e1:.2%} l2={e2:.2%} (tol 5%); "
        f"max order dev inf={o1:.4f} l2={o2:.4f} (tol 0.05)",
    )
    assert passed


def test_table2_mixed_tau_and_panel_refinement():
    rep = run_study("example1", "table2")
    e1, ok1 = _check_errors(rep.rows, TABLE2["err_inf"], "err_inf", 0.05)
    o1, ok2 = _check_orders(rep.rows, TABLE2["order_inf"], "order_inf", 0.1)
    o2, ok3 = _check_orders(rep.rows, TABLE2["order_l2"], "order_l2", 0.1)
    passed = ok1 and ok2 and ok3
    report(
        "table2-rows-1-3",
        passed,
        f"max rel err dev inf={e1:.2%} (tol 5%); max order dev inf={o1:.4f} l2={o2:.4f} (tol 0.1)",
    )
    assert passed


def test_table3_matched_refinement():
    rep = run_study("example1", "table3")
    e1, ok1 = _check_errors(rep.rows, TABLE3["err_inf"], "err_inf", 0.05)
    o1, ok2 = _check_orders(rep.rows, TABLE3["order_inf"], "order_inf", 0.1)
    o2, ok3 = _check_orders(rep.rows, TABLE3["order_l2"], "order_l2", 0.1)
    passed = ok1 and ok2 and ok3
    report(
        "table3-rows-1-4",
        passed,
        f"max rel err dev inf={e1:.2%} (tol 5%); max order dev inf={o1:.4f} l2={o2:.4f} (tol 0.1)",
    )
    assert passed


def test_oracle_equivalence_sweeps_vs_dense():
    spec = example1()
    worst = 0.0
    for grid in ((9, 9), (16, 16), (16, 12)):
        disc = Discretization.of(spec, grid[0], grid[1], 10, 4)
        state = stepper.init(spec, disc)
        for _ in range(disc.N):
            rhs = stepper.assemble_rhs(state)
            dense = reference.dense_factored_step(state, rhs)
            new = stepper.y_sweep(state, stepper.x_sweep(state, rhs))
            worst = max(worst, float(np.max(np.abs(new[1:-1, 1:-1] - dense))))
    passed = worst <= 1e-10
    report("oracle-equivalence", passed, f"max |sweeps - dense| = {worst:.3e} over 10 steps (tol 1e-10)")
    assert passed


def test_splitting_perturbation_scaling():
    # Criterion as specified: the trajectory gap at T on an 8x8 grid shrinks
    # by a factor in [3, 5] per tau halving.  Measured behavior follows the
    # tau^3 |ln tau| size of the perturbation term, i.e. factors of
    # 8 |ln tau| / |ln(tau/2)| in (5, 8); the window cannot be met.
    spec = example1()
    diffs = []
    for n in (8, 16):
        disc = Discretization.of(spec, 8, 8, n, 8)
        adi = stepper.run(spec, disc)
        unsplit = reference.run_unsplit(spec, disc)
        diffs.append(float(np.max(np.abs(adi - unsplit))))
    ratio = diffs[0] / diffs[1]
    passed = 3.0 <= ratio <= 5.0
    report(
        "splitting-perturbation",
        passed,
        f"halving factor = {ratio:.3f} (specified window [3, 5]; "
        f"tau^3|ln tau| scaling predicts {8 * math.log(16) / math.log(32):.2f})",
    )
    assert passed, (
        f"measured halving factor {ratio:.3f} is outside the specified [3, 5] window; "
        "the gap decays like tau^3 |ln tau| (superquadratically), so the window is "
        "unattainable for the faithful scheme -- see README and notes"
    )


def test_invariant_suite():
    spec = example1()
    failures = []

    # Coefficient monotonicity/positivity across full production-size tables.
    for (N, K) in ((80, 160), (200, 32)):
        table = build_table(spec, Discretization.of(spec, 4, 4, N, K))
        if not (np.all(table.a > 0.0) and np.all(table.a[:, :-1] > table.a[:, 1:])):
            failures.append(f"a-monotonicity N={N} K={K}")
        if not np.all(table.W > 0.0):
            failures.append(f"W-positivity N={N} K={K}")
        tele = max(
            abs(table.W[: n - 1].sum() - (table.mu - table.s[n - 1] / table.tau)) / table.mu
            for n in range(2, N + 1)
        )
        if tele > 1e-12:
            failures.append(f"telescoping dev {tele:.2e} N={N} K={K}")
        s1 = abs(table.s[0] - table.tau * table.mu) / (table.tau * table.mu)
        if s1 > 1e-14:
            failures.append(f"s1 identity dev {s1:.2e}")

    # Zero / constant fixed points.
    z = stepper.run(zero_case(), Discretization.of(zero_case(), 6, 6, 5, 2))
    if np.max(np.abs(z)) > 1e-12:
        failures.append("zero fixed point")
    c = stepper.run(constant_case(3.5), Discretization.of(constant_case(3.5), 6, 5, 7, 3))
    if np.max(np.abs(c - 3.5)) > 1e-12:
        failures.append("constant fixed point")

    # Thomas vs dense elimination on 1000 random dominant systems.
    rng = np.random.default_rng(1234)
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(2, 201))
        lower = rng.uniform(-1, 1, n - 1)
        upper = rng.uniform(-1, 1, n - 1)
        mags = np.zeros(n)
        mags[:-1] += np.abs(upper)
        mags[1:] += np.abs(lower)
        diag = (mags + rng.uniform(0.1, 2.0, n)) * rng.choice([-1.0, 1.0], n)
        rhs = rng.uniform(-1, 1, n)
        got = thomas_solve(TridiagonalSystem(lower, diag, upper, rhs))
        dense = np.diag(diag) + np.diag(lower, -1) + np.diag(upper, 1)
        want = reference.gaussian_solve(dense, rhs)
        worst = max(worst, float(np.max(np.abs(got - want)) / max(np.max(np.abs(want)), 1e-300)))
    if worst > 1e-10:
        failures.append(f"thomas vs dense dev {worst:.2e}")

    # Mid-point quadrature observed order 2.0 +- 0.1.
    exact = reference.precise_order_integral(spec.weight)
    for k in (16, 32, 64):
        e1 = abs(order_integral(spec.weight, k) - exact)
        e2 = abs(order_integral(spec.weight, 2 * k) - exact)
        order = math.log2(e1 / e2)
        if not 1.9 <= order <= 2.1:
            failures.append(f"quadrature order {order:.3f} at K={k}")

    passed = not failures
    report("invariant-suite", passed, "all identities hold" if passed else "; ".join(failures))
    assert passed, failures


def test_stability_probe():
    # Empirical unconditional-stability restatement: a fixed interior
    # perturbation of psi1 with amplitude 1e-3 must change the final field by
    # C * 1e-3 with the same C (within a factor 2) across tau refinements.
    spec = example1()
    M, K, eps = 32, 16, 1e-3
    rng = np.random.default_rng(7)
    bump = rng.uniform(-1.0, 1.0, (M + 1, M + 1)) * eps
    bump[0, :] = bump[-1, :] = bump[:, 0] = bump[:, -1] = 0.0
    h = spec.L1 / M

    def perturbed_psi1(x, y):
        i = np.rint(np.asarray(x) / h).astype(int)
        j = np.rint(np.asarray(y) / h).astype(int)
        return spec.psi1(x, y) + bump[i, j]

    import dataclasses

    perturbed = dataclasses.replace(spec, psi1=perturbed_psi1)
    responses = []
    for N in (20, 40, 80):  # tau = 1/40, 1/80, 1/160
        disc = Discretization.of(spec, M, M, N, K)
        base = stepper.run(spec, disc)
        shifted = stepper.run(perturbed, disc)
        responses.append(float(np.max(np.abs(shifted - base))) / eps)
    spread = max(responses) / min(responses)
    passed = spread <= 2.0
    report(
        "stability-probe",
        passed,
        f"response constants {['%.4f' % c for c in responses]}, spread x{spread:.3f} (tol x2)",
    )
    assert passed
