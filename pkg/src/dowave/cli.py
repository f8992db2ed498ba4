"""Command-line interface: solve one case, run a study, or verify the build.

The config file is JSON with a strict key schema (unknown keys are errors,
since a silently ignored typo can corrupt a convergence study):

    case                "example1" | "zero" | "constant" | inline object
    constant_value      value for the constant case (default 1.0)
    M1 M2 N K           grid/step counts (solve)
    schedule            "table1" | "table2" | "table2-full" | "table3" |
                        "table3-full" | [[M1, M2, N, K], ...]   (study)
    memory_budget_gib   history-buffer budget, default 4.0
    output              {"field_csv": ..., "summary_json": ...,
                         "report_json": ..., "report_csv": ...}

An inline case object carries expressions in the variables noted: weight
(beta), psi1/psi2 (x, y), phi (x, y, t), source (x, y, t, u), optional
analytic (x, y, t), numbers L1, L2, T, and an optional lipschitz (default
1.0).  Expressions are parsed with sympy, so polynomial/trigonometric data
needs no code changes.

Exit codes: 0 success, 1 verification failure, 2 config error, 3 solver
failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

from . import __version__

_OUTPUT_DEFAULTS = {
    "field_csv": "field.csv",
    "summary_json": "summary.json",
    "report_json": "report.json",
    "report_csv": "report.csv",
}
_TOP_KEYS = {"case", "constant_value", "M1", "M2", "N", "K", "schedule", "memory_budget_gib", "output"}
_CASE_KEYS = {"name", "weight", "psi1", "psi2", "phi", "source", "analytic", "L1", "L2", "T", "lipschitz"}
_FMT = "{:.17g}".format


def _fail_config(message: str):
    print(f"config error: {message}", file=sys.stderr)
    raise SystemExit(2)


def _load_config(path: str) -> dict:
    try:
        raw = Path(path).read_text()
    except OSError as exc:
        _fail_config(f"cannot read {path}: {exc}")
    try:
        cfg = json.loads(raw)
    except json.JSONDecodeError as exc:
        _fail_config(f"{path} is not valid JSON: {exc}")
    if not isinstance(cfg, dict):
        _fail_config(f"{path} must contain a JSON object")
    for key in cfg:
        if key not in _TOP_KEYS:
            _fail_config(f"unknown key {key!r}")
    out = cfg.get("output", {})
    if not isinstance(out, dict):
        _fail_config("'output' must be an object")
    for key in out:
        if key not in _OUTPUT_DEFAULTS:
            _fail_config(f"unknown key 'output.{key}'")
    if isinstance(cfg.get("case"), dict):
        for key in cfg["case"]:
            if key not in _CASE_KEYS:
                _fail_config(f"unknown key 'case.{key}'")
    return cfg


def _require(cfg: dict, key: str):
    if key not in cfg:
        _fail_config(f"missing required key {key!r}")
    return cfg[key]


def _positive_int(cfg: dict, key: str) -> int:
    value = _require(cfg, key)
    if not isinstance(value, int) or isinstance(value, bool) or value < 1:
        _fail_config(f"{key!r} must be a positive integer, got {value!r}")
    return value


def _compile_expr(text, variables, key: str, scalar: bool = False):
    """Compile a config expression (or plain number) into a callable."""
    import sympy

    # Bind the declared variable names explicitly; otherwise sympy resolves
    # names like "beta" to special functions instead of symbols.
    names = variables.replace(",", " ").split()
    symbols = [sympy.Symbol(name) for name in names]
    try:
        expr = sympy.sympify(text, locals=dict(zip(names, symbols)))
    except (sympy.SympifyError, TypeError, SyntaxError) as exc:
        _fail_config(f"case.{key}: cannot parse expression {text!r}: {exc}")
    free = {str(s) for s in expr.free_symbols}
    if not free <= set(names):
        _fail_config(f"case.{key}: unknown variables {sorted(free - set(names))} (allowed: {names})")
    return sympy.lambdify(symbols, expr, modules=("math" if scalar else "numpy"))


def _number(cfg: dict, key: str, default=None) -> float:
    if key not in cfg:
        if default is None:
            _fail_config(f"missing required key 'case.{key}'")
        return default
    value = cfg[key]
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    import sympy

    try:
        return float(sympy.sympify(value))
    except (sympy.SympifyError, TypeError, ValueError):
        _fail_config(f"case.{key} must be a number, got {value!r}")


def _build_case(cfg: dict):
    from .model import ProblemSpec, case_by_name

    case = _require(cfg, "case")
    if isinstance(case, str):
        return case_by_name(case, constant_value=float(cfg.get("constant_value", 1.0)))
    if not isinstance(case, dict):
        _fail_config(f"'case' must be a name or an object, got {type(case).__name__}")
    analytic = case.get("analytic")
    return ProblemSpec(
        weight=_compile_expr(_require(case, "weight"), "beta", "weight", scalar=True),
        L1=_number(case, "L1"),
        L2=_number(case, "L2"),
        T=_number(case, "T"),
        psi1=_compile_expr(_require(case, "psi1"), "x, y", "psi1"),
        psi2=_compile_expr(_require(case, "psi2"), "x, y", "psi2"),
        phi=_compile_expr(_require(case, "phi"), "x, y, t", "phi"),
        source=_compile_expr(_require(case, "source"), "x, y, t, u", "source"),
        lipschitz=_number(case, "lipschitz", 1.0),
        analytic=None if analytic is None else _compile_expr(analytic, "x, y, t", "analytic"),
        name=str(case.get("name", "inline")),
    )


def _check_memory(cfg: dict, rows) -> None:
    from .analysis import history_bytes

    budget_gib = float(cfg.get("memory_budget_gib", 4.0))
    budget = budget_gib * 2**30
    for (M1, M2, N, K) in rows:
        need = history_bytes(M1, M2, N)
        if need > budget:
            _fail_config(
                f"row (M1={M1}, M2={M2}, N={N}, K={K}) needs N*(M1-1)*(M2-1)*8 = "
                f"{need} bytes of history ({need / 2**30:.2f} GiB), over the "
                f"{budget_gib:.2f} GiB budget; raise 'memory_budget_gib' to proceed"
            )


def _out_path(out_dir: str, cfg: dict, kind: str) -> Path:
    name = cfg.get("output", {}).get(kind, _OUTPUT_DEFAULTS[kind])
    directory = Path(out_dir)
    directory.mkdir(parents=True, exist_ok=True)
    return directory / name


def cmd_solve(args) -> int:
    import numpy as np

    from . import stepper
    from .analysis import error_norms, relative_error_field
    from .errors import DowaveError
    from .model import Discretization, eval_on_grid

    cfg = _load_config(args.config)
    spec = _build_case(cfg)
    m1, m2, n, k = (_positive_int(cfg, key) for key in ("M1", "M2", "N", "K"))
    _check_memory(cfg, [(m1, m2, n, k)])

    try:
        disc = Discretization.of(spec, m1, m2, n, k)
        t0 = time.perf_counter()
        state = stepper.init(spec, disc)
        for _ in range(disc.N):
            stepper.step(state)
        seconds = time.perf_counter() - t0
    except DowaveError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 3

    field = state.current
    exact = None
    if spec.analytic is not None:
        exact = eval_on_grid(spec.analytic, disc.x, disc.y, spec.T)

    field_path = _out_path(args.out, cfg, "field_csv")
    header = ["x", "y", "u_numeric"]
    columns = [
        np.repeat(disc.x, disc.M2 + 1),
        np.tile(disc.y, disc.M1 + 1),
        field.ravel(),
    ]
    summary = {
        "case": spec.name,
        "M1": disc.M1, "M2": disc.M2, "N": disc.N, "K": disc.K,
        "h1": disc.h1, "h2": disc.h2, "tau": disc.tau, "dbeta": disc.dbeta,
        "mu": state.table.mu,
        "seconds": seconds,
    }
    if exact is not None:
        header += ["u_exact", "abs_err", "rel_err"]
        columns += [
            exact.ravel(),
            np.abs(exact - field).ravel(),
            relative_error_field(field, exact).ravel(),
        ]
        e_inf, e_l2 = error_norms(field, exact, disc)
        summary["err_inf"] = e_inf
        summary["err_l2"] = e_l2

    with open(field_path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in zip(*columns):
            fh.write(",".join(_FMT(v) for v in row) + "\n")

    summary_path = _out_path(args.out, cfg, "summary_json")
    summary["field_csv"] = str(field_path)
    summary_path.write_text(json.dumps(summary, indent=2) + "\n")
    print(f"wrote {field_path} and {summary_path}")
    if "err_inf" in summary:
        print(f"err_inf={summary['err_inf']:.6g} err_l2={summary['err_l2']:.6g} mu={summary['mu']:.6g}")
    return 0


def _print_report(report) -> None:
    head = f"{'tau':>12} {'h':>12} {'dbeta':>10} {'err_inf':>12} {'order':>8} {'err_l2':>12} {'order':>8} {'seconds':>9}"
    print(head)
    for r in report.rows:
        if r.error:
            print(f"{r.tau:>12.6g} {r.h1:>12.6g} {r.dbeta:>10.6g}  failed: {r.error}")
            continue
        o_inf = f"{r.order_inf:8.4f}" if r.order_inf is not None else f"{'-':>8}"
        o_l2 = f"{r.order_l2:8.4f}" if r.order_l2 is not None else f"{'-':>8}"
        print(
            f"{r.tau:>12.6g} {r.h1:>12.6g} {r.dbeta:>10.6g} {r.err_inf:>12.4e} {o_inf} "
            f"{r.err_l2:>12.4e} {o_l2} {r.seconds:>9.2f}"
        )


def cmd_study(args) -> int:
    from .analysis import SCHEDULES, run_study
    from .errors import DowaveError

    cfg = _load_config(args.config)
    spec = _build_case(cfg)
    schedule = _require(cfg, "schedule")
    if isinstance(schedule, str):
        if schedule not in SCHEDULES:
            _fail_config(f"unknown schedule {schedule!r}; known: {', '.join(sorted(SCHEDULES))}")
        rows = SCHEDULES[schedule]
    elif isinstance(schedule, list) and schedule:
        rows = []
        for i, entry in enumerate(schedule):
            if (
                not isinstance(entry, list)
                or len(entry) != 4
                or not all(isinstance(v, int) and v > 0 for v in entry)
            ):
                _fail_config(f"schedule[{i}] must be [M1, M2, N, K] with positive integers")
            rows.append(tuple(entry))
    else:
        _fail_config("'schedule' must be a known name or a non-empty list of rows")
    _check_memory(cfg, rows)

    try:
        report = run_study(spec, rows)
    except DowaveError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 3

    json_path = _out_path(args.out, cfg, "report_json")
    csv_path = _out_path(args.out, cfg, "report_csv")
    json_path.write_text(report.to_json_text() + "\n")
    csv_path.write_text(report.to_csv_text())
    _print_report(report)
    print(f"wrote {json_path} and {csv_path}")
    return 0 if not any(r.error for r in report.rows) else 3


def _verify_checks(scale: str):
    """Yield (name, passed, detail) for the oracle suite."""
    import numpy as np

    from . import reference, stepper
    from .coefficients import build_table
    from .model import Discretization, constant_case, example1, zero_case
    from .operators import TridiagonalSystem, apply_dxx, apply_dxxdyy, apply_dyy, thomas_solve

    full = scale == "full"
    rng = np.random.default_rng(20240817)

    # Coefficient identities on a representative build.
    spec = example1()
    disc = Discretization.of(spec, 8, 8, 40, 16)
    table = build_table(spec, disc)
    monotone = bool(np.all(table.a[:, :-1] > table.a[:, 1:]) and np.all(table.a > 0.0))
    positive = bool(np.all(table.W > 0.0) and np.all(table.s > 0.0))
    tele = max(
        abs(table.W[: n - 1].sum() - (table.mu - table.s[n - 1] / table.tau)) / table.mu
        for n in range(2, disc.N + 1)
    )
    s1 = abs(table.s[0] - table.tau * table.mu) / (table.tau * table.mu)
    yield ("coefficient-monotonicity", monotone and positive, "a decreasing/positive, W and s positive")
    yield ("coefficient-telescoping", tele <= 1e-12, f"measured={tele:.3e} tol=1e-12")
    yield ("coefficient-s1-identity", s1 <= 1e-14, f"measured={s1:.3e} tol=1e-14")

    # Thomas vs dense elimination on random dominant systems.
    count = 1000 if full else 200
    top_n = 200 if full else 60
    worst = 0.0
    for _ in range(count):
        n = int(rng.integers(2, top_n + 1))
        lower = rng.uniform(-1.0, 1.0, n - 1)
        upper = rng.uniform(-1.0, 1.0, n - 1)
        margin = rng.uniform(0.1, 2.0, n)
        mags = np.zeros(n)
        mags[:-1] += np.abs(upper)
        mags[1:] += np.abs(lower)
        diag = (mags + margin) * rng.choice([-1.0, 1.0], n)
        rhs = rng.uniform(-1.0, 1.0, n)
        x = thomas_solve(TridiagonalSystem(lower, diag, upper, rhs))
        dense = np.diag(diag) + np.diag(lower, -1) + np.diag(upper, 1)
        ref = reference.gaussian_solve(dense, rhs)
        worst = max(worst, float(np.max(np.abs(x - ref)) / max(np.max(np.abs(ref)), 1e-30)))
    yield ("thomas-vs-dense", worst <= 1e-10, f"{count} systems, measured={worst:.3e} tol=1e-10")

    # Sweep-based steps vs the dense one-shot factored solve.
    grid = 16 if full else 8
    steps = 10 if full else 5
    disc = Discretization.of(spec, grid, grid, steps, 4)
    state = stepper.init(spec, disc)
    worst_diff = worst_res = 0.0
    for _ in range(steps):
        rhs = stepper.assemble_rhs(state)
        dense_u = reference.dense_factored_step(state, rhs)
        new_field = stepper.y_sweep(state, stepper.x_sweep(state, rhs))
        worst_diff = max(worst_diff, float(np.max(np.abs(new_field[1:-1, 1:-1] - dense_u))))
        mu = state.table.mu
        lhs = (
            mu * new_field[1:-1, 1:-1]
            - 0.5 * (apply_dxx(new_field, disc.h1) + apply_dyy(new_field, disc.h2))[1:-1, 1:-1]
            + apply_dxxdyy(new_field, disc.h1, disc.h2)[1:-1, 1:-1] / (4.0 * mu)
        )
        worst_res = max(worst_res, float(np.max(np.abs(lhs - rhs))) / (1.0 + float(np.max(np.abs(rhs)))))
    yield ("adi-vs-dense-factored", worst_diff <= 1e-10, f"{grid}x{grid} grid, measured={worst_diff:.3e} tol=1e-10")
    yield ("one-shot-residual", worst_res <= 1e-10, f"measured={worst_res:.3e} tol=1e-10 relative to 1+|rhs|")

    # Splitting perturbation decays superquadratically when tau is halved
    # (the added term is of size ~ tau^3 |ln tau|).
    diffs = []
    for n in (8, 16):
        d = Discretization.of(spec, 8, 8, n, 8)
        adi = stepper.run(spec, d)
        unsplit = reference.run_unsplit(spec, d)
        diffs.append(float(np.max(np.abs(adi - unsplit))))
    ratio = diffs[0] / diffs[1]
    yield ("splitting-perturbation", 4.0 <= ratio <= 8.0, f"halving ratio={ratio:.3f} expected in [4, 8]")

    # Mid-point order integral converges at second order.
    from .coefficients import order_integral

    exact = reference.precise_order_integral(spec.weight)
    orders = []
    for k in (16, 32, 64):
        e1 = abs(order_integral(spec.weight, k) - exact)
        e2 = abs(order_integral(spec.weight, 2 * k) - exact)
        orders.append(np.log2(e1 / e2))
    ok = all(1.9 <= o <= 2.1 for o in orders)
    yield ("quadrature-order", ok, f"observed={['%.4f' % o for o in orders]} expected 2.0+-0.1")

    # Zero and constant fixed points.
    worst_fp = 0.0
    for case, target in ((zero_case(), 0.0), (constant_case(3.5), 3.5)):
        d = Discretization.of(case, 5, 7, 6, 3)
        final = stepper.run(case, d)
        worst_fp = max(worst_fp, float(np.max(np.abs(final - target))))
    yield ("fixed-points", worst_fp <= 1e-12, f"measured={worst_fp:.3e} tol=1e-12")


def cmd_verify(args) -> int:
    failures = 0
    for name, passed, detail in _verify_checks(args.scale):
        print(f"{'PASS' if passed else 'FAIL'} {name}: {detail}")
        failures += 0 if passed else 1
    if failures:
        print(f"{failures} check(s) failed")
        return 1
    print("all checks passed")
    return 0


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dowave", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "--threads",
        type=int,
        metavar="N",
        help="cap BLAS/OpenMP threads (applied before numerical modules load)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="run one case and write field.csv + summary.json")
    p_solve.add_argument("--config", required=True, help="path to the JSON config")
    p_solve.add_argument("--out", required=True, help="output directory")
    p_solve.set_defaults(func=cmd_solve)

    p_study = sub.add_parser("study", help="run a refinement schedule and write report.json/.csv")
    p_study.add_argument("--config", required=True, help="path to the JSON config")
    p_study.add_argument("--out", required=True, help="output directory")
    p_study.set_defaults(func=cmd_study)

    p_verify = sub.add_parser("verify", help="run the oracle suite and report pass/fail")
    p_verify.add_argument("--scale", choices=("small", "full"), default="small")
    p_verify.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.threads is not None:
        if args.threads < 1:
            _fail_config("--threads must be >= 1")
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ.setdefault(var, str(args.threads))
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
