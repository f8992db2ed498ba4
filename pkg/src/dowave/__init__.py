"""ADI solver for the 2D distributed-order time-fractional wave equation.

Submodules are imported lazily so the command-line entry point can cap BLAS
thread counts via environment variables before numpy loads.
"""

__version__ = "0.1.0"

_EXPORTS = {
    "ProblemSpec": "model",
    "Discretization": "model",
    "example1": "model",
    "analytic_example1": "model",
    "zero_case": "model",
    "constant_case": "model",
    "case_by_name": "model",
    "CoefficientTable": "coefficients",
    "build_table": "coefficients",
    "quad_nodes": "coefficients",
    "caputo_a": "coefficients",
    "order_integral": "coefficients",
    "SolverState": "stepper",
    "init": "stepper",
    "step": "stepper",
    "run": "stepper",
    "error_norms": "analysis",
    "observed_order": "analysis",
    "relative_error_field": "analysis",
    "run_study": "analysis",
    "StudyReport": "analysis",
    "SCHEDULES": "analysis",
}

__all__ = ["__version__"] + sorted(_EXPORTS)


def __getattr__(name):
    if name in _EXPORTS:
        import importlib

        module = importlib.import_module(f".{_EXPORTS[name]}", __name__)
        return getattr(module, name)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
