"""Read-only figure generators for the solver CLI's CSV outputs.

These scripts consume field.csv / report.csv exactly as emitted by the
solver; they never recompute solver quantities.
"""

__version__ = "0.1.0"
