"""Zero-sum games with incomplete information on both sides.

Thin wrapper over the C++ core: matrix games, concave envelopes, the
Mertens-Zamir system, finite repeated games and the Hamilton-Jacobi solver
for the differential-game embedding.
"""

import json

from ._core import (
    CflViolation,
    ConvergenceError,
    DeclaredBoundError,
    Error,
    HypothesisError,
    IsaacsViolation,
    LpError,
    NotConcaveError,
    ValidationError,
    cav,
    nonrevealing_value,
    parse_spec,
    simplex_grid,
    solve_embedding,
    solve_matrix_game,
    solve_mz,
    value_sequence,
)
from ._core import run as _run

EXIT_OK = 0
EXIT_CHECKS_FAILED = 1
EXIT_VALIDATION = 2
EXIT_CONVERGENCE = 3
EXIT_HYPOTHESIS = 4


def run(command, spec, out, verify=False):
    """Run one CLI command in-process; returns (exit_code, report dict)."""
    code, report = _run(command, str(spec), str(out), verify)
    return code, json.loads(report)


__all__ = [
    "CflViolation",
    "ConvergenceError",
    "DeclaredBoundError",
    "Error",
    "HypothesisError",
    "IsaacsViolation",
    "LpError",
    "NotConcaveError",
    "ValidationError",
    "cav",
    "nonrevealing_value",
    "parse_spec",
    "run",
    "simplex_grid",
    "solve_embedding",
    "solve_matrix_game",
    "solve_mz",
    "value_sequence",
]
