"""Infer LTL specifications from demonstrations in labeled MDPs."""

from ._core import (
    Dra,
    Formula,
    FormatError,
    Mdp,
    NonConvergence,
    ParseError,
    StateBudgetExceeded,
    Trajectory,
    cleaningworld,
    compile,
    complexity,
    eval_lasso,
    evaluate,
    generate_demos,
    infer,
    parse,
    render,
    slimchance,
    trajectories_from_json,
    trajectories_to_json,
)

__all__ = [
    "Dra",
    "Formula",
    "FormatError",
    "Mdp",
    "NonConvergence",
    "ParseError",
    "StateBudgetExceeded",
    "Trajectory",
    "cleaningworld",
    "compile",
    "complexity",
    "eval_lasso",
    "evaluate",
    "generate_demos",
    "infer",
    "parse",
    "render",
    "slimchance",
    "trajectories_from_json",
    "trajectories_to_json",
]
