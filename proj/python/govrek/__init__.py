"""Governance-kernel reward shaping for sparse multi-agent RL."""

from govrek._govrek import (
    GovrekError,
    __version__,
    count_monotone_paths,
    dilemma_payoffs,
    eval_kernel,
    flatten_joint_action,
    plan_rounds,
    potential_shaping,
    render_field,
    run_experiment,
)

__all__ = [
    "GovrekError",
    "__version__",
    "count_monotone_paths",
    "dilemma_payoffs",
    "eval_kernel",
    "flatten_joint_action",
    "plan_rounds",
    "potential_shaping",
    "render_field",
    "run_experiment",
]
