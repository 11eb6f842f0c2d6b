"""Pseudospectral defocusing L2-critical NLS with I-method diagnostics.

Fields are complex numpy arrays of shape (G,) * n on the box [0, L)^n.
"""

from ._core import (
    CheckpointError,
    ConfigError,
    SolverAbort,
    apply_i_operator,
    energy,
    evolve,
    gaussian,
    interaction_action,
    load_checkpoint,
    mass,
    modified_energy,
    rough_field,
    run,
    save_checkpoint,
    sobolev_norm,
    sweep,
)

__all__ = [
    "CheckpointError",
    "ConfigError",
    "SolverAbort",
    "apply_i_operator",
    "energy",
    "evolve",
    "gaussian",
    "interaction_action",
    "load_checkpoint",
    "mass",
    "modified_energy",
    "rough_field",
    "run",
    "save_checkpoint",
    "sobolev_norm",
    "sweep",
]
