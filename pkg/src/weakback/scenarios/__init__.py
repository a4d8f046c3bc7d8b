"""End-to-end case studies: Hardy's paradox and double-slit weak trajectories."""

from .hardy import (
    HardyWorkspace,
    hardy_backaction_experiment,
    hardy_build,
    hardy_noncommutativity,
    hardy_weak_values,
)
from .twoslit import (
    TrajectoryBundle,
    TwoSlitField,
    reconstruct_trajectories,
    twoslit_build,
    twoslit_pointer_check,
)

__all__ = [
    "HardyWorkspace",
    "TrajectoryBundle",
    "TwoSlitField",
    "hardy_backaction_experiment",
    "hardy_build",
    "hardy_noncommutativity",
    "hardy_weak_values",
    "reconstruct_trajectories",
    "twoslit_build",
    "twoslit_pointer_check",
]
