"""Exact-arithmetic classification of singular fibers of primitive cyclic
covering fibrations of ruled surfaces."""

from .diagram_core import (
    AbstractDiagram,
    Column,
    CoverParams,
    InadmissibleProfile,
    NoFibration,
    branch_point_count,
    derive_column,
    multiplicity_cap,
    validate_diagram,
)
from .sequence_engine import (
    Bounds,
    DiagramSequence,
    canonical_key,
    canonicalize,
    enumerate_root_diagrams,
    enumerate_sequences,
    expand_fork,
    fork_targets,
)
from .invariants import (
    InvariantVector,
    alpha_indices,
    epsilon_index,
    horikawa_index,
    local_signature,
    slope_coefficient,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
