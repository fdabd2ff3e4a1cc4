"""Optimal quantum-erasure and which-alternative bounds for a qubit whose
environment is only partly accessible."""

from .bounds import (
    BoundReport,
    Pom,
    avg_predictability,
    avg_visibility,
    coherence_bound,
    coherence_bound_dim3,
    coherence_bound_subfidelity,
    distinguishability_bound,
    distinguishability_bound_piecewise,
    full_bounds,
    sub_fidelity,
    uhlmann_fidelity,
)
from .sampling import SeededStream
from .states import TripartitePureState, conditional_blocks, partial_trace

__version__ = "0.1.0"
