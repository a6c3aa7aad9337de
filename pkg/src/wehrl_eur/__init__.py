"""Conditional Wehrl entropies and entropic uncertainty relations with quantum memory."""

__version__ = "0.1.0"

from ._kernels import BACKEND
from .errors import DomainError, NumericalError, PhysicalityError, PreconditionError, StructureError
from .symplectic import (
    GaussianState,
    ModePartition,
    amplifier,
    conditional_entropy,
    g,
    g_inverse,
    marginal,
    optimal_sequence_state,
    purification,
    random_state,
    symplectic_eigenvalues,
    two_mode_squeezed,
    validate,
    von_neumann_entropy,
    williamson,
)
from .wehrl import (
    EntropyBundle,
    conditional_wehrl_fock,
    conditional_wehrl_gaussian,
    husimi_gaussian,
    wehrl_entropy_gaussian,
)
from .quadrature import QuadratureGrid, build_grid
from .eur import (
    bipartite_bound,
    minimize_gap,
    saturation_sweep,
    tripartite_sweep,
    unconditioned_bound,
    verify_bipartite,
    verify_tripartite,
    witness,
)
