"""Weak values, Gaussian-pointer weak measurement and its back-action on
post-selection."""

from .exceptions import (
    InvalidPartition,
    NeverPostSelected,
    NodePoint,
    OrthogonalPostSelection,
    ZeroCoupling,
)
from .hilbert import TOL, Ket, LinOp, commutator, inner, spectral, tensor
from .pointer import (
    GaussianPointer,
    WeakSetup,
    backaction_relation,
    evolve_exact,
    first_order_pointer_mean,
    postselect_pointer_mean,
    state_after_readout,
)
from .weakvalue import Classification, weak_value

__version__ = "0.1.0"
