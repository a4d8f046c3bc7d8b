"""Exception types raised across the package."""


class WeakBackError(Exception):
    """Base class for package errors."""


class DimensionMismatch(WeakBackError, ValueError):
    pass


class OrthogonalPostSelection(WeakBackError, ValueError):
    """Pre- and post-selected states are (numerically) orthogonal, so the
    weak value is undefined."""


class ZeroCoupling(WeakBackError, ValueError):
    """A ratio that divides by the coupling was requested at zero coupling."""


class NeverPostSelected(WeakBackError, ValueError):
    """The post-selection outcome has vanishing probability."""


class NodePoint(WeakBackError, ValueError):
    """The wavefunction vanishes at the requested point, where the weak
    momentum value diverges."""


class InvalidPartition(WeakBackError, ValueError):
    """Operators do not form a partition of the identity by projectors."""
