"""Dense complex linear algebra for small Hilbert spaces.

Kets and operators are thin immutable wrappers around numpy arrays.  All
functions in the package accept either the wrappers or plain array-likes.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

from .exceptions import DimensionMismatch


@dataclass(frozen=True)
class Tolerances:
    """Central numerical tolerances (absolute, entrywise max-norm)."""

    algebraic: float = 1e-12
    spectral: float = 1e-10
    degeneracy: float = 1e-9
    overlap: float = 1e-12


TOL = Tolerances()


def _frozen(array, ndim):
    arr = np.array(array, dtype=complex)
    if arr.ndim != ndim:
        raise ValueError(f"expected a {ndim}-d array, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


class Ket:
    """A finite-dimensional state vector.

    Parameters
    ----------
    amplitudes : array_like
        Complex amplitudes.
    normalized : bool, default True
        If True the vector must have unit norm (within ``TOL.algebraic``).
        Pass False for deliberately unnormalized vectors such as the
        system state left after a pointer readout.
    """

    __slots__ = ("data", "normalized")

    def __init__(self, amplitudes, normalized: bool = True):
        data = _frozen(amplitudes, 1)
        if data.size == 0:
            raise ValueError("a Ket needs at least one amplitude")
        if normalized and abs(np.vdot(data, data).real - 1.0) > TOL.algebraic:
            raise ValueError(
                f"Ket flagged normalized has norm^2 {np.vdot(data, data).real!r}"
            )
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "normalized", bool(normalized))

    def __setattr__(self, name, value):
        raise AttributeError("Ket is immutable")

    @classmethod
    def from_unnormalized(cls, amplitudes) -> "Ket":
        """Rescale `amplitudes` to unit norm."""
        data = np.asarray(amplitudes, dtype=complex)
        norm = np.linalg.norm(data)
        if norm == 0:
            raise ValueError("cannot normalize the zero vector")
        return cls(data / norm)

    @classmethod
    def basis(cls, dim: int, index: int) -> "Ket":
        data = np.zeros(dim, dtype=complex)
        data[index] = 1.0
        return cls(data)

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    def norm(self) -> float:
        return float(np.linalg.norm(self.data))

    def normalize(self) -> "Ket":
        return Ket.from_unnormalized(self.data)

    def projector(self) -> "LinOp":
        """|v><v| / <v|v>."""
        v = self.data / self.norm()
        return LinOp(np.outer(v, v.conj()))

    def __array__(self, dtype=None, copy=None):
        return self.data if dtype is None else self.data.astype(dtype)

    def __repr__(self):
        return f"Ket({np.array2string(self.data, precision=4)}, normalized={self.normalized})"


class LinOp:
    """A square complex matrix."""

    __slots__ = ("data",)

    def __init__(self, entries):
        data = _frozen(entries, 2)
        if data.shape[0] != data.shape[1] or data.shape[0] == 0:
            raise ValueError(f"LinOp needs a non-empty square matrix, got {data.shape}")
        object.__setattr__(self, "data", data)

    def __setattr__(self, name, value):
        raise AttributeError("LinOp is immutable")

    @classmethod
    def identity(cls, dim: int) -> "LinOp":
        return cls(np.eye(dim))

    @classmethod
    def zeros(cls, dim: int) -> "LinOp":
        return cls(np.zeros((dim, dim)))

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    @property
    def H(self) -> "LinOp":
        return LinOp(self.data.conj().T)

    def is_hermitian(self, tol: float = TOL.algebraic) -> bool:
        return max_abs(self.data - self.data.conj().T) <= tol

    def is_projector(self, tol: float = TOL.algebraic) -> bool:
        return self.is_hermitian(tol) and max_abs(self.data @ self.data - self.data) <= tol

    def is_identity(self, tol: float = TOL.algebraic) -> bool:
        return max_abs(self.data - np.eye(self.dim)) <= tol

    def is_zero(self, tol: float = TOL.algebraic) -> bool:
        return max_abs(self.data) <= tol

    def apply(self, ket) -> Ket:
        v = as_array(ket)
        _check_dims(self.dim, v.shape[0])
        return Ket(self.data @ v, normalized=False)

    def expect(self, ket) -> complex:
        """<v|M|v> (no normalization applied)."""
        v = as_array(ket)
        _check_dims(self.dim, v.shape[0])
        return complex(np.vdot(v, self.data @ v))

    def __matmul__(self, other):
        if isinstance(other, LinOp):
            _check_dims(self.dim, other.dim)
            return LinOp(self.data @ other.data)
        if isinstance(other, Ket):
            return self.apply(other)
        return NotImplemented

    def __add__(self, other):
        if not isinstance(other, LinOp):
            return NotImplemented
        _check_dims(self.dim, other.dim)
        return LinOp(self.data + other.data)

    def __sub__(self, other):
        if not isinstance(other, LinOp):
            return NotImplemented
        _check_dims(self.dim, other.dim)
        return LinOp(self.data - other.data)

    def __mul__(self, scalar):
        if isinstance(scalar, (LinOp, Ket)):
            return NotImplemented
        return LinOp(complex(scalar) * self.data)

    __rmul__ = __mul__

    def __neg__(self):
        return LinOp(-self.data)

    def __pow__(self, n: int):
        return LinOp(np.linalg.matrix_power(self.data, n))

    def __array__(self, dtype=None, copy=None):
        return self.data if dtype is None else self.data.astype(dtype)

    def __repr__(self):
        return f"LinOp(dim={self.dim})"


@dataclass(frozen=True)
class Spectrum:
    """Eigen-decomposition A = sum_i eigenvalues[i] * eigenprojectors[i]."""

    eigenvalues: tuple[float, ...]
    eigenprojectors: tuple[LinOp, ...]

    def reconstruct(self) -> LinOp:
        dim = self.eigenprojectors[0].dim
        total = np.zeros((dim, dim), dtype=complex)
        for a, p in zip(self.eigenvalues, self.eigenprojectors):
            total += a * p.data
        return LinOp(total)

    def __len__(self):
        return len(self.eigenvalues)


def max_abs(m) -> float:
    """Entrywise max-norm."""
    m = np.asarray(m)
    return float(np.max(np.abs(m))) if m.size else 0.0


def as_array(x) -> np.ndarray:
    if isinstance(x, (Ket, LinOp)):
        return x.data
    return np.asarray(x, dtype=complex)


def as_ket(x, normalized: bool | None = None) -> Ket:
    if isinstance(x, Ket):
        return x
    data = np.asarray(x, dtype=complex)
    if normalized is None:
        normalized = abs(np.vdot(data, data).real - 1.0) <= TOL.algebraic
    return Ket(data, normalized=normalized)


def as_op(x) -> LinOp:
    return x if isinstance(x, LinOp) else LinOp(x)


def _check_dims(a: int, b: int):
    if a != b:
        raise DimensionMismatch(f"dimension mismatch: {a} != {b}")


def inner(a, b) -> complex:
    """<a|b>, conjugate-linear in the first argument."""
    va, vb = as_array(a), as_array(b)
    _check_dims(va.shape[0], vb.shape[0])
    return complex(np.vdot(va, vb))


def commutator(a, b) -> LinOp:
    """[a, b] = ab - ba."""
    ma, mb = as_array(a), as_array(b)
    _check_dims(ma.shape[0], mb.shape[0])
    return LinOp(ma @ mb - mb @ ma)


def commutes(a, b, tol: float = TOL.algebraic) -> bool:
    return commutator(a, b).is_zero(tol)


def tensor(*factors):
    """Kronecker product; the first factor is the slowest-varying index.

    All factors must be of the same kind (all Kets or all LinOps).
    """
    if not factors:
        raise ValueError("tensor needs at least one factor")
    if all(isinstance(f, Ket) for f in factors):
        data = reduce(np.kron, (f.data for f in factors))
        return Ket(data, normalized=all(f.normalized for f in factors))
    if all(isinstance(f, LinOp) for f in factors):
        return LinOp(reduce(np.kron, (f.data for f in factors)))
    raise TypeError("tensor factors must be all Kets or all LinOps")


def spectral(a, tol: float = TOL.algebraic, merge: float = TOL.degeneracy) -> Spectrum:
    """Spectral decomposition of a Hermitian operator.

    Eigenvalues are returned ascending; eigenvalues closer than `merge` are
    grouped into one eigenprojector.
    """
    op = as_op(a)
    if not op.is_hermitian(tol):
        raise ValueError("spectral decomposition requires a Hermitian operator")
    herm = 0.5 * (op.data + op.data.conj().T)
    vals, vecs = np.linalg.eigh(herm)

    groups: list[list[int]] = []
    for i, v in enumerate(vals):
        if groups and v - vals[groups[-1][-1]] < merge:
            groups[-1].append(i)
        else:
            groups.append([i])

    eigenvalues = []
    projectors = []
    for g in groups:
        block = vecs[:, g]
        eigenvalues.append(float(np.mean(vals[g])))
        projectors.append(LinOp(block @ block.conj().T))
    return Spectrum(tuple(eigenvalues), tuple(projectors))


def projector_onto(*kets) -> LinOp:
    """Orthogonal projector onto the span of `kets`."""
    cols = np.column_stack([as_array(k) for k in kets])
    q, r = np.linalg.qr(cols)
    rank = int(np.sum(np.abs(np.diag(r)) > 1e-10))
    q = q[:, :rank]
    return LinOp(q @ q.conj().T)


def is_orthonormal_basis(kets, tol: float = TOL.spectral) -> bool:
    m = np.column_stack([as_array(k) for k in kets])
    if m.shape[0] != m.shape[1]:
        return False
    return max_abs(m.conj().T @ m - np.eye(m.shape[1])) <= tol


def sums_to_identity(ops, tol: float = TOL.spectral) -> bool:
    total = sum(as_array(o) for o in ops)
    return max_abs(total - np.eye(total.shape[0])) <= tol


# -- random instances -------------------------------------------------------


def random_ket(dim: int, rng: np.random.Generator) -> Ket:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return Ket.from_unnormalized(v)


def random_hermitian(dim: int, rng: np.random.Generator, scale: float = 1.0) -> LinOp:
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return LinOp(scale * 0.5 * (m + m.conj().T))


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR with phase correction."""
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_basis(dim: int, rng: np.random.Generator) -> list[Ket]:
    u = random_unitary(dim, rng)
    return [Ket(u[:, j]) for j in range(dim)]


def random_projector(dim: int, rank: int, rng: np.random.Generator) -> LinOp:
    u = random_unitary(dim, rng)[:, :rank]
    return LinOp(u @ u.conj().T)
