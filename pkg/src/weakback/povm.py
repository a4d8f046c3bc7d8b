"""Generalized (POVM) measurements and sequential weak/strong measurement.

A concrete weak POVM is obtained from the Gaussian pointer by binning the
pointer position: outcome ``m`` corresponds to the pointer landing in bin
``m``.  Expanding its effects to first order in the coupling gives
``E_m = p_m 1 + g E'_m``; the slope of the conditional expectation value
with respect to ``g`` is the real weak value of ``A' = sum_m alpha_m E'_m``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import ndtr

from .exceptions import NeverPostSelected
from .hilbert import TOL, Ket, LinOp, as_array, as_ket, as_op, max_abs, spectral
from .pointer import GaussianPointer


def _npdf(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    finite = np.isfinite(t)
    out[finite] = np.exp(-0.5 * t[finite] ** 2) / np.sqrt(2 * np.pi)
    return out


@dataclass(frozen=True)
class PovmSet:
    """Kraus operators ``M_m`` with effects ``E_m = M_m^dag M_m`` and outcome labels."""

    kraus_ops: tuple[LinOp, ...]
    labels: tuple[float, ...]
    effects: tuple[LinOp, ...] = field(init=False)

    def __post_init__(self):
        kraus = tuple(as_op(k) for k in self.kraus_ops)
        if len(kraus) != len(self.labels):
            raise ValueError("one label per Kraus operator required")
        object.__setattr__(self, "kraus_ops", kraus)
        object.__setattr__(self, "labels", tuple(float(a) for a in self.labels))
        object.__setattr__(self, "effects", tuple(k.H @ k for k in kraus))
        dim = kraus[0].dim
        if max_abs(sum(e.data for e in self.effects) - np.eye(dim)) > TOL.spectral:
            raise ValueError("effects do not sum to the identity")
        for m, e in enumerate(self.effects):
            if np.linalg.eigvalsh(e.data).min() < -TOL.spectral:
                raise ValueError(f"effect {m} is not positive semidefinite")

    @property
    def dim(self) -> int:
        return self.kraus_ops[0].dim

    def __len__(self):
        return len(self.kraus_ops)

    @classmethod
    def trivial(cls, dim: int, label: float = 0.0) -> "PovmSet":
        return cls((LinOp.identity(dim),), (label,))


@dataclass(frozen=True)
class WeakPovmExpansion:
    p: np.ndarray
    """Zeroth-order weights, summing to 1."""
    Eprime: tuple[LinOp, ...]
    """First-order effects; they sum to zero."""

    def effects_at(self, g: float) -> list[np.ndarray]:
        dim = self.Eprime[0].dim
        return [pm * np.eye(dim) + g * Ep.data for pm, Ep in zip(self.p, self.Eprime)]


def _check_edges(bin_edges) -> np.ndarray:
    edges = np.asarray(bin_edges, dtype=float)
    if edges.ndim != 1 or edges.size < 2:
        raise ValueError("need at least two bin edges")
    if not (edges[0] == -np.inf and edges[-1] == np.inf):
        raise ValueError("bin edges must start at -inf and end at +inf")
    if np.any(np.diff(edges) <= 0):
        raise ValueError("bin edges must be strictly increasing")
    return edges


def symmetric_edges(pointer: GaussianPointer, n_bins: int, span: float = 3.0) -> np.ndarray:
    """`n_bins` bins symmetric about x0; the inner edges cover +/- span sigma."""
    if n_bins < 2:
        raise ValueError("need at least two bins")
    inner = pointer.x0 + pointer.sigma * np.linspace(-span, span, n_bins - 1)
    if n_bins == 2:
        inner = np.array([pointer.x0])
    return np.concatenate(([-np.inf], inner, [np.inf]))


class GaussianBinnedFamily:
    """Weak POVM family ``g -> PovmSet`` from a binned Gaussian pointer.

    Outcome ``m`` means the pointer, shifted by ``g * a`` on eigenspace ``a``
    of the observable, landed in ``[edges[m], edges[m+1])``.  Negative ``g``
    is allowed (it only reverses the shift direction).

    The labels ``alpha_m`` do not depend on ``g``.  By default they are the
    bin-conditional pointer readings relative to x0, rescaled so that
    ``A' = sum_m alpha_m E'_m`` equals the observable itself.
    """

    def __init__(self, observable, pointer: GaussianPointer, bin_edges, labels=None):
        self.observable = as_op(observable)
        self.pointer = pointer
        self.edges = _check_edges(bin_edges)
        self.spectrum = spectral(self.observable)
        t = (self.edges - pointer.x0) / pointer.sigma
        self._p0 = np.diff(ndtr(t))
        # d w_m / d(g a) at g = 0
        self._slope = (_npdf(t[:-1]) - _npdf(t[1:])) / pointer.sigma
        if labels is None:
            readings = pointer.sigma * (_npdf(t[:-1]) - _npdf(t[1:])) / self._p0
            scale = float(np.dot(readings, self._slope))
            labels = readings / scale
        self.labels = np.asarray(labels, dtype=float)
        if self.labels.shape != self._p0.shape:
            raise ValueError("one label per bin required")

    def bin_weights(self, g: float) -> np.ndarray:
        """w[m, i]: probability of bin m given eigenvalue index i."""
        a = np.array(self.spectrum.eigenvalues)
        t = (self.edges[:, None] - self.pointer.x0 - g * a[None, :]) / self.pointer.sigma
        return np.clip(np.diff(ndtr(t), axis=0), 0.0, None)

    def __call__(self, g: float) -> PovmSet:
        w = self.bin_weights(g)
        kraus = []
        for m in range(w.shape[0]):
            M = sum(np.sqrt(w[m, i]) * P.data for i, P in enumerate(self.spectrum.eigenprojectors))
            kraus.append(LinOp(M))
        return PovmSet(tuple(kraus), tuple(self.labels))

    def expansion(self) -> WeakPovmExpansion:
        Eprime = tuple(LinOp(c * self.observable.data) for c in self._slope)
        return WeakPovmExpansion(p=self._p0.copy(), Eprime=Eprime)

    def a_prime(self) -> LinOp:
        """``sum_m alpha_m E'_m``."""
        exp = self.expansion()
        return LinOp(sum(a * E.data for a, E in zip(self.labels, exp.Eprime)))

    def calibration_deviation(self, g: float) -> float:
        """``|| sum_m alpha_m E_m(g) - <alpha>_0 1 - g A' ||_max``; O(g^2)."""
        povm = self(g)
        dim = povm.dim
        total = sum(a * E.data for a, E in zip(self.labels, povm.effects))
        zeroth = float(np.dot(self.labels, self._p0))
        return max_abs(total - zeroth * np.eye(dim) - g * self.a_prime().data)


def gaussian_binned_povm(observable, pointer: GaussianPointer, coupling: float,
                         bin_edges, labels=None) -> PovmSet:
    """Kraus operators ``M_m = sum_i sqrt(w_m(a_i)) |a_i><a_i|`` for a binned pointer."""
    return GaussianBinnedFamily(observable, pointer, bin_edges, labels)(coupling)


def _check_projective(final_projectors, dim, tol=TOL.spectral):
    ops = [as_op(p) for p in final_projectors]
    for k, P in enumerate(ops):
        if P.dim != dim or not P.is_projector(tol):
            raise ValueError(f"final operator {k} is not a projector on the system")
    for i in range(len(ops)):
        for j in range(i + 1, len(ops)):
            if max_abs(ops[i].data @ ops[j].data) > tol:
                raise ValueError(f"final projectors {i} and {j} are not orthogonal")
    if max_abs(sum(P.data for P in ops) - np.eye(dim)) > tol:
        raise ValueError("final projectors are not complete")
    return ops


def sequential_probability(initial, povm1: PovmSet, final_projectors) -> np.ndarray:
    """``Pr[n, m] = <I| M_m^dag P_n M_m |I>`` for a first POVM then a projective measurement."""
    I = as_ket(initial).data
    finals = _check_projective(final_projectors, povm1.dim)
    out = np.empty((len(finals), len(povm1)))
    for m, M in enumerate(povm1.kraus_ops):
        v = M.data @ I
        for n, P in enumerate(finals):
            out[n, m] = np.vdot(v, P.data @ v).real
    return out


def conditional_expectation(initial, povm1: PovmSet, final_projectors, n: int,
                            threshold: float = TOL.overlap) -> float:
    """``sum_m alpha_m Pr(n,m) / sum_m Pr(n,m)``."""
    pr = sequential_probability(initial, povm1, final_projectors)[n]
    denom = pr.sum()
    if denom <= threshold:
        raise NeverPostSelected(f"outcome {n} has probability {denom:.3e}")
    return float(np.dot(povm1.labels, pr) / denom)


def conditional_ratio(initial, povm1: PovmSet, final_projectors, n: int,
                      threshold: float = TOL.overlap) -> np.ndarray:
    """``Pr(n,m) / sum_m Pr(n,m)`` for every m."""
    pr = sequential_probability(initial, povm1, final_projectors)[n]
    denom = pr.sum()
    if denom <= threshold:
        raise NeverPostSelected(f"outcome {n} has probability {denom:.3e}")
    return pr / denom


def _real_weak_value(op: np.ndarray, I: np.ndarray, P: np.ndarray) -> float:
    # Re <I|P A|I> / <I|P|I>; the ordinary real weak value when P is rank 1.
    denom = np.vdot(I, P @ I).real
    return float(np.vdot(I, P @ (op @ I)).real / denom)


@dataclass(frozen=True)
class BackActionDecomposition:
    zeroth: float
    first_slope: float
    weakvalue_re: float

    @property
    def residual(self) -> float:
        return abs(self.first_slope - self.weakvalue_re)


def richardson_slope(f: Callable[[float], float], h: float) -> float:
    """Central-difference derivative at 0 with one Richardson step (error O(h^4))."""
    d_h = (f(h) - f(-h)) / (2 * h)
    d_h2 = (f(h / 2) - f(-h / 2)) / h
    return (4 * d_h2 - d_h) / 3


def backaction_decomposition(initial, family, final_projectors, n: int,
                             step: float | None = None) -> BackActionDecomposition:
    """Split the conditional expectation into its g = 0 value and first-order slope.

    `family` maps a coupling ``g`` to a :class:`PovmSet`.  If it provides an
    ``expansion()`` method the first-order effects are taken from it;
    otherwise they are estimated by differencing the effects.
    """
    I = as_ket(initial).data
    finals = _check_projective(final_projectors, family(0.0).dim)
    P = finals[n].data
    if np.vdot(I, P @ I).real <= TOL.overlap:
        raise NeverPostSelected(f"outcome {n} never occurs for this initial state")

    if step is None:
        step = 1e-3 * getattr(getattr(family, "pointer", None), "sigma", 1.0)

    def cond(g):
        return conditional_expectation(I, family(g), finals, n)

    labels = np.asarray(family(0.0).labels)
    if hasattr(family, "expansion"):
        Eprime = [E.data for E in family.expansion().Eprime]
    else:
        Eprime = []
        for m in range(len(labels)):
            Eprime.append(richardson_slope(lambda g, m=m: family(g).effects[m].data, step))
    a_prime = sum(a * E for a, E in zip(labels, Eprime))

    return BackActionDecomposition(
        zeroth=cond(0.0),
        first_slope=richardson_slope(cond, step),
        weakvalue_re=_real_weak_value(a_prime, I, P),
    )


def strong_backaction(A, initial, final_projector) -> float:
    """``<I|A Psi A|I> - <I|Psi|I>``: change of the post-selection rate caused
    by a strong measurement of the projector-valued ``A``."""
    A = as_op(A)
    Psi = as_op(final_projector)
    if not A.is_hermitian():
        raise ValueError("A must be Hermitian")
    if not Psi.is_projector():
        raise ValueError("final_projector must be a projector")
    I = as_ket(initial)
    return (A @ Psi @ A).expect(I).real - Psi.expect(I).real


@dataclass(frozen=True)
class NegativityWitness:
    """An instance whose first-order conditional 'probability' is negative."""

    initial: np.ndarray
    final: np.ndarray
    observable: np.ndarray
    coupling: float
    outcome: int
    exact_ratio: np.ndarray
    first_order_ratio: np.ndarray
    joint_probabilities: np.ndarray

    @property
    def min_first_order(self) -> float:
        return float(self.first_order_ratio.min())


def first_order_ratio(initial, family: GaussianBinnedFamily, final_projectors,
                      n: int, g: float) -> np.ndarray:
    """``p_m + g Re<I|P_n E'_m|I> / <I|P_n|I>``: the ratio to first order in g."""
    I = as_ket(initial).data
    P = as_array(final_projectors[n])
    exp = family.expansion()
    return np.array([pm + g * _real_weak_value(E.data, I, P)
                     for pm, E in zip(exp.p, exp.Eprime)])


def find_negativity_witness(rng: np.random.Generator, pointer: GaussianPointer,
                            coupling: float, trials: int = 2000,
                            n_bins: int = 2) -> NegativityWitness | None:
    """Search random qubit instances (projector observable, post-selection on a
    random basis vector) for a first-order ratio below zero."""
    edges = symmetric_edges(pointer, n_bins)
    for _ in range(trials):
        u = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))[0]
        a = u[:, 0]
        A = np.outer(a, a.conj())
        I = rng.normal(size=2) + 1j * rng.normal(size=2)
        I /= np.linalg.norm(I)
        # post-select close to the state orthogonal to |I>
        perp = np.array([-I[1].conjugate(), I[0].conjugate()])
        eps = 10 ** rng.uniform(-3, -1)
        f = perp + eps * (rng.normal(size=2) + 1j * rng.normal(size=2))
        f /= np.linalg.norm(f)
        finals = [np.outer(f, f.conj()), np.eye(2) - np.outer(f, f.conj())]
        family = GaussianBinnedFamily(A, pointer, edges)
        first = first_order_ratio(I, family, finals, 0, coupling)
        if first.min() < 0:
            povm = family(coupling)
            return NegativityWitness(
                initial=I, final=f, observable=A, coupling=coupling, outcome=0,
                exact_ratio=conditional_ratio(I, povm, finals, 0),
                first_order_ratio=first,
                joint_probabilities=sequential_probability(I, povm, finals),
            )
    return None
