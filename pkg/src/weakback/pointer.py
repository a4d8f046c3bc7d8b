"""Von Neumann measurement with a Gaussian pointer.

The coupling ``H = g A pi`` acts for a time ``t``; only the product
``kappa = g t`` matters (hbar = 1).  Because ``H`` commutes with ``A`` the
evolution is solvable in closed form: the pointer attached to the eigenspace
of eigenvalue ``a`` is rigidly translated by ``kappa * a``.  That exact
solution serves as the oracle for the first-order formulas.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import OrthogonalPostSelection, ZeroCoupling
from .hilbert import TOL, Ket, LinOp, as_array, as_ket, as_op, inner, spectral
from .weakvalue import check_partition, weak_value

# <phi|x pi|phi> for a real Gaussian pointer (hbar = 1): the symmetrized part
# vanishes for a real wavefunction, leaving <[x, pi]>/2 = i/2.
X_PI_EXPECTATION = 0.5j


@dataclass(frozen=True)
class GaussianPointer:
    """Pointer wavefunction ``(2 pi sigma^2)^(-1/4) exp(-(x - x0)^2 / 4 sigma^2)``.

    ``sigma`` is the standard deviation of ``|phi(x)|^2``.
    """

    x0: float = 1.0
    sigma: float = 1.0

    def __post_init__(self):
        if not np.isfinite(self.x0) or self.x0 == 0:
            raise ValueError("pointer centre x0 must be finite and nonzero")
        if not self.sigma > 0:
            raise ValueError("pointer width sigma must be positive")

    def wavefunction(self, x, shift: float = 0.0):
        x = np.asarray(x, dtype=float)
        return (2 * np.pi * self.sigma**2) ** -0.25 * np.exp(
            -((x - self.x0 - shift) ** 2) / (4 * self.sigma**2)
        )

    def overlap(self, a, b):
        """<phi_a|phi_b> for copies shifted by `a` and `b`."""
        a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
        return np.exp(-((a - b) ** 2) / (8 * self.sigma**2))

    def position_element(self, a, b):
        """<phi_a|x|phi_b>."""
        a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
        return (self.x0 + 0.5 * (a + b)) * self.overlap(a, b)


@dataclass(frozen=True)
class WeakSetup:
    system_initial: Ket
    observable: LinOp
    pointer: GaussianPointer
    coupling: float

    def __post_init__(self):
        object.__setattr__(self, "system_initial", as_ket(self.system_initial))
        object.__setattr__(self, "observable", as_op(self.observable))
        if not self.system_initial.normalized:
            raise ValueError("system_initial must be normalized")
        if not self.observable.is_hermitian():
            raise ValueError("observable must be Hermitian")
        if self.observable.dim != self.system_initial.dim:
            raise ValueError("observable and state dimensions differ")
        if not self.coupling >= 0:
            raise ValueError("coupling must be >= 0")

    def with_coupling(self, coupling: float) -> "WeakSetup":
        return WeakSetup(self.system_initial, self.observable, self.pointer, coupling)


@dataclass(frozen=True)
class Branch:
    eigenvalue: float
    component: np.ndarray
    """P_a |I>: the system part of this branch (unnormalized)."""
    centre: float
    """Pointer centre x0 + kappa * a."""

    @property
    def weight(self) -> float:
        return float(np.vdot(self.component, self.component).real)


@dataclass(frozen=True)
class JointState:
    """``sum_a (P_a |I>) (x) phi(x - kappa a)``, held branch by branch."""

    branches: tuple[Branch, ...]
    pointer: GaussianPointer

    @property
    def shifts(self) -> np.ndarray:
        return np.array([b.centre - self.pointer.x0 for b in self.branches])

    def norm_squared(self) -> float:
        s = self.shifts
        comps = np.array([b.component for b in self.branches])
        gram = comps.conj() @ comps.T
        return float(np.sum(gram * self.pointer.overlap(s[:, None], s[None, :])).real)

    def pointer_amplitudes(self, final) -> np.ndarray:
        """Coefficients of the shifted pointers after projecting on `final`."""
        f = as_array(final)
        return np.array([np.vdot(f, b.component) for b in self.branches])

    def pointer_wavefunction(self, final, x):
        """Post-selected (unnormalized) pointer wavefunction on a grid."""
        beta = self.pointer_amplitudes(final)
        return sum(c * self.pointer.wavefunction(x, s) for c, s in zip(beta, self.shifts))


def evolve_exact(setup: WeakSetup) -> JointState:
    spec = spectral(setup.observable)
    I = setup.system_initial.data
    branches = []
    for a, P in zip(spec.eigenvalues, spec.eigenprojectors):
        comp = P.data @ I
        comp.setflags(write=False)
        branches.append(Branch(a, comp, setup.pointer.x0 + setup.coupling * a))
    return JointState(tuple(branches), setup.pointer)


def postselect_pointer_mean(state: JointState, final, threshold: float = TOL.overlap) -> float:
    """Exact <x> of the normalized pointer state after post-selecting `final`."""
    beta = state.pointer_amplitudes(final)
    s = state.shifts
    coeff = np.outer(beta.conj(), beta)
    norm = np.sum(coeff * state.pointer.overlap(s[:, None], s[None, :])).real
    if norm <= threshold**2:
        raise OrthogonalPostSelection(f"post-selection probability {norm:.3e} too small")
    xmean = np.sum(coeff * state.pointer.position_element(s[:, None], s[None, :])).real
    return float(xmean / norm)


def first_order_pointer_mean(setup: WeakSetup, final) -> float:
    """x0 + kappa * Re <A>_w."""
    wv = weak_value(setup.observable, setup.system_initial, final)
    return setup.pointer.x0 + setup.coupling * wv.real_part


def state_after_readout(setup: WeakSetup) -> Ket:
    """System state after reading the pointer position, before post-selection.

    First-order form ``|I> - (i kappa / x0) <phi|x pi|phi> A|I>``, which for a
    real Gaussian equals ``|I> + (kappa / 2 x0) A|I>``.  Not normalized.
    """
    I = setup.system_initial.data
    factor = -1j * setup.coupling / setup.pointer.x0 * X_PI_EXPECTATION
    return Ket(I + factor * (setup.observable.data @ I), normalized=False)


def state_after_readout_exact(setup: WeakSetup) -> Ket:
    """``x0^-1 <phi|x|Phi(t)>`` evaluated on the exact joint state."""
    p = setup.pointer
    out = np.zeros(setup.system_initial.dim, dtype=complex)
    for b in evolve_exact(setup).branches:
        shift = b.centre - p.x0
        out += p.position_element(0.0, shift) / p.x0 * b.component
    return Ket(out, normalized=False)


def _first_order_probability(final, readout: Ket, initial: Ket) -> tuple[float, float]:
    """(|<psi|I>|^2, first-order |<psi|Phi_phi>|^2) with the kappa^2 term dropped."""
    ov = inner(final, initial)
    amp = inner(final, readout)
    delta = amp - ov
    return abs(ov) ** 2, abs(amp) ** 2 - abs(delta) ** 2


@dataclass(frozen=True)
class BackActionRelation:
    lhs_weakvalue_re: float
    rhs_probability_ratio: float
    ratio_identity_lhs: float
    """first-order post-selected pointer mean / x0"""
    ratio_identity_rhs: float
    """first-order |<psi|Phi_phi>|^2 / |<psi|I>|^2"""
    probability_before: float
    probability_first_order: float
    probability_exact: float
    pointer_mean_exact: float
    pointer_mean_first_order: float
    x0: float

    @property
    def residual(self) -> float:
        return max(abs(self.lhs_weakvalue_re - self.rhs_probability_ratio),
                   abs(self.ratio_identity_lhs - self.ratio_identity_rhs))

    @property
    def exact_probability_residual(self) -> float:
        """Relative gap between exact and first-order post-selection probability."""
        return abs(self.probability_exact - self.probability_first_order) / self.probability_before

    @property
    def exact_ratio_identity_residual(self) -> float:
        """|exact pointer mean / x0 - exact probability ratio|; O(kappa^2)."""
        return abs(self.pointer_mean_exact / self.x0
                   - self.probability_exact / self.probability_before)

    @property
    def exact_pointer_residual(self) -> float:
        return abs(self.pointer_mean_exact - self.pointer_mean_first_order)

    @property
    def probability_shift(self) -> float:
        return self.probability_first_order - self.probability_before


def backaction_relation(setup: WeakSetup, final, threshold: float = TOL.overlap) -> BackActionRelation:
    """Compare Re<A>_w with the first-order change of the post-selection rate.

    The exact joint-state quantities are carried along so callers can check
    that the first-order statements hold up to O(kappa^2).
    """
    if setup.coupling == 0:
        raise ZeroCoupling("back-action ratio divides by the coupling")
    I = setup.system_initial
    wv = weak_value(setup.observable, I, final, threshold)
    x0, kappa = setup.pointer.x0, setup.coupling

    p0, p1 = _first_order_probability(final, state_after_readout(setup), I)
    p_exact = abs(inner(final, state_after_readout_exact(setup))) ** 2
    mean1 = first_order_pointer_mean(setup, final)

    return BackActionRelation(
        lhs_weakvalue_re=wv.real_part,
        rhs_probability_ratio=(x0 / kappa) * (p1 - p0) / p0,
        ratio_identity_lhs=mean1 / x0,
        ratio_identity_rhs=p1 / p0,
        probability_before=p0,
        probability_first_order=p1,
        probability_exact=p_exact,
        pointer_mean_exact=postselect_pointer_mean(evolve_exact(setup), final, threshold),
        pointer_mean_first_order=mean1,
        x0=x0,
    )


def completeness_backaction(partition, initial, final, pointer: GaussianPointer,
                            coupling: float, threshold: float = TOL.overlap) -> float:
    """Back-action ratio when every projector of a partition has its own pointer.

    The combined readout state is ``(1 + kappa / 2 x0) |I>``, a rescaling of
    the initial state, so the ratio is exactly 1.
    """
    if coupling == 0:
        raise ZeroCoupling("back-action ratio divides by the coupling")
    ops = check_partition(partition)
    I = as_ket(initial)
    factor = -1j * coupling / pointer.x0 * X_PI_EXPECTATION
    readout = I.data + factor * sum(op.data @ I.data for op in ops)
    if abs(inner(final, I)) <= threshold:
        raise OrthogonalPostSelection("final state orthogonal to initial state")
    p0, p1 = _first_order_probability(final, Ket(readout, normalized=False), I)
    return float((pointer.x0 / coupling) * (p1 - p0) / p0)
