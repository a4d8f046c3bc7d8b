"""Weak values and the algebraic identities around them.

The weak value of ``A`` for pre-selection ``|I>`` and post-selection
``|psi>`` is ``<psi|A|I> / <psi|I>``.  Besides computing it, this module
classifies when the number admits a conditional-probability reading
(projector observables whose projector commutes with the post-selection, or
post-selection compatible with the pre-selection) and when it should be read
as the first-order back-action of the weak coupling on the post-selection.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidPartition, OrthogonalPostSelection
from .hilbert import (
    TOL,
    LinOp,
    as_array,
    as_ket,
    as_op,
    commutator,
    commutes,
    inner,
    is_orthonormal_basis,
    max_abs,
    sums_to_identity,
)


class Classification(enum.Enum):
    CONDITIONAL_PROBABILITY = "ConditionalProbability"
    CONDITIONAL_EXPECTATION = "ConditionalExpectation"
    BACK_ACTION_INDICATOR = "BackActionIndicator"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class CommutationFlags:
    final_observable: bool
    """[Psi_j, A] == 0"""
    initial_final: bool
    """[|I><I|, Psi_j] == 0"""
    initial_observable: bool
    """[|I><I|, A] == 0"""


@dataclass(frozen=True)
class WeakValueReport:
    value: complex
    classification: Classification
    commutation_flags: CommutationFlags
    expectation_of_commutator: complex
    """<I|[Psi_j, A]|I>"""
    overlap: complex
    """<psi_j|I>"""

    @property
    def real_part(self) -> float:
        return self.value.real

    @property
    def imag_part(self) -> float:
        return self.value.imag

    @property
    def postselection_probability(self) -> float:
        return abs(self.overlap) ** 2


def _overlap_or_raise(initial, final, threshold):
    ov = inner(final, initial)
    if abs(ov) <= threshold:
        raise OrthogonalPostSelection(
            f"|<final|initial>| = {abs(ov):.3e} <= {threshold:.1e}; weak value undefined"
        )
    return ov


def weak_value(A, initial, final, threshold: float = TOL.overlap,
               tol: float = TOL.algebraic) -> WeakValueReport:
    """Weak value of `A` between `initial` and `final` with its classification.

    Parameters
    ----------
    A : LinOp or array_like
        Observable (Hermitian for the classification to be meaningful;
        any square matrix is accepted for the value itself).
    initial, final : Ket or array_like
        Pre- and post-selected states.
    threshold : float
        Minimum allowed ``|<final|initial>|``.
    tol : float
        Entrywise tolerance for the commutation flags.

    Raises
    ------
    OrthogonalPostSelection
        If ``|<final|initial>| <= threshold``.
    """
    A = as_op(A)
    I = as_ket(initial)
    psi = as_ket(final)
    ov = _overlap_or_raise(I, psi, threshold)
    value = inner(psi, A.apply(I)) / ov

    I_proj = I.projector()
    psi_proj = psi.projector()
    flags = CommutationFlags(
        final_observable=commutes(psi_proj, A, tol),
        initial_final=commutes(I_proj, psi_proj, tol),
        initial_observable=commutes(I_proj, A, tol),
    )
    comm_exp = commutator(psi_proj, A).expect(I.normalize())

    if A.is_projector(tol):
        conditional = flags.final_observable or flags.initial_final
        cls = (Classification.CONDITIONAL_PROBABILITY if conditional
               else Classification.BACK_ACTION_INDICATOR)
    elif flags.final_observable:
        cls = Classification.CONDITIONAL_EXPECTATION
    else:
        cls = Classification.BACK_ACTION_INDICATOR

    return WeakValueReport(
        value=complex(value),
        classification=cls,
        commutation_flags=flags,
        expectation_of_commutator=comm_exp,
        overlap=ov,
    )


def decompose_expectation(A, initial, basis, threshold: float = TOL.overlap,
                          tol: float = TOL.spectral):
    """Write ``<I|A|I>`` as a probability-weighted sum of weak values.

    Returns a list of ``(Pr(psi_j|I), WeakValueReport)`` pairs, one per basis
    vector.  The weighted sum of the values reproduces ``<I|A|I>``.
    """
    if not is_orthonormal_basis(basis, tol):
        raise InvalidPartition("basis is not complete and orthonormal")
    out = []
    for psi in basis:
        report = weak_value(A, initial, psi, threshold=threshold)
        out.append((report.postselection_probability, report))
    return out


def weighted_sum(pairs) -> complex:
    return complex(sum(p * r.value for p, r in pairs))


@dataclass(frozen=True)
class SquaredWeakValue:
    lhs: float
    rhs_product_form: float | None
    """Pr(a|psi) Pr(a|I) / Pr(psi|I); only defined for rank-1 projectors."""
    rhs_sandwich_form: float

    def max_residual(self) -> float:
        vals = [v for v in (self.rhs_product_form, self.rhs_sandwich_form) if v is not None]
        return max(abs(self.lhs - v) for v in vals)


def squared_weakvalue_identity(Ai, initial, final,
                               threshold: float = TOL.overlap,
                               tol: float = TOL.algebraic) -> SquaredWeakValue:
    """Three expressions for ``|<A_i>_w|^2`` with a projector ``A_i``."""
    Ai = as_op(Ai)
    if not Ai.is_projector(tol):
        raise ValueError("squared weak-value identity needs a projector")
    I = as_ket(initial)
    psi = as_ket(final)
    ov = _overlap_or_raise(I, psi, threshold)
    pr_psi_I = abs(ov) ** 2

    lhs = abs(inner(psi, Ai.apply(I)) / ov) ** 2
    sandwich = (Ai @ psi.projector() @ Ai).expect(I).real / pr_psi_I

    product = None
    rank = int(round(np.trace(Ai.data).real))
    if rank == 1:
        # A_i = |a><a|: recover |a> from the largest column.
        col = Ai.data[:, int(np.argmax(np.linalg.norm(Ai.data, axis=0)))]
        a = col / np.linalg.norm(col)
        product = abs(inner(a, psi)) ** 2 * abs(inner(a, I)) ** 2 / pr_psi_I
    return SquaredWeakValue(lhs=lhs, rhs_product_form=product, rhs_sandwich_form=sandwich)


@dataclass(frozen=True)
class ZeroOneCheck:
    values: list[float]
    sum_linear: complex
    """sum_j Pr(psi_j|I) <A_i>_w"""
    sum_squared: float
    """sum_j Pr(psi_j|I) |<A_i>_w|^2"""
    expectation: float
    """<I|A_i|I>"""

    def residual(self) -> float:
        dist01 = max(min(abs(v), abs(v - 1.0)) for v in self.values)
        return max(dist01,
                   abs(self.sum_linear - self.expectation),
                   abs(self.sum_squared - self.expectation))


def zero_or_one_check(Ai, basis, initial, tol: float = TOL.algebraic) -> ZeroOneCheck:
    """Weak values of a projector that commutes with every basis projector.

    Comparing the linear and squared sum rules forces each such weak value to
    be 0 or 1.
    """
    Ai = as_op(Ai)
    if not Ai.is_projector(tol):
        raise ValueError("zero_or_one_check needs a projector")
    for k, psi in enumerate(basis):
        if not commutes(as_ket(psi).projector(), Ai, 10 * tol):
            raise ValueError(f"basis vector {k} does not commute with the projector")
    pairs = decompose_expectation(Ai, initial, basis)
    values = [r.real_part for _, r in pairs]
    return ZeroOneCheck(
        values=values,
        sum_linear=weighted_sum(pairs),
        sum_squared=float(sum(p * abs(r.value) ** 2 for p, r in pairs)),
        expectation=Ai.expect(as_ket(initial)).real,
    )


def check_partition(partition, tol: float = TOL.spectral):
    ops = [as_op(p) for p in partition]
    if not ops:
        raise InvalidPartition("empty partition")
    for k, p in enumerate(ops):
        if not p.is_projector(tol):
            raise InvalidPartition(f"member {k} is not a projector")
    if not sums_to_identity(ops, tol):
        raise InvalidPartition("partition does not sum to the identity")
    return ops


def completeness_sum(partition, initial, final, threshold: float = TOL.overlap) -> complex:
    """Sum of weak values over a projector partition of the identity (always 1)."""
    ops = check_partition(partition)
    return complex(sum(weak_value(p, initial, final, threshold).value for p in ops))


def conjunction_projector(P, Q, tol: float = 1e-13, max_squarings: int = 200):
    """``lim_{n->inf} (P Q)^n`` by repeated squaring.

    For projectors this limit is the projector onto the intersection of the
    two ranges.  Returns ``(limit, squarings_used)``.
    """
    M = as_array(P) @ as_array(Q)
    for n in range(1, max_squarings + 1):
        M2 = M @ M
        if max_abs(M2 - M) <= tol:
            return LinOp(M2), n
        M = M2
    raise RuntimeError("(PQ)^n did not converge")
