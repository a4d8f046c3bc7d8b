"""Hardy's paradox: overlapping electron and positron interferometers.

Each particle either passes through the overlap region (O) or not (NO).  The
two-particle space is spanned by ``|X_p, Y_e>``, ordered
``(O,O), (O,NO), (NO,O), (NO,NO)`` with the positron as the slow index.
Pair annihilation removes the ``(O,O)`` component from the pre-selected state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..hilbert import Ket, LinOp, commutator, commutes, max_abs, tensor
from ..pointer import GaussianPointer, WeakSetup, backaction_relation
from ..weakvalue import WeakValueReport, conjunction_projector, weak_value

O, NO = 0, 1
LABELS = (("O", "O"), ("O", "NO"), ("NO", "O"), ("NO", "NO"))

# rank-1 joint occupation projectors, then the single-particle sums
PAIR_OPS = ("N+-_O,O", "N+-_O,NO", "N+-_NO,O", "N+-_NO,NO")
SINGLE_OPS = ("N+_O", "N+_NO", "N-_O", "N-_NO")

EXPECTED_WEAK_VALUES = {
    "N+-_O,O": 0.0,
    "N+-_O,NO": 1.0,
    "N+-_NO,O": 1.0,
    "N+-_NO,NO": -1.0,
    "N+_O": 1.0,
    "N-_O": 1.0,
    "N+_NO": 0.0,
    "N-_NO": 0.0,
}


def _path(i: int) -> Ket:
    return Ket.basis(2, i)


def pair_ket(p: int, e: int) -> Ket:
    return tensor(_path(p), _path(e))


@dataclass(frozen=True)
class HardyWorkspace:
    phi: Ket
    """pre-selected state (no annihilation)"""
    psi: Ket
    """post-selected state (both D detectors fire)"""
    number_ops: dict[str, LinOp]

    labels = LABELS

    @property
    def phi_proj(self) -> LinOp:
        return self.phi.projector()

    @property
    def psi_proj(self) -> LinOp:
        return self.psi.projector()

    def pair_partition(self) -> list[LinOp]:
        return [self.number_ops[k] for k in PAIR_OPS]

    def detector_basis(self) -> dict[str, Ket]:
        """Product basis of bright (C) and dark (D) detector states; DD is |Psi>."""
        c = Ket(np.array([1, 1]) / np.sqrt(2))
        d = Ket(np.array([1, -1]) / np.sqrt(2))
        return {"CC": tensor(c, c), "CD": tensor(c, d), "DC": tensor(d, c), "DD": tensor(d, d)}


def hardy_build() -> HardyWorkspace:
    phi = Ket((pair_ket(O, NO).data + pair_ket(NO, O).data + pair_ket(NO, NO).data) / np.sqrt(3))
    psi = Ket(0.5 * (pair_ket(O, O).data - pair_ket(O, NO).data
                     - pair_ket(NO, O).data + pair_ket(NO, NO).data))
    ops = {}
    for name, (p, e) in zip(PAIR_OPS, [(O, O), (O, NO), (NO, O), (NO, NO)]):
        ops[name] = pair_ket(p, e).projector()
    ops["N+_O"] = ops["N+-_O,O"] + ops["N+-_O,NO"]
    ops["N+_NO"] = ops["N+-_NO,O"] + ops["N+-_NO,NO"]
    ops["N-_O"] = ops["N+-_O,O"] + ops["N+-_NO,O"]
    ops["N-_NO"] = ops["N+-_O,NO"] + ops["N+-_NO,NO"]
    return HardyWorkspace(phi=phi, psi=psi, number_ops=ops)


def hardy_weak_values(ws: HardyWorkspace) -> dict[str, WeakValueReport]:
    return {name: weak_value(op, ws.phi, ws.psi) for name, op in ws.number_ops.items()}


@dataclass(frozen=True)
class HardyNoncommutativity:
    psi_factor: float
    phi_factor: float
    psi_residual: float
    """max |Psi N Psi N - psi_factor Psi N|"""
    phi_residual: float
    commuting_pairs: dict[tuple[str, str], bool]
    expectation_commutators: dict[str, complex]
    """<Phi|[Psi, N]|Phi> per operator"""
    commutator_norms: dict[str, float]
    """max |[Psi, N]| per operator"""
    conjunction_limit_norm: float
    conjunction_squarings: int


def _sandwich_factor(P: LinOp, N: LinOp) -> tuple[float, float]:
    lhs = (P @ N @ P @ N).data
    base = (P @ N).data
    factor = float(np.vdot(base, lhs).real / np.vdot(base, base).real)
    return factor, max_abs(lhs - factor * base)


def hardy_noncommutativity(ws: HardyWorkspace, target: str = "N+-_NO,NO") -> HardyNoncommutativity:
    """Operator identities showing the (NO,NO) projector is incompatible with
    both the pre- and the post-selection."""
    N = ws.number_ops[target]
    psi_f, psi_r = _sandwich_factor(ws.psi_proj, N)
    phi_f, phi_r = _sandwich_factor(ws.phi_proj, N)

    named = {"Psi": ws.psi_proj, "Phi": ws.phi_proj, **ws.number_ops}
    pairs = {}
    for a in ("Psi", "Phi"):
        for b, op in named.items():
            if b != a and (b, a) not in pairs:
                pairs[(a, b)] = commutes(named[a], op)

    exp_comm = {name: commutator(ws.psi_proj, op).expect(ws.phi) for name, op in ws.number_ops.items()}
    comm_norm = {name: max_abs(commutator(ws.psi_proj, op).data) for name, op in ws.number_ops.items()}
    limit, squarings = conjunction_projector(ws.psi_proj, N)
    return HardyNoncommutativity(
        psi_factor=psi_f, phi_factor=phi_f, psi_residual=psi_r, phi_residual=phi_r,
        commuting_pairs=pairs, expectation_commutators=exp_comm,
        commutator_norms=comm_norm,
        conjunction_limit_norm=max_abs(limit.data), conjunction_squarings=squarings,
    )


@dataclass(frozen=True)
class HardyBackActionRow:
    operator: str
    weak_value_re: float
    probability_before: float
    probability_first_order: float
    probability_exact: float
    shift: float
    predicted_shift: float
    """(kappa / x0) Re<N>_w |<Psi|Phi>|^2"""

    @property
    def residual(self) -> float:
        return abs(self.shift - self.predicted_shift)


def hardy_backaction_experiment(ws: HardyWorkspace, pointer: GaussianPointer,
                                kappa: float, operators=PAIR_OPS) -> list[HardyBackActionRow]:
    """Weakly measure each occupation projector and record the first-order
    change of the D+D- coincidence probability."""
    if kappa > pointer.sigma / 10:
        raise ValueError("kappa must not exceed sigma / 10 for the weak regime")
    rows = []
    for name in (*operators, "identity"):
        op = LinOp.identity(4) if name == "identity" else ws.number_ops[name]
        rel = backaction_relation(WeakSetup(ws.phi, op, pointer, kappa), ws.psi)
        rows.append(HardyBackActionRow(
            operator=name,
            weak_value_re=rel.lhs_weakvalue_re,
            probability_before=rel.probability_before,
            probability_first_order=rel.probability_first_order,
            probability_exact=rel.probability_exact,
            shift=rel.probability_shift,
            predicted_shift=kappa / pointer.x0 * rel.lhs_weakvalue_re * rel.probability_before,
        ))
    return rows
