import numpy as np
import pytest

from weakback.convergence import fit_order
from weakback.hilbert import inner, max_abs
from weakback.pointer import GaussianPointer, WeakSetup, backaction_relation
from weakback.scenarios.hardy import (
    EXPECTED_WEAK_VALUES,
    PAIR_OPS,
    hardy_backaction_experiment,
    hardy_build,
    hardy_noncommutativity,
    hardy_weak_values,
)
from weakback.weakvalue import Classification


@pytest.fixture(scope="module")
def ws():
    return hardy_build()


def test_states_normalized_and_overlap(ws):
    assert ws.phi.norm() == pytest.approx(1.0, abs=1e-15)
    assert ws.psi.norm() == pytest.approx(1.0, abs=1e-15)
    assert inner(ws.psi, ws.phi) == pytest.approx(-1 / (2 * np.sqrt(3)), abs=1e-15)
    assert abs(inner(ws.psi, ws.phi)) ** 2 == pytest.approx(1 / 12, abs=1e-12)


def test_no_annihilation_component(ws):
    assert abs(ws.phi.data[0]) == 0.0


def test_pair_partition_complete(ws):
    total = sum(P.data for P in ws.pair_partition())
    assert max_abs(total - np.eye(4)) == 0.0


def test_single_particle_ops_are_sums(ws):
    n = ws.number_ops
    assert max_abs((n["N+_O"] + n["N+_NO"]).data - np.eye(4)) == 0.0
    assert max_abs((n["N-_O"] + n["N-_NO"]).data - np.eye(4)) == 0.0


def test_detector_basis_contains_psi(ws):
    basis = ws.detector_basis()
    assert max_abs(basis["DD"].data - ws.psi.data) <= 1e-15
    gram = np.array([[np.vdot(a.data, b.data) for b in basis.values()] for a in basis.values()])
    assert max_abs(gram - np.eye(4)) <= 1e-15


@pytest.mark.parametrize("name", list(EXPECTED_WEAK_VALUES))
def test_weak_values_match_table(ws, name):
    r = hardy_weak_values(ws)[name]
    assert abs(r.value - EXPECTED_WEAK_VALUES[name]) <= 1e-12


def test_weak_values_all_back_action(ws):
    for r in hardy_weak_values(ws).values():
        assert r.classification is Classification.BACK_ACTION_INDICATOR


def test_sandwich_factors(ws):
    nc = hardy_noncommutativity(ws)
    assert nc.psi_factor == pytest.approx(1 / 4, abs=1e-12)
    assert nc.phi_factor == pytest.approx(1 / 3, abs=1e-12)
    assert nc.psi_residual <= 1e-12
    assert nc.phi_residual <= 1e-12


def test_commutators(ws):
    nc = hardy_noncommutativity(ws)
    assert abs(nc.expectation_commutators["N+-_NO,NO"]) <= 1e-12
    assert nc.commutator_norms["N+-_NO,NO"] > 0.1
    assert not nc.commuting_pairs[("Psi", "N+-_NO,NO")]
    assert not nc.commuting_pairs[("Phi", "N+-_NO,NO")]
    assert not nc.commuting_pairs[("Psi", "Phi")]
    # Phi has no (O,O) component, so it commutes with that projector
    assert nc.commuting_pairs[("Phi", "N+-_O,O")]


def test_conjunction_vanishes(ws):
    nc = hardy_noncommutativity(ws)
    assert nc.conjunction_limit_norm <= 1e-12


def test_backaction_rows(ws):
    rows = hardy_backaction_experiment(ws, GaussianPointer(2.0, 1.0), 0.01)
    assert [r.operator for r in rows] == [*PAIR_OPS, "identity"]
    for r in rows:
        assert r.residual <= 1e-12
        assert r.probability_before == pytest.approx(1 / 12, abs=1e-12)
    nn = rows[3]
    assert nn.weak_value_re == pytest.approx(-1.0)
    assert nn.shift < 0 and nn.probability_exact < nn.probability_before


def test_backaction_requires_weak_regime(ws):
    with pytest.raises(ValueError):
        hardy_backaction_experiment(ws, GaussianPointer(2.0, 1.0), 0.2)


@pytest.mark.parametrize("name", PAIR_OPS)
def test_exact_convergence_order(ws, name):
    ptr = GaussianPointer(2.0, 1.0)
    kappas = np.array([1e-2, 5e-3, 2.5e-3]) * ptr.sigma
    errs = [backaction_relation(WeakSetup(ws.phi, ws.number_ops[name], ptr, k), ws.psi).exact_probability_residual
            for k in kappas]
    fit = fit_order(kappas, errs)
    if name == "N+-_O,O":
        # Phi has no (O,O) branch: first order is exact
        assert fit.exact
    else:
        assert 1.8 <= fit.order <= 2.2
