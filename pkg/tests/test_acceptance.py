"""Acceptance suite: one PASS/FAIL line per criterion, printed at the end of the run.

Each test times its own work and fails if the budget is exceeded.
"""

import time

import numpy as np
import pytest

from oracles import phase_gradient, two_stage_born
from weakback.convergence import fit_order
from weakback.hilbert import (
    LinOp,
    Ket,
    commutator,
    inner,
    max_abs,
    random_basis,
    random_hermitian,
    random_ket,
    random_projector,
)
from weakback.pointer import GaussianPointer, WeakSetup, backaction_relation, completeness_backaction
from weakback.povm import (
    GaussianBinnedFamily,
    backaction_decomposition,
    find_negativity_witness,
    sequential_probability,
    symmetric_edges,
)
from weakback.scenarios.hardy import (
    PAIR_OPS,
    hardy_build,
    hardy_noncommutativity,
    hardy_weak_values,
)
from weakback.scenarios.twoslit import (
    default_field,
    far_field_spacing,
    fringe_spacing,
    ks_distance,
    reconstruct_trajectories,
    sample_starts,
)
from weakback.weakvalue import (
    completeness_sum,
    decompose_expectation,
    squared_weakvalue_identity,
    weighted_sum,
    zero_or_one_check,
)

pytestmark = pytest.mark.acceptance

SEED = 20240611
HARDY_VALUES = {
    "N+-_O,O": 0.0, "N+-_O,NO": 1.0, "N+-_NO,O": 1.0, "N+-_NO,NO": -1.0,
    "N+_O": 1.0, "N-_O": 1.0, "N+_NO": 0.0, "N-_NO": 0.0,
}


def _random_partition(dim, rng):
    """Group a random orthonormal basis into 1..dim orthogonal projectors."""
    basis = random_basis(dim, rng)
    cuts = np.sort(rng.choice(np.arange(1, dim), size=int(rng.integers(0, dim)), replace=False))
    groups = np.split(np.arange(dim), cuts)
    return [sum((basis[i].projector() for i in g), LinOp.zeros(dim)) for g in groups]


def test_c1_hardy_exact_values(acceptance):
    t0 = time.perf_counter()
    ws = hardy_build()
    overlap_err = abs(abs(inner(ws.psi, ws.phi)) ** 2 - 1 / 12)
    reports = hardy_weak_values(ws)
    wv_err = max(abs(reports[k].value - v) for k, v in HARDY_VALUES.items())
    elapsed = time.perf_counter() - t0
    ok = overlap_err <= 1e-12 and wv_err <= 1e-12 and elapsed < 1.0
    acceptance("C1 Hardy overlap and weak values", ok,
               f"overlap_err={overlap_err:.1e} weak_value_err={wv_err:.1e} t={elapsed:.3f}s")
    assert ok


def test_c2_hardy_operator_identities(acceptance):
    t0 = time.perf_counter()
    ws = hardy_build()
    nc = hardy_noncommutativity(ws)
    N = ws.number_ops["N+-_NO,NO"]
    psi_res = max_abs((ws.psi_proj @ N @ ws.psi_proj @ N - 0.25 * (ws.psi_proj @ N)).data)
    phi_res = max_abs((ws.phi_proj @ N @ ws.phi_proj @ N - (1 / 3) * (ws.phi_proj @ N)).data)
    comm = commutator(ws.psi_proj, N)
    exp_comm = abs(comm.expect(ws.phi))
    comm_max = max_abs(comm.data)
    elapsed = time.perf_counter() - t0
    ok = (abs(nc.psi_factor - 0.25) <= 1e-12 and abs(nc.phi_factor - 1 / 3) <= 1e-12
          and psi_res <= 1e-12 and phi_res <= 1e-12
          and exp_comm <= 1e-12 and comm_max > 0.1 and elapsed < 1.0)
    acceptance("C2 Hardy sandwich factors and commutator", ok,
               f"psi_res={psi_res:.1e} phi_res={phi_res:.1e} <[Psi,N]>={exp_comm:.1e} "
               f"max|[Psi,N]|={comm_max:.3f} t={elapsed:.3f}s")
    assert ok


def test_c3_sum_rules(acceptance):
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED)
    pointer = GaussianPointer(2.0, 1.0)
    worst = {"decomposition": 0.0, "completeness": 0.0, "completeness_backaction": 0.0}
    for dim in range(2, 9):
        for _ in range(1000):
            A = random_hermitian(dim, rng)
            I, f = random_ket(dim, rng), random_ket(dim, rng)
            pairs = decompose_expectation(A, I, random_basis(dim, rng))
            direct = complex(np.vdot(I.data, A.data @ I.data))
            worst["decomposition"] = max(worst["decomposition"], abs(weighted_sum(pairs) - direct))
            part = _random_partition(dim, rng)
            worst["completeness"] = max(worst["completeness"], abs(completeness_sum(part, I, f) - 1))
            r = completeness_backaction(part, I, f, pointer, 0.01)
            worst["completeness_backaction"] = max(worst["completeness_backaction"], abs(r - 1))
    elapsed = time.perf_counter() - t0
    ok = all(v <= 1e-10 for v in worst.values()) and elapsed < 30
    acceptance("C3 decomposition and completeness sum rules (7000 instances)", ok,
               " ".join(f"{k}={v:.1e}" for k, v in worst.items()) + f" t={elapsed:.1f}s")
    assert ok


def test_c4_squared_weak_value(acceptance):
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED)
    worst_sq = 0.0
    for i in range(1000):
        dim = 2 + i % 7
        sq = squared_weakvalue_identity(random_projector(dim, 1, rng), random_ket(dim, rng), random_ket(dim, rng))
        # absolute on the O(1) scale, relative once the value itself is large
        worst_sq = max(worst_sq, sq.max_residual() / max(1.0, sq.lhs))
    worst_01 = 0.0
    for i in range(1000):
        dim = 2 + i % 7
        basis = random_basis(dim, rng)
        pick = rng.random(dim) < 0.5
        P = sum((b.projector() for b, keep in zip(basis, pick) if keep), LinOp.zeros(dim))
        chk = zero_or_one_check(P, basis, random_ket(dim, rng))
        dist = max(min(abs(v), abs(v - 1)) for v in chk.values)
        worst_01 = max(worst_01, dist, chk.residual())
    elapsed = time.perf_counter() - t0
    ok = worst_sq <= 1e-10 and worst_01 <= 1e-10 and elapsed < 30
    acceptance("C4 squared weak value identity and 0-or-1", ok,
               f"three_way={worst_sq:.1e} zero_or_one={worst_01:.1e} t={elapsed:.1f}s")
    assert ok


def test_c5_backaction_relation_and_order(acceptance):
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED)
    pointer = GaussianPointer(2.0, 1.0)
    kappas = np.array([1e-2, 5e-3, 2.5e-3]) * pointer.sigma

    def check(I, A, f):
        rels = [backaction_relation(WeakSetup(I, A, pointer, k), f) for k in kappas]
        res = max(r.residual / max(1.0, abs(r.lhs_weakvalue_re)) for r in rels)
        return res, fit_order(kappas, [r.exact_probability_residual for r in rels])

    worst_res, orders, bad = 0.0, [], 0
    for i in range(100):
        dim = 2 + i % 2
        A = random_projector(dim, 1, rng) if i % 4 < 2 else random_hermitian(dim, rng)
        res, fit = check(random_ket(dim, rng), A, random_ket(dim, rng))
        worst_res = max(worst_res, res)
        bad += not fit.within(1.8, 2.2)
        if not fit.exact:
            orders.append(fit.order)
    ws = hardy_build()
    hardy_labels = []
    for name in PAIR_OPS:
        res, fit = check(ws.phi, ws.number_ops[name], ws.psi)
        worst_res = max(worst_res, res)
        bad += not fit.within(1.8, 2.2)
        hardy_labels.append(fit.label())
    elapsed = time.perf_counter() - t0
    ok = worst_res <= 1e-10 and bad == 0 and elapsed < 60
    acceptance("C5 first-order back-action relation and O(kappa^2) convergence", ok,
               f"residual={worst_res:.1e} random_orders=[{min(orders):.3f},{max(orders):.3f}] "
               f"hardy_orders={hardy_labels} out_of_range={bad} t={elapsed:.1f}s")
    assert ok


def test_c6_povm_layer(acceptance):
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED)
    pointer = GaussianPointer(2.0, 1.0)
    worst_born = worst_slope = worst_sum = 0.0
    for i in range(200):
        dim = 2 + i % 3
        A = random_hermitian(dim, rng)
        fam = GaussianBinnedFamily(A, pointer, symmetric_edges(pointer, 2 + i % 5))
        I = random_ket(dim, rng).data
        P = random_projector(dim, 1, rng).data
        finals = [P, np.eye(dim) - P]
        g = float(rng.uniform(0.0, 1.0))
        povm = fam(g)
        pr = sequential_probability(I, povm, finals)
        brute = two_stage_born(I, [k.data for k in povm.kraus_ops], finals)
        worst_born = max(worst_born, np.abs(pr - brute).max())
        worst_sum = max(worst_sum, max_abs(sum(E.data for E in fam.expansion().Eprime)))
        if np.vdot(I, P @ I).real > 1e-2:
            dec = backaction_decomposition(I, fam, finals, 0)
            worst_slope = max(worst_slope, dec.residual)
    elapsed = time.perf_counter() - t0
    ok = worst_born <= 1e-12 and worst_slope <= 1e-6 and worst_sum <= 1e-10 and elapsed < 60
    acceptance("C6 POVM sequential probabilities, g-slope, sum of E'", ok,
               f"born={worst_born:.1e} slope={worst_slope:.1e} sumE'={worst_sum:.1e} t={elapsed:.1f}s")
    assert ok


def test_c7_double_slit(acceptance):
    t0 = time.perf_counter()
    field = default_field()
    rng = np.random.default_rng(SEED)

    # weak momentum vs phase gradient at 10^3 points spread over the planes
    z = rng.choice(np.array(field.z_planes[1:]), size=1000)
    xi = rng.uniform(-6, 6, size=1000)
    amp = np.abs(field.psi(xi, z))
    keep = amp > 1e-6 * np.abs(field.psi(0.0, z))
    grad_err = np.abs(field.weak_momentum(xi[keep], z[keep])
                      - phase_gradient(lambda x: field.psi(x, z[keep]), xi[keep])).max()

    starts = sample_starts(field, 10_000, rng=rng)
    bundle = reconstruct_trajectories(field, starts)
    ks = ks_distance(bundle.endpoints(), field, field.z_planes[-1])
    ordered = bundle.non_crossing()
    flagged = int(bundle.flagged.sum())

    zf = 200 * field.rayleigh
    spacing = fringe_spacing(field, zf, "minima")
    expected = far_field_spacing(field, zf)
    rel = abs(spacing - expected) / expected
    elapsed = time.perf_counter() - t0
    ok = grad_err <= 1e-8 and ks <= 0.05 and ordered and rel <= 0.02 and elapsed < 300
    acceptance("C7 double slit: weak momentum, trajectories, fringes", ok,
               f"phase_grad_err={grad_err:.1e} (n={int(keep.sum())}) ks={ks:.4f} non_crossing={ordered} "
               f"flagged={flagged} fringe_rel_err={rel:.1e} t={elapsed:.1f}s")
    assert ok


def test_c8_negativity_witness(acceptance):
    t0 = time.perf_counter()
    w = find_negativity_witness(np.random.default_rng(SEED), GaussianPointer(2.0, 1.0), coupling=0.1)
    elapsed = time.perf_counter() - t0
    ok = w is not None and w.min_first_order < 0 and w.joint_probabilities.min() >= 0
    detail = "no witness found" if w is None else (
        f"first_order_ratio={np.array2string(w.first_order_ratio, precision=4)} "
        f"min Pr(n,m)={w.joint_probabilities.min():.3e} t={elapsed:.2f}s")
    acceptance("C8 first-order ratio negative while all Pr(n,m) >= 0", ok, detail)
    assert ok
