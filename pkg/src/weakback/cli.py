"""Batch runner: ``weakback run <scenario> [options]``.

Each run writes a result table and a summary of checked identities (residual,
tolerance, PASS/FAIL) as CSV or JSON.  Exit status: 0 if every check passes,
1 if any check fails, 2 on configuration or I/O errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import hilbert
from .convergence import fit_order
from .hilbert import LinOp, random_basis, random_hermitian, random_ket, random_projector
from .pointer import (
    GaussianPointer,
    WeakSetup,
    backaction_relation,
    completeness_backaction,
    evolve_exact,
    first_order_pointer_mean,
    postselect_pointer_mean,
)
from .povm import (
    GaussianBinnedFamily,
    backaction_decomposition,
    find_negativity_witness,
    sequential_probability,
    symmetric_edges,
)
from .scenarios import hardy, twoslit
from .weakvalue import (
    completeness_sum,
    decompose_expectation,
    squared_weakvalue_identity,
    weak_value,
    weighted_sum,
    zero_or_one_check,
)

log = logging.getLogger("weakback")

SCHEMA_VERSION = "1"
SCENARIOS = ("hardy", "twoslit", "identities", "povm", "sweep")


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field_name = field_name


@dataclass
class RunConfig:
    scenario: str
    x0: float = 2.0
    sigma: float = 1.0
    kappa: float = 0.01
    dim: int = 4
    trials: int = 100
    seed: int = 7
    out: str = "weakback_out"
    format: str = "csv"
    planes: int = 41
    starts: int = 80
    bins: int = 4

    def validate(self) -> "RunConfig":
        if self.scenario not in SCENARIOS:
            raise ConfigError("scenario", f"must be one of {', '.join(SCENARIOS)}")
        if not (math.isfinite(self.x0) and self.x0 != 0):
            raise ConfigError("x0", "must be finite and nonzero")
        if not self.sigma > 0:
            raise ConfigError("sigma", "must be positive")
        if abs(self.x0) < self.sigma / 100:
            raise ConfigError("x0", "|x0| must be at least sigma/100")
        if not (math.isfinite(self.kappa) and self.kappa >= 0):
            raise ConfigError("kappa", "must be finite and >= 0")
        if self.dim < 2 or self.dim > 64:
            raise ConfigError("dim", "must be between 2 and 64")
        if self.trials < 1:
            raise ConfigError("trials", "must be >= 1")
        if self.format not in ("csv", "json"):
            raise ConfigError("format", "must be csv or json")
        if self.planes < 2:
            raise ConfigError("planes", "must be >= 2")
        if self.starts < 2:
            raise ConfigError("starts", "must be >= 2")
        if self.bins < 2:
            raise ConfigError("bins", "must be >= 2")
        return self

    @property
    def pointer(self) -> GaussianPointer:
        return GaussianPointer(self.x0, self.sigma)


@dataclass
class Check:
    name: str
    residual: float
    tolerance: float
    passed: bool | None = None

    def __post_init__(self):
        if self.passed is None:
            self.passed = bool(self.residual <= self.tolerance)


@dataclass
class Table:
    columns: list[str]
    docs: dict[str, str]
    rows: list[list] = field(default_factory=list)


@dataclass
class RunResult:
    table: Table
    checks: list[Check]

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)


def _max(values) -> float:
    return float(max(values)) if len(values) else 0.0


# -- scenarios ------------------------------------------------------------------


def run_hardy(cfg: RunConfig) -> RunResult:
    ws = hardy.hardy_build()
    table = Table(
        ["operator", "weak_value_re", "weak_value_im", "classification",
         "expectation_of_commutator_abs", "first_order_shift", "predicted_shift"],
        {
            "operator": "occupation projector (p = positron, e = electron)",
            "weak_value_re": "Re <N>_w between |Phi> and |Psi>",
            "weak_value_im": "Im <N>_w",
            "classification": "ConditionalProbability / BackActionIndicator",
            "expectation_of_commutator_abs": "|<Phi|[Psi, N]|Phi>|",
            "first_order_shift": "first-order change of |<Psi|Phi_phi>|^2 under weak readout of N",
            "predicted_shift": "(kappa/x0) Re<N>_w |<Psi|Phi>|^2",
        },
    )
    reports = hardy.hardy_weak_values(ws)
    kappa = cfg.kappa if cfg.kappa > 0 else cfg.sigma / 100
    shifts = {r.operator: r for r in hardy.hardy_backaction_experiment(
        ws, cfg.pointer, kappa, operators=tuple(reports))}
    checks = [Check("overlap |<Psi|Phi>|^2 = 1/12",
                    abs(abs(hilbert.inner(ws.psi, ws.phi)) ** 2 - 1 / 12), 1e-12)]
    for name, r in reports.items():
        row = shifts[name]
        table.rows.append([name, r.real_part, r.imag_part, str(r.classification),
                           abs(r.expectation_of_commutator), row.shift, row.predicted_shift])
        checks.append(Check(f"weak value {name} = {hardy.EXPECTED_WEAK_VALUES[name]:g}",
                            abs(r.value - hardy.EXPECTED_WEAK_VALUES[name]), 1e-12))
        checks.append(Check(f"back-action shift {name}", row.residual, 1e-14))
    nc = hardy.hardy_noncommutativity(ws)
    checks += [
        Check("Psi N Psi N = (1/4) Psi N", max(nc.psi_residual, abs(nc.psi_factor - 0.25)), 1e-12),
        Check("Phi N Phi N = (1/3) Phi N", max(nc.phi_residual, abs(nc.phi_factor - 1 / 3)), 1e-12),
        Check("<Phi|[Psi, N_NO,NO]|Phi> = 0", abs(nc.expectation_commutators["N+-_NO,NO"]), 1e-12),
        Check("sum of pair weak values = 1",
              abs(completeness_sum(ws.pair_partition(), ws.phi, ws.psi) - 1), 1e-12),
    ]
    return RunResult(table, checks)


def run_identities(cfg: RunConfig) -> RunResult:
    rng = np.random.default_rng(cfg.seed)
    d = cfg.dim
    res = {"decomposition": [], "completeness": [], "completeness_backaction": [],
           "squared_identity": [], "zero_or_one": [], "linearity": []}
    for _ in range(cfg.trials):
        I = random_ket(d, rng)
        basis = random_basis(d, rng)
        A = random_hermitian(d, rng)
        pairs = decompose_expectation(A, I, basis)
        res["decomposition"].append(abs(weighted_sum(pairs) - A.expect(I)))

        psi = basis[0]
        part = [b.projector() for b in random_basis(d, rng)]
        res["completeness"].append(abs(completeness_sum(part, I, psi) - 1))
        res["completeness_backaction"].append(
            abs(completeness_backaction(part, I, psi, cfg.pointer, cfg.kappa or 0.01) - 1))

        P = random_projector(d, 1, rng)
        sq = squared_weakvalue_identity(P, I, psi)
        res["squared_identity"].append(sq.max_residual())

        # projector diagonal in the random basis commutes with every basis projector
        Pc = sum((b.projector() for b in basis[: rng.integers(1, d)]), LinOp.zeros(d))
        res["zero_or_one"].append(zero_or_one_check(Pc, basis, I).residual())

        B = random_hermitian(d, rng)
        a, b = rng.normal(size=2)
        lhs = weak_value(a * A + b * B, I, psi).value
        rhs = a * weak_value(A, I, psi).value + b * weak_value(B, I, psi).value
        res["linearity"].append(abs(lhs - rhs))

    tol = {"decomposition": 1e-10, "completeness": 1e-12, "completeness_backaction": 1e-10,
           "squared_identity": 1e-10, "zero_or_one": 1e-10, "linearity": 1e-10}
    table = Table(["identity", "dim", "trials", "max_residual", "tolerance"],
                  {"identity": "checked relation", "dim": "Hilbert-space dimension",
                   "trials": "random instances", "max_residual": "largest absolute residual",
                   "tolerance": "pass threshold"})
    checks = []
    for name, vals in res.items():
        m = _max(vals)
        table.rows.append([name, d, cfg.trials, m, tol[name]])
        checks.append(Check(f"{name} (dim {d})", m, tol[name]))
    return RunResult(table, checks)


def run_povm(cfg: RunConfig) -> RunResult:
    pointer = cfg.pointer
    edges = symmetric_edges(pointer, cfg.bins)
    sz = np.diag([1.0, -1.0])
    theta = 0.3
    I = np.array([np.cos(theta), np.sin(theta)])
    plus = np.array([1, 1]) / np.sqrt(2)
    finals = [np.outer(plus, plus), np.eye(2) - np.outer(plus, plus)]
    fam = GaussianBinnedFamily(sz, pointer, edges)
    kappa = cfg.kappa if cfg.kappa > 0 else 0.01 * pointer.sigma

    table = Table(["case", "outcome", "zeroth", "first_slope", "weakvalue_re", "residual"],
                  {"case": "instance", "outcome": "post-selection index n",
                   "zeroth": "conditional expectation at g = 0",
                   "first_slope": "d/dg of the conditional expectation (Richardson)",
                   "weakvalue_re": "Re <A'>_w", "residual": "|first_slope - weakvalue_re|"})
    checks = []

    # brute-force two-stage Born rule on the qubit
    povm = fam(kappa)
    pr = sequential_probability(I, povm, finals)
    brute = np.empty_like(pr)
    for m, M in enumerate(povm.kraus_ops):
        after = M.data @ I
        for n, P in enumerate(finals):
            brute[n, m] = np.linalg.norm(P @ after) ** 2
    checks.append(Check("sequential probability vs two-stage Born rule", float(np.abs(pr - brute).max()), 1e-12))
    checks.append(Check("sum_nm Pr(n,m) = 1", abs(pr.sum() - 1), 1e-10))
    checks.append(Check("sum_m E'_m = 0", hilbert.max_abs(sum(E.data for E in fam.expansion().Eprime)), 1e-10))

    cases = [("qubit sigma_z", fam, I, finals)]
    ws = hardy.hardy_build()
    N = ws.number_ops["N+-_NO,NO"]
    hfam = GaussianBinnedFamily(N, pointer, edges)
    hfinals = [ws.psi_proj.data, np.eye(4) - ws.psi_proj.data]
    cases.append(("hardy N_NO,NO", hfam, ws.phi.data, hfinals))
    for name, family, init, fin in cases:
        dec = backaction_decomposition(init, family, fin, 0)
        table.rows.append([name, 0, dec.zeroth, dec.first_slope, dec.weakvalue_re, dec.residual])
        checks.append(Check(f"slope = Re<A'>_w ({name})", dec.residual, 1e-6))

    wit = find_negativity_witness(np.random.default_rng(cfg.seed), pointer, 0.05 * pointer.sigma)
    if wit is None:
        checks.append(Check("negativity witness found", 1.0, 0.0))
    else:
        checks.append(Check(
            f"first-order ratio {wit.min_first_order:.4f} < 0 while exact ratio "
            f"{wit.exact_ratio.min():.4f} and all Pr(n,m) >= 0",
            0.0 if wit.min_first_order < 0 and wit.joint_probabilities.min() >= -1e-12 else 1.0,
            0.0))
    return RunResult(table, checks)


def run_twoslit(cfg: RunConfig) -> RunResult:
    field_ = twoslit.default_field(n_planes=cfg.planes)
    starts = twoslit.sample_starts(field_, cfg.starts)
    bundle = twoslit.reconstruct_trajectories(field_, starts)
    table = Table(["trajectory", "start", "z", "xi", "flagged"],
                  {"trajectory": "index, ordered by start point",
                   "start": "transverse start position at z = 0",
                   "z": "propagation distance of the plane",
                   "xi": "transverse position (empty if flagged)",
                   "flagged": "1 if the trajectory met a node and was terminated"})
    for i, s in enumerate(bundle.start_points):
        for j, z in enumerate(bundle.planes):
            table.rows.append([i, s, z, bundle.paths[i, j], int(bundle.flagged[i])])

    z_end = float(bundle.planes[-1])
    rng = np.random.default_rng(cfg.seed)
    xs = rng.uniform(-field_.envelope_halfwidth(z_end) / 2, field_.envelope_halfwidth(z_end) / 2, 200)
    keep = field_.intensity(xs, z_end) > 1e-6 * field_.intensity(0.0, z_end)
    h = 1e-3
    analytic = field_.weak_momentum(xs[keep], z_end)

    def dphase(step):
        return np.angle(field_.psi(xs[keep] + step, z_end) / field_.psi(xs[keep] - step, z_end)) / (2 * step)

    fd = (4 * dphase(h / 2) - dphase(h)) / 3
    far = 200 * field_.rayleigh
    spacing = twoslit.fringe_spacing(field_, far, "minima") / twoslit.far_field_spacing(field_, far)
    checks = [
        Check("trajectories do not cross", 0.0 if bundle.non_crossing() else 1.0, 0.0),
        Check("weak momentum vs finite-difference phase gradient", _max(np.abs(analytic - fd)), 1e-8),
        Check("endpoint KS distance to |psi|^2", twoslit.ks_distance(bundle.endpoints(), field_, z_end),
              max(0.05, 1.0 / cfg.starts)),
        Check("far-field dark-fringe spacing / (2 pi z / k d) - 1", abs(spacing - 1), 0.02),
    ]
    return RunResult(table, checks)


def sweep_coupling(cfg: RunConfig, kappa_values) -> RunResult:
    """Error of each first-order claim against the exact model, vs kappa."""
    kappas = np.asarray(kappa_values, dtype=float)
    if kappas.size < 3:
        raise ConfigError("kappa", "sweep needs at least three coupling values")
    pointer = cfg.pointer
    rng = np.random.default_rng(cfg.seed)
    ws = hardy.hardy_build()

    q_init = random_ket(2, rng)
    q_obs = random_hermitian(2, rng)
    q_final = random_ket(2, rng)

    def pointer_error(I, A, f):
        return lambda k: abs(postselect_pointer_mean(evolve_exact(WeakSetup(I, A, pointer, k)), f)
                             - first_order_pointer_mean(WeakSetup(I, A, pointer, k), f))

    def probability_error(I, A, f):
        return lambda k: backaction_relation(WeakSetup(I, A, pointer, k), f).exact_probability_residual

    def ratio_identity_error(I, A, f):
        return lambda k: backaction_relation(WeakSetup(I, A, pointer, k), f).exact_ratio_identity_residual

    n_nono = ws.number_ops["N+-_NO,NO"]
    # (claim, error function, expected order); the real-Gaussian pointer mean
    # has no kappa^2 correction, so its first-order error is O(kappa^3)
    items = [
        ("identity pointer mean", pointer_error(q_init, LinOp.identity(2), q_final), 3),
        ("qubit pointer mean", pointer_error(q_init, q_obs, q_final), 3),
        ("qubit back-action probability", probability_error(q_init, q_obs, q_final), 2),
        ("qubit pointer/probability ratio identity", ratio_identity_error(q_init, q_obs, q_final), 2),
        ("hardy N_NO,NO pointer mean", pointer_error(ws.phi, n_nono, ws.psi), 3),
        ("hardy N_NO,NO back-action probability", probability_error(ws.phi, n_nono, ws.psi), 2),
        ("hardy N_NO,NO pointer/probability ratio identity", ratio_identity_error(ws.phi, n_nono, ws.psi), 2),
    ]
    table = Table(["identity", "kappa", "error", "fitted_order", "expected_order"],
                  {"identity": "first-order claim", "kappa": "coupling g t",
                   "error": "|exact - first order|", "fitted_order": "log-log slope, or 'exact'",
                   "expected_order": "leading power of the neglected terms"})
    checks = []
    for name, fn, expected in items:
        errs = [fn(k) for k in kappas]
        fit = fit_order(kappas, errs)
        for k, e in zip(kappas, errs):
            table.rows.append([name, k, e, fit.label(), expected])
        checks.append(Check(f"order of {name} in [{expected - 0.2:g}, {expected + 0.2:g}]",
                            0.0 if fit.exact else abs(fit.order - expected), 0.2))
    return RunResult(table, checks)


def run_sweep(cfg: RunConfig) -> RunResult:
    top = cfg.kappa if cfg.kappa > 0 else 0.01 * cfg.sigma
    return sweep_coupling(cfg, top * 0.5 ** np.arange(4))


RUNNERS = {
    "hardy": run_hardy,
    "identities": run_identities,
    "povm": run_povm,
    "twoslit": run_twoslit,
    "sweep": run_sweep,
}


# -- output ------------------------------------------------------------------------


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(v) if math.isfinite(v) else None
    if isinstance(v, np.integer):
        return int(v)
    return v


def _csv_cell(v):
    v = _cell(v)
    return "" if v is None else repr(v) if isinstance(v, float) else v


def _header_lines(cfg: RunConfig, kind: str, table: Table) -> list[str]:
    lines = [f"# schema_version: {SCHEMA_VERSION}",
             f"# kind: {kind}",
             f"# seed: {cfg.seed}",
             f"# config: {json.dumps(asdict(cfg), sort_keys=True)}"]
    lines += [f"# column {c}: {table.docs.get(c, '')}" for c in table.columns]
    return lines


def _summary_table(checks: list[Check]) -> Table:
    t = Table(["check", "residual", "tolerance", "status"],
              {"check": "identity or property verified", "residual": "measured residual",
               "tolerance": "pass threshold", "status": "PASS or FAIL"})
    t.rows = [[c.name, c.residual, c.tolerance, "PASS" if c.passed else "FAIL"] for c in checks]
    return t


def write_result(cfg: RunConfig, result: RunResult) -> list[Path]:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    summary = _summary_table(result.checks)
    if cfg.format == "json":
        path = out / f"{cfg.scenario}.json"
        doc = {
            "schema_version": SCHEMA_VERSION,
            "seed": cfg.seed,
            "config": asdict(cfg),
            "results": {"columns": result.table.columns, "docs": result.table.docs,
                        "rows": [[_cell(v) for v in r] for r in result.table.rows]},
            "summary": {"columns": summary.columns, "docs": summary.docs,
                        "rows": [[_cell(v) for v in r] for r in summary.rows]},
            "all_passed": result.ok,
        }
        path.write_text(json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n")
        return [path]

    paths = []
    for kind, table in (("results", result.table), ("summary", summary)):
        path = out / (f"{cfg.scenario}.csv" if kind == "results" else f"{cfg.scenario}_summary.csv")
        with path.open("w", newline="") as fh:
            for line in _header_lines(cfg, kind, table):
                fh.write(line + "\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(table.columns)
            for r in table.rows:
                w.writerow([_csv_cell(v) for v in r])
        paths.append(path)
    return paths


def run(cfg: RunConfig) -> int:
    """Execute one scenario, write its files and return the exit status."""
    try:
        cfg.validate()
    except ConfigError as exc:
        log.error("invalid config: %s", exc)
        return 2
    result = RUNNERS[cfg.scenario](cfg)
    try:
        paths = write_result(cfg, result)
    except OSError as exc:
        log.error("could not write output: %s", exc)
        return 2
    for c in result.checks:
        log.info("%s  %-60s residual=%.3e tol=%.1e", "PASS" if c.passed else "FAIL",
                 c.name, c.residual, c.tolerance)
    for p in paths:
        log.info("wrote %s", p)
    return 0 if result.ok else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="weakback", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run one scenario")
    r.add_argument("scenario_pos", nargs="?", choices=SCENARIOS, metavar="SCENARIO")
    r.add_argument("--scenario", choices=SCENARIOS)
    d = RunConfig("hardy")
    r.add_argument("--x0", type=float, default=d.x0, help="pointer centre")
    r.add_argument("--sigma", type=float, default=d.sigma, help="pointer width")
    r.add_argument("--kappa", type=float, default=d.kappa, help="coupling g t")
    r.add_argument("--dim", type=int, default=d.dim)
    r.add_argument("--trials", type=int, default=d.trials)
    r.add_argument("--seed", type=int, default=d.seed)
    r.add_argument("--out", default=d.out, help="output directory")
    r.add_argument("--format", choices=("csv", "json"), default=d.format)
    r.add_argument("--planes", type=int, default=d.planes)
    r.add_argument("--starts", type=int, default=d.starts)
    r.add_argument("--bins", type=int, default=d.bins)
    r.add_argument("-q", "--quiet", action="store_true")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(message)s", stream=sys.stderr)
    scenario = args.scenario or args.scenario_pos
    if scenario is None:
        log.error("invalid config: scenario: required")
        return 2
    if args.scenario and args.scenario_pos and args.scenario != args.scenario_pos:
        log.error("invalid config: scenario: given twice with different values")
        return 2
    cfg = RunConfig(scenario=scenario, x0=args.x0, sigma=args.sigma, kappa=args.kappa,
                    dim=args.dim, trials=args.trials, seed=args.seed, out=args.out,
                    format=args.format, planes=args.planes, starts=args.starts, bins=args.bins)
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
