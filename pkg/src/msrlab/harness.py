"""Randomized suite orchestration, reports and benchmarks.

Every trial draws from its own generator stream (see :mod:`msrlab.rng`), so a
trial's matrices depend only on ``(seed, trial, dims)``.  Trials may run in
parallel; results are gathered in trial order, which keeps reports
byte-identical for a fixed configuration.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import csv
import io
import json
import math
import time

import numpy as np

from . import blocks, msr, states, symcore
from .errors import InputError
from .rng import MASK64, SplitMix64
from .symcore import DEFAULT_TOL, ToleranceConfig

SUITES = ("msr", "lemmas", "states", "blocks", "integral", "negative-control")
CSV_COLUMNS = ("suite", "seed", "dim", "trial", "check", "margin", "verdict")
REG_LADDER = (1, 10, 100, 10_000)
STATE_RESOLVENT_LAMBDAS = (0.1, 1.0, 10.0)

# corpus-level thresholds; each is applied as ``margin >= -tol * scale``
MSR_TOL = 1e-8
ORDER_TOL = 1e-9
REG_SLACK = 1e-10
AGREEMENT_TOL = 1e-7
STATE_GAP_TOL = 1e-7
FUBINI_TOL = 1e-12
REP_TOL = 1e-8
NORM_TOL = 1e-9
WELL_CONDITIONED = 1e-6


class ConfigError(InputError):
    pass


@dataclass(frozen=True)
class SuiteConfig:
    suite: str = "msr"
    seed: int = 42
    dims: tuple = tuple(range(2, 9))
    trials: int = 1000
    quad_nodes: int = 256
    tolerances: ToleranceConfig = DEFAULT_TOL
    out: str = None
    format: str = "json"
    jobs: int = 1

    def __post_init__(self):
        if self.suite not in SUITES:
            raise ConfigError(f"unknown suite {self.suite!r}; expected one of {SUITES}")
        if not isinstance(self.seed, int) or not 0 <= self.seed <= MASK64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        if not self.dims or any(not isinstance(d, int) or not 1 <= d <= symcore.MAX_DIM for d in self.dims):
            raise ConfigError(f"dims must be integers in [1, {symcore.MAX_DIM}], got {self.dims!r}")
        if not isinstance(self.trials, int) or self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials!r}")
        if not isinstance(self.quad_nodes, int) or self.quad_nodes < 2:
            raise ConfigError(f"quad_nodes must be >= 2, got {self.quad_nodes!r}")
        if self.format not in ("json", "csv"):
            raise ConfigError(f"format must be json or csv, got {self.format!r}")
        if self.jobs < 1:
            raise ConfigError(f"jobs must be >= 1, got {self.jobs!r}")


@dataclass(frozen=True)
class Row:
    dim: int
    trial: int
    check: str
    margin: float
    verdict: bool
    # observations are recorded but never count as violations
    observation: bool = False


@dataclass
class SuiteResult:
    config: SuiteConfig
    rows: list
    exit_code: int
    report: dict = field(default_factory=dict)


# corpus ---------------------------------------------------------------------

def corpus_dim(dims, trial):
    return dims[trial % len(dims)]


def corpus_pair(seed, trial, dims):
    """The ``trial``-th pair ``0 <= a <= b``; ``b - a = c^T c`` exactly."""
    n = corpus_dim(dims, trial)
    a, b = msr.random_psd_pair(SplitMix64.for_trial(seed, trial), n)
    return n, a, b


def invertible_pair(seed, trial, dims):
    """Corpus pair shifted by ``eps in [1e-3, 1)``; both members invertible."""
    n = corpus_dim(dims, trial)
    rng = SplitMix64.for_trial(seed, trial)
    a, b = msr.random_psd_pair(rng, n)
    eps = rng.uniform(1e-3, 1.0)
    return n, a + eps * np.eye(n), b + eps * np.eye(n)


def random_symmetric(rng, n):
    m = rng.uniform(-1.0, 1.0, size=(n, n))
    return 0.5 * (m + m.T)


def random_polynomial(rng, s, degree=3):
    n = s.shape[0]
    coeffs = rng.uniform(-1.0, 1.0, size=(degree + 1,))
    out, power = np.zeros((n, n)), np.eye(n)
    for c in coeffs:
        out = out + c * power
        power = power @ s
    return 0.5 * (out + out.T)


def _scale(x):
    return max(1.0, x)


# per-trial checks -----------------------------------------------------------

def _trial_msr(cfg, trial):
    n, a, b = corpus_pair(cfg.seed, trial, cfg.dims)
    margin = symcore.min_eig(symcore.sqrt_spectral(b) - symcore.sqrt_spectral(a))
    tol = MSR_TOL * _scale(math.sqrt(symcore.order_unit_norm(b)))
    return [Row(n, trial, "msr_spectral", margin, margin >= -tol)]


def _trial_lemmas(cfg, trial):
    tol = cfg.tolerances
    n, a, b = corpus_pair(cfg.seed, trial, cfg.dims)
    rows = []
    na, nb = symcore.order_unit_norm(a), symcore.order_unit_norm(b)
    rows.append(Row(n, trial, "norm_monotone", nb - na, nb - na >= -1e-10))

    root_gap = abs(symcore.order_unit_norm(symcore.sqrt_spectral(a)) - math.sqrt(na))
    rows.append(Row(n, trial, "norm_of_root", NORM_TOL - root_gap, root_gap <= NORM_TOL))

    reg_n = REG_LADDER[trial % len(REG_LADDER)]
    lhs, rhs = msr.regularization_bound(a, reg_n, tol)
    rows.append(Row(n, trial, f"regularization_bound_n{reg_n}", rhs - lhs, rhs - lhs >= -REG_SLACK))

    for lam in msr.RESOLVENT_LAMBDAS:
        m = msr.resolvent_monotone_check(a, b, lam, tol).margin
        rows.append(Row(n, trial, f"resolvent_chain_l{lam:g}", m, m >= -ORDER_TOL))
        r = msr.resolvent_term(a, lam, tol)
        lo = symcore.min_eig(r)
        hi = symcore.min_eig(np.eye(n) - r)
        rows.append(Row(n, trial, f"resolvent_contraction_l{lam:g}", min(lo, hi), min(lo, hi) >= -ORDER_TOL))

    _, ai, bi = invertible_pair(cfg.seed, trial, cfg.dims)
    m = msr.antitone_inverse_check(ai, bi, tol).margin
    rows.append(Row(n, trial, "antitone_inverse", m, m >= -ORDER_TOL))

    e = a / _scale(na)
    m = symcore.loewner_leq(e @ e, e, tol).margin
    rows.append(Row(n, trial, "contraction_square", m, m >= -ORDER_TOL))

    x = a - (b - a)
    sq_gap = float(np.max(np.abs(symcore.absolute(x) @ symcore.absolute(x) - x @ x)))
    limit = 1e-9 * _scale(symcore.order_unit_norm(x) ** 2)
    rows.append(Row(n, trial, "abs_squared", limit - sq_gap, sq_gap <= limit))

    s = random_symmetric(SplitMix64.for_trial(cfg.seed ^ 0xA5A5, trial), n)
    m = symcore.min_eig(symcore.quadratic_map(s, b - a))
    scale = _scale(symcore.order_unit_norm(s) ** 2 * symcore.order_unit_norm(b - a))
    rows.append(Row(n, trial, "quadratic_map_positive", m, m >= -ORDER_TOL * scale))

    ladder = msr.msr_check(a, b, "regularized", tol)
    worst_rung = min(mm for _, mm in ladder.ladder)
    rows.append(Row(n, trial, "cone_closed_ladder", worst_rung, worst_rung >= -ORDER_TOL * _scale(math.sqrt(nb))))
    return rows


def _trial_states(cfg, trial):
    tol = cfg.tolerances
    n = corpus_dim(cfg.dims, trial)
    rng = SplitMix64.for_trial(cfg.seed, trial)
    a, b = msr.random_psd_pair(rng, n)
    x = a if trial % 2 == 0 else random_symmetric(rng, n)
    rows = []
    agree = states.positivity_via_states(x, tol) == symcore.is_psd(x, tol)
    rows.append(Row(n, trial, "order_by_states", 0.0 if agree else -1.0, agree))
    gap = abs(states.norm_via_states(x) - symcore.order_unit_norm(x))
    rows.append(Row(n, trial, "norm_by_states", NORM_TOL - gap, gap <= NORM_TOL))

    omega = states.State.random(n, rng)
    eps = rng.uniform(1e-3, 1.0)
    ai = a + eps * np.eye(n)
    block = blocks.build_block([ai], tol)
    w = states.induced_measure(omega, block).weights
    prob_gap = abs(float(np.sum(w)) - 1.0)
    ok = prob_gap <= 1e-10 and bool(np.all(w >= 0))
    rows.append(Row(n, trial, "induced_probability", 1e-10 - prob_gap, ok))
    for lam in STATE_RESOLVENT_LAMBDAS:
        g = msr.state_resolvent_gap(omega, ai, block, lam)
        rows.append(Row(n, trial, f"state_resolvent_l{lam:g}", NORM_TOL - g, g <= NORM_TOL))
    return rows


def _trial_blocks(cfg, trial):
    tol = cfg.tolerances
    n = corpus_dim(cfg.dims, trial)
    rng = SplitMix64.for_trial(cfg.seed, trial)
    s = random_symmetric(rng, n)
    a = random_polynomial(rng, s)
    b = random_polynomial(rng, s)
    block = blocks.build_block([a, b], tol)
    rows = []
    na, nb = symcore.order_unit_norm(a), symcore.order_unit_norm(b)
    fa, fb = blocks.function_rep(block, a), blocks.function_rep(block, b)
    fab = blocks.function_rep(block, 0.5 * (a @ b + b @ a))
    mult = float(np.max(np.abs(fab - fa * fb))) / _scale(na * nb)
    rows.append(Row(n, trial, "psi_multiplicative", REP_TOL - mult, mult <= REP_TOL))
    iso = abs(float(np.max(np.abs(fa))) - na)
    rows.append(Row(n, trial, "psi_isometry", REP_TOL - iso, iso <= REP_TOL))
    for name, m in (("a", a), ("a2", a @ a)):
        f = blocks.function_rep(block, m)
        agree = symcore.is_psd(m, tol) == bool(np.min(f) >= -NORM_TOL * _scale(symcore.order_unit_norm(m)))
        rows.append(Row(n, trial, f"psi_order_{name}", 0.0 if agree else -1.0, agree))
    boolean_err = max(
        float(np.max(np.abs(blocks.function_rep(block, p.p) - np.eye(block.X_size)[x])))
        for x, p in enumerate(block.block_projections)
    )
    rows.append(Row(n, trial, "psi_boolean", REP_TOL - boolean_err, boolean_err <= REP_TOL))
    root = symcore.sqrt_spectral(a @ a)
    closed = block.diagonal_residual(root) <= 1e-8 * _scale(na) and block.contains(root)
    rows.append(Row(n, trial, "closed_under_sqrt", 0.0 if closed else -1.0, closed))
    return rows


def _trial_integral(cfg, trial, rule):
    tol = cfg.tolerances
    n = corpus_dim(cfg.dims, trial)
    rows = []
    if trial == 0:
        err = float(np.max(rule.scalar_error(np.logspace(-2, 2, 101))))
        rows.append(Row(n, trial, "scalar_identity", 1e-8 - err, err <= 1e-8))
    _, a, b = corpus_pair(cfg.seed, trial, cfg.dims)
    if symcore.invertibility_margin(a) >= WELL_CONDITIONED:
        gap = symcore.order_unit_norm(msr.sqrt_integral(a, rule, tol) - symcore.sqrt_spectral(a))
        limit = AGREEMENT_TOL * _scale(math.sqrt(symcore.order_unit_norm(a)))
        rows.append(Row(n, trial, "method_agreement", limit - gap, gap <= limit))
    rng = SplitMix64.for_trial(cfg.seed ^ 0x5151, trial)
    omega = states.State.random(n, rng)
    ai = a + 1e-3 * np.eye(n)
    _, _, gap = msr.state_integral_identity(omega, ai, rule, tol)
    rows.append(Row(n, trial, "state_integral", STATE_GAP_TOL - gap, gap <= STATE_GAP_TOL))
    block = blocks.build_block([ai], tol)
    fgap = msr.fubini_check(omega, ai, block, rule)
    rows.append(Row(n, trial, "fubini_swap", FUBINI_TOL - fgap, fgap <= FUBINI_TOL))
    return rows


def _trial_negative(cfg, trial):
    n = corpus_dim(cfg.dims, trial)
    a, b = msr.random_psd_pair(SplitMix64.for_trial(cfg.seed, trial), n)
    sq, sq_thr = msr.monotonicity_margin(np.square, a, b, cfg.tolerances)
    rt = symcore.min_eig(symcore.sqrt_spectral(b) - symcore.sqrt_spectral(a))
    rt_thr = -MSR_TOL * _scale(math.sqrt(symcore.order_unit_norm(b)))
    return [
        Row(n, trial, "square_monotone", sq, sq >= sq_thr, observation=True),
        Row(n, trial, "sqrt_monotone", rt, rt >= rt_thr),
    ]


# orchestration --------------------------------------------------------------

def _trial_fn(config):
    if config.suite == "integral":
        rule = msr.make_rule(config.quad_nodes)
        return lambda t: _trial_integral(config, t, rule)
    return {
        "msr": lambda t: _trial_msr(config, t),
        "lemmas": lambda t: _trial_lemmas(config, t),
        "states": lambda t: _trial_states(config, t),
        "blocks": lambda t: _trial_blocks(config, t),
        "negative-control": lambda t: _trial_negative(config, t),
    }[config.suite]


def _collect(config):
    fn = _trial_fn(config)
    if config.jobs == 1:
        per_trial = [fn(t) for t in range(config.trials)]
    else:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            per_trial = list(pool.map(fn, range(config.trials)))
    return [row for rows in per_trial for row in rows]


def build_report(config, rows):
    checks = [r for r in rows if not r.observation]
    violations = [
        {"dim": r.dim, "trial": r.trial, "check": r.check, "margin": r.margin} for r in checks if not r.verdict
    ]
    summary = {}
    for r in rows:
        entry = summary.setdefault(r.check, {"count": 0, "failed": 0, "worst_margin": math.inf})
        entry["count"] += 1
        entry["failed"] += int(not r.verdict)
        entry["worst_margin"] = min(entry["worst_margin"], r.margin)
    report = {
        "suite": config.suite,
        "seed": config.seed,
        "trials": config.trials,
        "dims": list(config.dims),
        "quad_nodes": config.quad_nodes,
        "violations": violations,
        "worst_margin": min((r.margin for r in checks), default=None),
        "tolerances": {
            **config.tolerances.as_dict(),
            "msr_tol": MSR_TOL,
            "order_tol": ORDER_TOL,
            "regularization_slack": REG_SLACK,
            "agreement_tol": AGREEMENT_TOL,
            "state_gap_tol": STATE_GAP_TOL,
            "fubini_tol": FUBINI_TOL,
            "representation_tol": REP_TOL,
            "norm_tol": NORM_TOL,
        },
        "checks": summary,
    }
    if config.suite == "negative-control":
        found = [
            {"dim": r.dim, "trial": r.trial, "check": r.check, "margin": r.margin}
            for r in rows
            if r.observation and not r.verdict
        ]
        report["counterexamples"] = found
    return report


def exit_code_for(config, report):
    if report["violations"]:
        return 1
    if config.suite == "negative-control" and not report["counterexamples"]:
        return 1
    return 0


def rows_to_csv(config, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in rows:
        writer.writerow([config.suite, config.seed, r.dim, r.trial, r.check, repr(float(r.margin)), str(r.verdict).lower()])
    return buf.getvalue()


def report_to_json(report):
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def run_suite(config):
    """Run a suite, write its report if ``config.out`` is set, and return a
    :class:`SuiteResult` whose ``exit_code`` is 0 (satisfied) or 1 (violations)."""
    rows = _collect(config)
    report = build_report(config, rows)
    code = exit_code_for(config, report)
    if config.out:
        text = rows_to_csv(config, rows) if config.format == "csv" else report_to_json(report)
        with open(config.out, "w") as fh:
            fh.write(text)
    return SuiteResult(config, rows, code, report)


# benchmark ------------------------------------------------------------------

@dataclass(frozen=True)
class BenchRecord:
    method: str
    dim: int
    nodes: int
    seconds: float
    error: float


BENCH_COLUMNS = ("method", "dim", "nodes", "seconds", "error")


def bench_matrix(n, seed):
    """Fixed test matrix with spectrum ``logspace(-6, 2, n)`` in a random basis.

    The 1e-6 end keeps the quadrature error above roundoff up to N = 128.
    """
    rng = SplitMix64.for_trial(seed, n)
    q, _ = np.linalg.qr(rng.uniform(-1.0, 1.0, size=(n, n)))
    return symcore.sym((q * np.logspace(-6, 2, n)) @ q.T)


def _timed(fn, min_time=1e-3):
    reps, start = 0, time.perf_counter()
    while True:
        out = fn()
        reps += 1
        elapsed = time.perf_counter() - start
        if elapsed >= min_time:
            return out, elapsed / reps


def bench(dims, nodes_list, seed=42):
    records = []
    for n in dims:
        a = bench_matrix(n, seed)
        oracle, t = _timed(lambda: symcore.sqrt_spectral(a))
        records.append(BenchRecord("spectral", n, 0, t, 0.0))
        for N in nodes_list:
            rule = msr.make_rule(N)
            root, t = _timed(lambda: msr.sqrt_integral(a, rule))
            records.append(BenchRecord("integral", n, N, t, symcore.order_unit_norm(root - oracle)))
        (root, _), t = _timed(lambda: msr.denman_beavers(a))
        records.append(BenchRecord("denman-beavers", n, 0, t, symcore.order_unit_norm(root - oracle)))
    return records


def bench_to_csv(records):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(BENCH_COLUMNS)
    for r in records:
        writer.writerow([r.method, r.dim, r.nodes, repr(r.seconds), repr(r.error)])
    return buf.getvalue()


def bench_svg(records, path):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    for n in sorted({r.dim for r in records}):
        pts = [(r.nodes, r.error) for r in records if r.method == "integral" and r.dim == n]
        if pts:
            xs, ys = zip(*pts)
            ax.semilogy(xs, np.maximum(ys, 1e-17), marker="o", label=f"n={n}")
    ax.set_xlabel("quadrature nodes N")
    ax.set_ylabel("error vs spectral root")
    ax.set_xscale("log", base=2)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
