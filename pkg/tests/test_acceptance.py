"""The eleven acceptance criteria, each at its stated size and tolerance.

Each test records one ``criterion N: PASS|FAIL ...`` line, printed in the
terminal summary, before asserting.
"""

import time

import pytest

from conftest import ACCEPTANCE_LINES
from powersat.dist import DistSpec, beta0_residual, criterion_side, limit_ratio, solve_beta0
from powersat.genmodel import DegenerateParity, Formula, sample_formula, stats
from powersat.harness import SweepConfig, monotone_up_to_overlap, run_sweep, strip_timing
from powersat.probe import azuma_probe, bicycle_count_probe, pair_moment_probe, scaling_probe, MAX_DEGREE
from powersat.rng import default_master_seed, derive_stream
from powersat.solver import brute_force_sat, decide
from powersat.tspan import SubcriticalRatio, run_search

MASTER = default_master_seed()
SWEEP_BETAS = [2.2, 2.6, 3.0, 4.0, 5.0]
FOUND_CHECKS = []  # (found, decide verdict) pairs gathered for criterion 7


def report(number, ok, detail):
    ACCEPTANCE_LINES.append(f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}")


def sweep_config():
    return SweepConfig([DistSpec.zeta(b) for b in SWEEP_BETAS], [30000], trials=50, master_seed=MASTER,
                       run_tspan=True)


@pytest.fixture(scope="module")
def sweep():
    t0 = time.perf_counter()
    result = run_sweep(sweep_config())
    return result, time.perf_counter() - t0


def _random_small_formula(j):
    rng = derive_stream(MASTER, 1, j)
    n = int(rng.integers(1, 13))
    model = j % 4
    if model == 0:
        m = int(rng.integers(1, 4 * n + 1))
        lits = rng.integers(1, n + 1, size=(m, 2)) * rng.choice([-1, 1], size=(m, 2))
        return Formula.from_clauses(n, lits, k=2)
    dist = [DistSpec.zeta(2.5), DistSpec.pareto(1.5), DistSpec.const(3)][model - 1]
    n = max(n, 2)
    try:
        return sample_formula(dist, n, 2, rng)
    except DegenerateParity:
        return sample_formula(dist, n + 1, 2, rng)


def test_criterion_1_solver_oracle():
    t0 = time.perf_counter()
    agree = 0
    for j in range(1000):
        f = _random_small_formula(j)
        agree += decide(f).is_sat == brute_force_sat(f)
    elapsed = time.perf_counter() - t0
    ok = agree == 1000 and elapsed < 10
    report(1, ok, f"{agree}/1000 agree with enumeration in {elapsed:.2f}s")
    assert ok


def test_criterion_2_threshold_location():
    b = solve_beta0()
    res = beta0_residual(b)
    ok = 3.25 <= b <= 3.28 and abs(res) < 1e-4
    report(2, ok, f"beta0 = {b:.9f}, residual {res:.1e}")
    assert ok


def test_criterion_3_phase_sweep(sweep):
    result, elapsed = sweep
    fracs = {s["dist"]: s["sat_fraction"] for s in result.summary}
    unsat_ok = all(fracs[f"zeta:{b:g}"] <= 0.1 for b in (2.2, 2.6, 3.0))
    assert all(criterion_side(DistSpec.zeta(b)) == "SAT" for b in (4.0, 5.0))
    sat_ok = all(fracs[f"zeta:{b:g}"] >= 0.9 for b in (4.0, 5.0))
    mono = monotone_up_to_overlap(result.summary)
    ok = unsat_ok and sat_ok and mono and elapsed < 15 * 60
    shown = ", ".join(f"{k}={v:.2f}" for k, v in fracs.items())
    report(3, ok, f"SAT fractions {shown}; monotone={mono}; {elapsed:.0f}s")
    for rec in result.records:
        if rec.tspan_outcome == "Found":
            FOUND_CHECKS.append(rec.verdict)
    assert ok


def test_criterion_4_ratio_concentration():
    ref = limit_ratio(DistSpec.zeta(4.0))
    close = 0
    for j in range(100):
        f = sample_formula(DistSpec.zeta(4.0), 10 ** 5, 2, derive_stream(MASTER, 4, j))
        close += abs(stats(f).ratio - ref) <= 0.05
    ok = close >= 95 and abs(ref - 0.184) < 0.001
    report(4, ok, f"{close}/100 trials within 0.05 of {ref:.6f}")
    assert ok


def test_criterion_5_pair_moment_identity():
    details, ok = [], True
    for d in range(2, 7):
        est = pair_moment_probe(DistSpec.const(d), 10 ** 4, 10, seed=MASTER + d)
        assert est.samples == 10 ** 5
        good = abs(est.mean - (d * d - d) / 4) <= 3 * est.stderr
        ok &= good
        details.append(f"d={d}: {est.mean:.4f}+-{est.stderr:.4f} vs {(d * d - d) / 4}")
    report(5, ok, "; ".join(details))
    assert ok


def test_criterion_6_max_degree_scaling():
    rep = scaling_probe(DistSpec.pareto(2.5), MAX_DEGREE, [10 ** 3, 10 ** 4, 10 ** 5, 10 ** 6], 30, seed=MASTER)
    ok = 0.25 <= rep.fitted_exponent <= 0.55
    report(6, ok, f"slope {rep.fitted_exponent:.3f} +- {rep.exponent_stderr:.3f} (target 0.4)")
    assert ok


def test_criterion_8_tspan_efficacy():
    found = unsat = subcritical = 0
    for j in range(20):
        rng = derive_stream(MASTER, 8, j)
        f = sample_formula(DistSpec.zeta(3.1), 10 ** 5, 2, rng)
        verdict = decide(f).verdict
        unsat += verdict == "UNSAT"
        try:
            _, res = run_search(f, 2.1, rng)
        except SubcriticalRatio:
            subcritical += 1
            continue
        if res.found:
            found += 1
            FOUND_CHECKS.append(verdict)
    ok = found >= 16
    report(8, ok, f"Found in {found}/20 seeds (need 16); {unsat}/20 formulas are UNSAT; "
                  f"{subcritical} had ratio <= 1")
    assert ok


def test_criterion_7_tspan_soundness(sweep):
    # unit corpus: small formulas against enumeration, plus mid-size generated ones
    from powersat.tspan import SpanParams, search_contradictory_paths
    corpus = 0
    for j in range(400):
        f = _random_small_formula(j)
        res = search_contradictory_paths(f, SpanParams(2, 1, 8, 40, 0.5), derive_stream(MASTER, 7, j),
                                         connected_cap=2 * f.n_clauses)
        if res.found:
            corpus += 1
            FOUND_CHECKS.append("UNSAT" if not brute_force_sat(f) else "SAT")
    for j in range(30):
        rng = derive_stream(MASTER, 70, j)
        beta = [2.2, 2.6, 3.0][j % 3]
        f = sample_formula(DistSpec.zeta(beta), 20000, 2, rng)
        _, res = run_search(f, beta - 1, rng, override=True)
        if res.found:
            corpus += 1
            FOUND_CHECKS.append(decide(f).verdict)
    sweep_found = sum(r.tspan_outcome == "Found" for r in sweep[0].records)
    bad = sum(v != "UNSAT" for v in FOUND_CHECKS) + sum(
        r.tspan_outcome == "Found" and r.verdict != "UNSAT" for r in sweep[0].records)
    ok = bad == 0 and len(FOUND_CHECKS) > 0
    report(7, ok, f"{bad} unsound out of {len(FOUND_CHECKS)} Found results "
                  f"({sweep_found} in the sweep, {corpus} in the unit corpus)")
    assert ok


def test_criterion_9_azuma_grid():
    worst = []
    ok = True
    for mu in (0.25, 0.5, 1.0):
        for eps in (0.1, 0.25, 0.4):
            for t in (10 ** 3, 10 ** 4):
                res = azuma_probe(mu, 2.5, t, eps, 10 ** 4, seed=MASTER)
                ok &= res.holds
                worst.append(res.empirical - res.bound)
    report(9, ok, f"18 cells, max(empirical - bound) = {max(worst):.3f}")
    assert ok


def test_criterion_10_bicycle_scarcity():
    rep = bicycle_count_probe(DistSpec.zeta(5.0), 10 ** 5, 20, max_len=25, seed=MASTER)
    sat = sum(v == "SAT" for v in rep.verdicts)
    ok = rep.mean <= 1 and rep.inconsistent == 0
    report(10, ok, f"mean bicycles {rep.mean:.2f} +- {rep.stderr:.2f} (bound {rep.mean_bound:.2e}); "
                   f"{sat}/20 SAT; {rep.inconsistent} UNSAT without a bicycle")
    assert ok


def test_criterion_11_determinism(sweep):
    again = run_sweep(sweep_config())
    ok = strip_timing(again.csv_text) == strip_timing(sweep[0].csv_text)
    report(11, ok, f"re-run of the criterion 3 sweep {'matches' if ok else 'differs'} "
                   f"({len(again.records)} rows, timing columns excluded)")
    assert ok
