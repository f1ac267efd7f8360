from collections import Counter

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.stats import binom

from powersat.dist import DistSpec, moment
from powersat.genmodel import (DegenerateParity, DegreeSequence, Formula, build_formula, export_dimacs,
                               parse_dimacs, read_dimacs, sample_degrees, sample_formula, stats,
                               stats_from_lit_degrees, write_dimacs)
from powersat.rng import derive_stream


def test_constant_degrees_accepted():
    degs = sample_degrees(DistSpec.const(2), 5, 2, np.random.default_rng(0))
    assert degs.degrees.tolist() == [2, 2, 2, 2, 2]


def test_degenerate_parity():
    with pytest.raises(DegenerateParity):
        sample_degrees(DistSpec.const(1), 3, 2, np.random.default_rng(0))
    with pytest.raises(DegenerateParity):
        sample_degrees(DistSpec.const(2), 5, 3, np.random.default_rng(0))


def test_rejection_exhaustion_reported():
    # pareto with a huge alpha is almost always all ones: n=3 gives odd sums
    with pytest.raises(DegenerateParity):
        sample_degrees(DistSpec.pareto(200.0), 3, 2, np.random.default_rng(0), max_rejections=5)


def test_degree_sequence_validation():
    with pytest.raises(ValueError):
        DegreeSequence(np.array([1, 2]), 2)
    with pytest.raises(ValueError):
        DegreeSequence(np.array([0, 2]), 2)


def test_mean_degree_zeta4():
    hits = 0
    for j in range(100):
        degs = sample_degrees(DistSpec.zeta(4.0), 10 ** 4, 2, derive_stream(77, j))
        hits += abs(degs.total / degs.n - moment(DistSpec.zeta(4.0), 1)) <= 0.05
    assert hits >= 95


def test_single_clause_polarity_patterns():
    degs = DegreeSequence(np.array([1, 1]), 2)
    rng = np.random.default_rng(1)
    counts = Counter()
    for _ in range(4000):
        f = build_formula(degs, rng)
        assert f.n_clauses == 1 and sorted(abs(x) for x in f.clauses[0]) == [1, 2]
        a, b = sorted(f.clauses[0].tolist(), key=abs)
        counts[(a > 0, b > 0)] += 1
    assert len(counts) == 4
    for c in counts.values():
        assert abs(c / 4000 - 0.25) <= 0.03


def test_two_by_two_pairing_probabilities():
    degs = DegreeSequence(np.array([2, 2]), 2)
    rng = np.random.default_rng(2)
    mixed = 0
    for _ in range(4000):
        f = build_formula(degs, rng)
        pairs = sorted(tuple(sorted(abs(x) for x in row)) for row in f.clauses.tolist())
        assert pairs in ([(1, 2), (1, 2)], [(1, 1), (2, 2)])
        mixed += pairs == [(1, 2), (1, 2)]
    assert abs(mixed / 4000 - 2 / 3) <= 0.03


def _perfect_matchings(items):
    if not items:
        yield []
        return
    first = items[0]
    for i in range(1, len(items)):
        rest = items[1:i] + items[i + 1:]
        for m in _perfect_matchings(rest):
            yield [(first, items[i])] + m


@pytest.mark.parametrize("degrees", [[3, 1, 2, 2], [1, 1, 1, 1, 2, 2], [4, 2, 1, 1]])
def test_matching_uniformity_against_enumeration(degrees):
    clones = [v + 1 for v, d in enumerate(degrees) for _ in range(d)]
    exact = Counter()
    for m in _perfect_matchings(list(range(len(clones)))):
        key = tuple(sorted(tuple(sorted((clones[a], clones[b]))) for a, b in m))
        exact[key] += 1
    total = sum(exact.values())
    degs = DegreeSequence(np.array(degrees), 2)
    rng = np.random.default_rng(sum(degrees))
    runs = 10 ** 5
    seen = Counter()
    for _ in range(runs):
        f = build_formula(degs, rng)
        seen[tuple(sorted(tuple(sorted(abs(x) for x in row)) for row in f.clauses.tolist()))] += 1
    keys = set(exact) | set(seen)
    tv = 0.5 * sum(abs(exact[k] / total - seen[k] / runs) for k in keys)
    assert tv <= 0.02


@pytest.mark.parametrize("d", [2, 3, 5])
def test_positive_degree_is_binomial(d):
    pos = []
    for j in range(100):
        f = sample_formula(DistSpec.const(d), 1000, 2, derive_stream(5, d, j))
        pos.append(f.lit_degrees[:, 0])
    pos = np.concatenate(pos)
    emp = np.bincount(pos, minlength=d + 1) / pos.size
    tv = 0.5 * np.abs(emp - binom.pmf(np.arange(d + 1), d, 0.5)).sum()
    assert tv <= 0.02


def test_pair_moment_constant_two():
    prod = []
    for j in range(100):
        f = sample_formula(DistSpec.const(2), 1000, 2, derive_stream(6, j))
        prod.append(f.lit_degrees[:, 0] * f.lit_degrees[:, 1])
    assert abs(np.concatenate(prod).mean() - 0.5) <= 0.02


@given(st.sampled_from(["zeta:2.5", "zeta:4", "pareto:1.5", "const:2", "const:3"]),
       st.integers(4, 200), st.sampled_from([2, 3, 4]), st.integers(0, 2 ** 32))
def test_formula_invariants(dist, n, k, seed):
    d = DistSpec.parse(dist)
    rng = np.random.default_rng(seed)
    try:
        degs = sample_degrees(d, n, k, rng, max_rejections=1000)
    except DegenerateParity:
        return
    f = build_formula(degs, rng)
    assert f.n_clauses * k == degs.total
    assert np.array_equal(f.lit_degrees.sum(axis=1), degs.degrees)
    occ = np.bincount(np.abs(f.clauses).ravel() - 1, minlength=n)
    assert np.array_equal(occ, degs.degrees)
    s = stats(f)
    assert s.S_n == k * f.n_clauses and s.Delta <= s.S_n and s.T_n >= 0
    assert s.ratio == 2 * s.T_n / s.S_n


def test_stats_examples():
    s = stats_from_lit_degrees([(1, 1), (1, 1)])
    assert (s.S_n, s.T_n, s.Delta, s.ratio) == (4, 2, 2, 1.0)
    s = stats_from_lit_degrees([(3, 0), (0, 2), (1, 0)])
    assert (s.S_n, s.T_n, s.ratio) == (6, 0, 0.0)
    assert s.mu == -1.0


def test_mean_ratio_zeta4():
    ratios = [stats(sample_formula(DistSpec.zeta(4.0), 10 ** 5, 2, derive_stream(8, j))).ratio
              for j in range(100)]
    assert abs(np.mean(ratios) - 0.184216388810102937) <= 0.05


def test_dimacs_examples():
    f = Formula.from_clauses(2, [(1, -2)])
    assert export_dimacs(f) == "p cnf 2 1\n1 -2 0\n"
    assert export_dimacs(Formula.from_clauses(3, [])) == "p cnf 3 0\n"


clause_lists = st.integers(1, 12).flatmap(lambda n: st.tuples(
    st.just(n), st.sampled_from([2, 3]).flatmap(lambda k: st.lists(
        st.lists(st.integers(1, n).flatmap(lambda v: st.sampled_from([v, -v])), min_size=k, max_size=k),
        max_size=30))))


@given(clause_lists)
def test_dimacs_round_trip(case):
    n, clauses = case
    f = Formula.from_clauses(n, clauses) if clauses else Formula.from_clauses(n, [], k=2)
    g = parse_dimacs(export_dimacs(f))
    assert g.n_vars == f.n_vars and np.array_equal(g.clauses, f.clauses)
    assert np.array_equal(g.lit_degrees, f.lit_degrees)


def test_dimacs_parser_tolerates_layout():
    text = "c a comment\np cnf 3 2\n1 -2\n 0 3\n-1 0\n"
    f = parse_dimacs(text)
    assert f.clause_list() == [(1, -2), (3, -1)]


@pytest.mark.parametrize("text", ["p cnf 3 2\n1 2 0\n", "p cnf 3 2\n1 2 0\n1 2 3 0\n", "1 2 0\n",
                                  "p cnf 2 1\n1 5 0\n"])
def test_dimacs_rejects_bad_input(text):
    with pytest.raises(ValueError):
        parse_dimacs(text)


def test_dimacs_file_io(tmp_path):
    f = sample_formula(DistSpec.zeta(3.0), 500, 2, np.random.default_rng(4))
    path = tmp_path / "f.cnf"
    write_dimacs(f, path)
    assert np.array_equal(read_dimacs(path).clauses, f.clauses)


def test_generation_is_deterministic():
    a = export_dimacs(sample_formula(DistSpec.zeta(2.5), 3000, 2, derive_stream(1, 2, 3)))
    b = export_dimacs(sample_formula(DistSpec.zeta(2.5), 3000, 2, derive_stream(1, 2, 3)))
    assert a == b


def test_self_complementary_clauses_kept():
    # constant(2) with n=1 is only the clause (x or x) / (x or -x) family
    seen = set()
    rng = np.random.default_rng(0)
    for _ in range(50):
        f = build_formula(DegreeSequence(np.array([2]), 2), rng)
        seen.add(tuple(sorted(f.clauses[0].tolist())))
    assert (-1, 1) in seen


def test_formula_is_immutable():
    f = Formula.from_clauses(2, [(1, 2)])
    with pytest.raises(ValueError):
        f.clauses[0, 0] = 5
