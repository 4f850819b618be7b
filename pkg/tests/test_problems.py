import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from abstention.problems import (
    ABSTAIN, NEG, POS, Atom, DomainError, Region, atoms_problem, bayes_risk, bayes_rule,
    bayes_threshold, classify, dump_atoms_csv, eta, greedy_oracle, linear1d, load_atoms_csv,
    rule_risk, sample_labeled, sample_unlabeled, sine1d, smooth_nd, three_atoms,
)
from abstention.metrics import population_risk


def test_eta_catalog_values():
    assert eta(linear1d(), 0.3) == pytest.approx(0.3)
    assert eta(linear1d(), 0.5) == 0.5
    assert eta(three_atoms(), 0.5) == 0.9


def test_eta_outside_support():
    with pytest.raises(DomainError):
        eta(linear1d(), 1.2)
    with pytest.raises(DomainError):
        eta(three_atoms(), 0.3)


def test_atoms_validation():
    with pytest.raises(ValueError):
        atoms_problem([Atom((0.1,), 0.5, 0.2), Atom((0.2,), 0.4, 0.2)])
    with pytest.raises(ValueError):
        atoms_problem([Atom((0.1,), 0.5, 0.2), Atom((0.1,), 0.5, 0.3)])
    with pytest.raises(ValueError):
        Atom((0.1,), 0.0, 0.5)


def test_label_fraction_linear():
    data = sample_labeled(linear1d(), 10**5, seed=0)
    assert abs(np.mean(data.y == 1) - 0.5) <= 0.01


def test_atom_mass_frequency():
    pts = sample_unlabeled(three_atoms(), 10**5, seed=0).X
    assert abs(np.mean(pts[:, 0] == 0.1) - 1 / 3) <= 0.01


def test_sampling_is_seeded():
    a = sample_labeled(sine1d(), 50, seed=3)
    b = sample_labeled(sine1d(), 50, seed=3)
    assert np.array_equal(a.X, b.X) and np.array_equal(a.y, b.y)
    c = sample_unlabeled(sine1d(), 50, seed=3)
    assert not np.array_equal(a.X, c.X)


def test_threshold_examples():
    assert bayes_threshold(linear1d(), 0.2) == pytest.approx(0.1, abs=1e-12)
    assert bayes_threshold(linear1d(), 1e-12) == pytest.approx(0.0, abs=1e-11)
    assert bayes_threshold(three_atoms(), 0.5) == pytest.approx(0.4, abs=1e-12)


def test_rule_three_atoms():
    p = three_atoms()
    rule = bayes_rule(p, 0.5)
    assert rule.region(0.1) is Region.ABSTAIN
    assert rule.region(0.5) is Region.BOUNDARY_POS
    assert rule.region(0.9) is Region.BOUNDARY_NEG
    assert rule.c0 == pytest.approx(0.25, abs=1e-12)
    assert rule.abstention == pytest.approx(0.5, abs=1e-12)


def test_rule_linear_continuous():
    rule = bayes_rule(linear1d(), 0.2)
    assert rule.c0 == 0.0
    assert rule.region(0.45) is Region.ABSTAIN
    assert rule.region(0.35) is Region.NEG
    assert rule.region(0.65) is Region.POS


def test_c0_zero_when_budget_matches_core():
    # core {a} has mass exactly 1/2
    p = atoms_problem([Atom((0.1,), 0.5, 0.5), Atom((0.6,), 0.25, 0.8), Atom((0.9,), 0.25, 0.1)])
    assert bayes_rule(p, 0.5).c0 == 0.0


def test_risk_examples():
    assert bayes_risk(linear1d(), 0.2) == pytest.approx(0.16, abs=1e-10)
    assert bayes_risk(linear1d(), 0.0) == pytest.approx(0.25, abs=1e-10)
    assert bayes_risk(three_atoms(), 0.5) == pytest.approx(0.05, abs=1e-12)


def test_greedy_examples():
    p = three_atoms()
    assert greedy_oracle(p, 0.5)[0] == pytest.approx(0.05, abs=1e-12)
    assert greedy_oracle(p, 1.0)[0] == pytest.approx(0.0, abs=1e-12)
    plain = math.fsum(a.mass * min(a.eta, 1 - a.eta) for a in p.atoms)
    assert greedy_oracle(p, 0.0)[0] == pytest.approx(plain, abs=1e-12)


def test_classify_examples():
    p = three_atoms()
    rule = bayes_rule(p, 0.5)
    assert classify(rule, 0.5, 0.1) == ABSTAIN
    assert classify(rule, 0.5, 0.9) == POS
    assert classify(rule, 0.9, 0.9) == NEG
    lin = bayes_rule(linear1d(), 0.2)
    assert all(classify(lin, 0.8, u) == POS for u in (0.0, 0.5, 0.99))


def test_classify_degenerate_randomization():
    p = atoms_problem([Atom((0.1,), 0.5, 0.5), Atom((0.6,), 0.25, 0.8), Atom((0.9,), 0.25, 0.1)])
    rule = bayes_rule(p, 0.5)
    assert rule.region(0.6) is Region.POS or rule.c0 == 0.0
    assert classify(rule, 0.6, 0.0) == POS


def test_sine_closed_form_matches_quadrature():
    p = sine1d(frequency=2, amplitude=0.4)
    x = (np.arange(10**6) + 0.5) / 10**6
    e = 0.5 + 0.4 * np.sin(4 * np.pi * x)
    for delta in (0.1, 0.3, 0.7):
        g = bayes_threshold(p, delta)
        assert np.mean(np.abs(e - 0.5) <= g) == pytest.approx(delta, abs=1e-5)
        quad = np.mean(np.minimum(e, 1 - e) * (np.abs(e - 0.5) > g))
        assert bayes_risk(p, delta) == pytest.approx(quad, abs=1e-6)


def test_smooth_nd_threshold_by_bisection():
    p = smooth_nd(dim=2)
    g = bayes_threshold(p, 0.3)
    assert p.level_cdf(g) <= 0.3
    assert p.level_cdf(g + 1e-3) > 0.3


def test_atoms_csv_round_trip():
    p = three_atoms()
    q = load_atoms_csv(dump_atoms_csv(p))
    assert q.atoms == p.atoms


def random_atoms(rng, max_atoms=12):
    k = int(rng.integers(1, max_atoms + 1))
    mass = rng.random(k) + 0.05
    mass = mass / mass.sum()
    mass[-1] = 1.0 - math.fsum(mass[:-1])
    # a few repeated eta levels so boundary sets carry mass
    levels = rng.choice([0.5, 0.6, 0.4, 0.75, 0.25, 0.9, 0.1, 0.95, 0.05], size=k)
    etas = np.where(rng.random(k) < 0.5, levels, rng.random(k))
    locs = rng.permutation(1000)[:k] / 1000.0
    return atoms_problem([Atom((float(x),), float(m), float(e)) for x, m, e in zip(locs, mass, etas)])


def test_oracle_equivalence_sweep():
    rng = np.random.default_rng(0)
    for _ in range(100):
        p = random_atoms(rng)
        delta = float(rng.random())
        assert abs(bayes_risk(p, delta) - greedy_oracle(p, delta)[0]) <= 1e-9


def test_exact_budget_on_atoms():
    rng = np.random.default_rng(1)
    for _ in range(100):
        p = random_atoms(rng)
        delta = float(rng.random())
        rule = bayes_rule(p, delta)
        if rule.delta1 < delta <= rule.delta2:
            assert abs(rule.abstention - delta) <= 1e-12
        _, abst = population_risk(p, rule)
        assert abst <= delta + 1e-12


def test_dominance_over_random_rules():
    rng = np.random.default_rng(2)
    for _ in range(100):
        p = random_atoms(rng)
        delta = float(rng.random())
        mass = np.array([a.mass for a in p.atoms])
        etas = np.array([a.eta for a in p.atoms])
        abst = rng.random(len(mass))
        spent = float(mass @ abst)
        if spent > delta:
            abst *= delta / spent
        q_pos = rng.random(len(mass))
        risk = float(np.sum(mass * (1 - abst) * (q_pos * (1 - etas) + (1 - q_pos) * etas)))
        assert risk >= bayes_risk(p, delta) - 1e-9


@pytest.mark.parametrize("problem", [linear1d(), sine1d(), sine1d(3, 0.5), smooth_nd(2), three_atoms()],
                         ids=["linear1d", "sine1d", "sine1d-k3", "smooth-2d", "atoms"])
def test_monotone_risk_and_threshold_consistency(problem):
    grid = np.round(np.arange(0, 0.96, 0.05), 2)
    risks = [bayes_risk(problem, d) for d in grid]
    assert all(b <= a + 1e-12 for a, b in zip(risks, risks[1:]))
    for d in grid:
        g = bayes_threshold(problem, d)
        if problem.kind == "atoms":
            levels = np.array([abs(a.eta - 0.5) for a in problem.atoms])
            mass = np.array([a.mass for a in problem.atoms])
            strict = float(mass[levels < g].sum())
        else:
            strict = problem.level_cdf(g - 1e-12) if g > 0 else 0.0
        assert strict <= d + 1e-9


@settings(max_examples=50, deadline=None)
@given(st.floats(0.0, 1.0), st.floats(0.01, 0.99))
def test_linear_eta_in_unit_interval(x, delta):
    rule = bayes_rule(linear1d(), delta)
    assert 0.0 <= eta(linear1d(), x) <= 1.0
    assert isinstance(rule.region(x), Region)


def test_rule_risk_matches_population_risk_on_atoms():
    p = three_atoms()
    rule = bayes_rule(p, 0.5)
    risk, abst = population_risk(p, rule)
    assert risk == pytest.approx(rule_risk(rule), abs=1e-12)
    assert abst == pytest.approx(0.5, abs=1e-12)
