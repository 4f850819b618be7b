import numpy as np
import pytest

from abstention import search
from abstention.problems import LabeledSet, UnlabeledSet, sample_labeled, sample_unlabeled, \
    two_gaussian
from abstention.surrogate import FourierFeatures, SolverConfig, SurrogateModel, features_for

DUMMY = LabeledSet(np.zeros((4, 1)), np.array([1, -1, 1, -1]))
UNL = UnlabeledSet(np.zeros((4, 1)))


class FakeModel:
    def __init__(self, lam):
        self.lam = lam
        self.config = {"objective": lam}


def patch_curve(monkeypatch, curve):
    """Replace training with a model whose unlabeled rejection is curve(lambda)."""
    monkeypatch.setattr(search, "train_fixed_cost", lambda lab, lam, f, cfg: FakeModel(lam))
    monkeypatch.setattr(search, "rejection_rate", lambda model, pts: curve(model.lam))


def test_first_round_is_quarter(monkeypatch):
    patch_curve(monkeypatch, lambda lam: 0.2)
    res = search.run_search(DUMMY, UNL, 0.2, None, alpha_m=0.0)
    assert res.trace[0].lam == 0.25
    assert res.stop_reason == search.STOP_TOLERANCE and res.iterations == 1


def test_bracket_logic_and_halving(monkeypatch):
    # rejection falls linearly as the cost rises
    patch_curve(monkeypatch, lambda lam: 1.0 - 2.0 * lam)
    res = search.run_search(DUMMY, UNL, 0.3, None, alpha_m=0.0, tol=1e-9, max_iter=10)
    rows = res.trace
    assert len(rows) == res.iterations
    for k, row in enumerate(rows):
        assert row.lower < row.lam < row.upper
        assert row.upper - row.lower == pytest.approx(0.5 * 2.0**-k)
        assert 0 < row.lam < 0.5
    for a, b in zip(rows, rows[1:]):
        if a.Q > 0.3:
            assert (b.lower, b.upper) == (a.lam, a.upper)
        else:
            assert (b.lower, b.upper) == (a.lower, a.lam)
        assert b.lam == (b.lower + b.upper) / 2
    assert res.Q <= 0.3


def test_max_iterations_returns_closest_feasible(monkeypatch):
    patch_curve(monkeypatch, lambda lam: 1.0 - 2.0 * lam)
    res = search.run_search(DUMMY, UNL, 0.3, None, alpha_m=0.0, tol=1e-12, max_iter=6)
    assert res.stop_reason == search.STOP_MAX_ITER
    feasible = [r for r in res.trace if r.Q <= 0.3]
    assert res.Q == max(r.Q for r in feasible)


def test_interval_override(monkeypatch):
    patch_curve(monkeypatch, lambda lam: 1.0 - 2.0 * lam)
    res = search.run_search(DUMMY, UNL, 0.3, None, alpha_m=0.0, interval=(0.2, 0.3))
    assert res.stop_reason == search.STOP_INTERVAL
    assert 0.2 <= res.Q <= 0.3


def test_failure_carries_trace(monkeypatch):
    patch_curve(monkeypatch, lambda lam: 0.9)
    with pytest.raises(search.SearchFailed) as info:
        search.run_search(DUMMY, UNL, 0.3, None, max_iter=4)
    assert len(info.value.trace) == 4


def test_trace_csv_columns(monkeypatch):
    patch_curve(monkeypatch, lambda lam: 1.0 - 2.0 * lam)
    res = search.run_search(DUMMY, UNL, 0.3, None, alpha_m=0.0, max_iter=3, tol=1e-9)
    lines = res.trace_csv().splitlines()
    assert lines[0] == "iter,lambda,rejection,Q,objective"
    assert len(lines) == 4


def test_argument_checks():
    with pytest.raises(ValueError):
        search.run_search(DUMMY, UNL, 1.0, None)
    with pytest.raises(ValueError):
        search.run_search(DUMMY, UNL, 0.2, None, tol=0.0)


def test_default_alpha():
    assert search.default_alpha(10**4) == pytest.approx(0.001)


def test_evaluate_search_all_reject():
    f = FourierFeatures(np.zeros((1, 1)), np.zeros(1), 1.0, 0)
    model = SurrogateModel(f, np.zeros(1), 0.0, np.zeros(1), -1.0)
    res = search.SearchResult(0.25, model, 1, [])
    m = search.evaluate_search(res, DUMMY)
    assert m.rejection_rate == 1.0 and m.risk == 0.0


@pytest.fixture(scope="module")
def gaussian_run():
    p = two_gaussian()
    lab, unl = sample_labeled(p, 2000, 0), sample_unlabeled(p, 2000, 0)
    X, y = p.sample_xy(10**4, np.random.default_rng([0, 4]))
    feats = features_for(lab.X, 100, None, 0)
    return lab, unl, LabeledSet(X, y), feats


def test_real_search_budget(gaussian_run):
    lab, unl, test, feats = gaussian_run
    cfg = SolverConfig(step=20.0, reg=1e-5)
    res = search.run_search(lab, unl, 0.3, feats, cfg)
    assert res.iterations <= 12 and res.Q <= 0.3
    m = search.evaluate_search(res, test)
    from abstention.surrogate import train_fixed_cost
    from abstention.plugin import evaluate
    base = evaluate(train_fixed_cost(lab, 0.49, feats, cfg), test, 0)
    assert m.accuracy_on_accepted >= base.accuracy_on_accepted
    assert 0.3 - 0.05 <= m.rejection_rate <= 0.3
