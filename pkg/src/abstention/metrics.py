"""Empirical and exact performance summaries for abstaining classifiers."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .problems import ABSTAIN


@dataclass(frozen=True)
class Metrics:
    risk: float
    rejection_rate: float
    accuracy_on_accepted: float
    n: int

    def as_dict(self):
        return asdict(self)


def evaluate_decisions(decisions, labels) -> Metrics:
    """Risk counts an error only on declared points; abstaining is free."""
    d = np.asarray(decisions)
    y = np.asarray(labels)
    if d.size == 0:
        raise ValueError("no decisions to evaluate")
    declared = d != ABSTAIN
    wrong = declared & (d != y)
    n_declared = int(declared.sum())
    acc = 1.0 if n_declared == 0 else 1.0 - wrong.sum() / n_declared
    return Metrics(float(wrong.mean()), float(1.0 - declared.mean()), float(acc), int(d.size))


def expected_risk(probs, eta) -> float:
    """Mean over points of P(+1)(1 - eta) + P(-1) eta for decision probabilities."""
    probs = np.asarray(probs)
    eta = np.asarray(eta)
    return float(np.mean(probs[:, 1] * (1 - eta) + probs[:, 0] * eta))


def population_risk(problem, classifier, n_mc: int = 200_000, seed: int = 0):
    """(risk, abstention probability) of ``classifier`` under ``problem``.

    Exact for atoms problems and, when the classifier exposes its
    ``breakpoints()``, for one-dimensional uniform problems.  Otherwise a
    Monte-Carlo average of the expected loss given X (no label noise).
    """
    if problem.kind == "atoms":
        locs = np.array([a.location for a in problem.atoms])
        mass = np.array([a.mass for a in problem.atoms])
        etas = np.array([a.eta for a in problem.atoms])
        probs = classifier.decision_probs(locs)
        risk = np.sum(mass * (probs[:, 1] * (1 - etas) + probs[:, 0] * etas))
        return float(risk), float(np.sum(mass * probs[:, 2]))
    if problem.dim == 1 and problem.kind != "two-gaussian" and hasattr(classifier, "breakpoints"):
        edges = np.unique(np.concatenate([[0.0, 1.0], classifier.breakpoints()]))
        a, b = edges[:-1], edges[1:]
        probs = classifier.decision_probs(((a + b) / 2).reshape(-1, 1))
        nodes, weights = np.polynomial.legendre.leggauss(8)
        half = (b - a) / 2
        pts = (a + b)[:, None] / 2 + half[:, None] * nodes[None, :]
        eta = problem.eta_many(pts.reshape(-1, 1)).reshape(pts.shape)
        int_eta = half * (eta @ weights)
        int_rest = (b - a) - int_eta
        risk = np.sum(probs[:, 1] * int_rest + probs[:, 0] * int_eta)
        return float(risk), float(np.sum(probs[:, 2] * (b - a)))
    rng = np.random.default_rng([seed, 7])
    X = problem.sample_points(n_mc, rng)
    probs = classifier.decision_probs(X)
    return expected_risk(probs, problem.eta_many(X)), float(np.mean(probs[:, 2]))
