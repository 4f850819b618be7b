"""Randomized plug-in abstaining classifier built on the adaptive histogram.

The unlabeled sample calibrates the abstention threshold: gamma_hat is the
largest achieved level |eta_hat - 1/2| whose empirical mass stays within
``delta - a_m``.  A band of width ``band`` just outside the threshold gets
randomized abstention with probability ``c_hat`` so the total abstention
rate approaches the budget.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .histogram import HistogramEstimator, b_n, e_S
from .metrics import Metrics, evaluate_decisions
from .problems import ABSTAIN, NEG, POS, LabeledSet, UnlabeledSet


def slack_a_m(m: int, scale: float = 1.0) -> float:
    """Deviation slack scale * sqrt(72 log(4m) / m), clipped to [0, 1]."""
    if m < 2:
        raise ValueError("need at least two unlabeled points")
    return min(1.0, max(0.0, scale * math.sqrt(72.0 * math.log(4 * m) / m)))


def margin(eta_hat_values) -> np.ndarray:
    """|eta_hat - 1/2| snapped to 12 decimals so mirror values tie exactly."""
    return np.round(np.abs(np.asarray(eta_hat_values, dtype=float) - 0.5), 12)


def estimate_threshold(eta_hat_values, delta: float, a_m: float) -> float:
    values = np.asarray(eta_hat_values, dtype=float).ravel()
    if values.size == 0:
        raise ValueError("empty unlabeled set")
    budget = delta - a_m
    if budget <= 0:
        return 0.0
    levels = np.sort(margin(values))
    candidates = np.unique(np.concatenate([[0.0], levels]))
    # empirical mass of {level <= c} for each candidate c
    mass = np.searchsorted(levels, candidates, side="right") / levels.size
    ok = candidates[mass <= budget]
    return float(ok.max()) if ok.size else 0.0


@dataclass(frozen=True)
class PluginClassifier:
    estimator: HistogramEstimator
    gamma_hat: float
    band: float
    c_hat: float
    a_m: float
    delta: float
    p1_hat: float
    p2_hat: float
    core_empty: bool = False

    def regions(self, X):
        """Integer codes: 0 core, +1/-1 sure label, +2/-2 randomized band."""
        eta_hat = self.estimator.predict(X)
        dev = eta_hat - 0.5
        level = margin(eta_hat)
        out = np.where(dev > 0, 1, -1)
        in_band = level <= self.gamma_hat + self.band
        out = np.where(in_band, 2 * out, out)
        if self.core_empty:
            # ties at 1/2 go to the positive band
            out = np.where((dev == 0) & in_band, 2, out)
        else:
            out = np.where(level <= self.gamma_hat, 0, out)
        return out

    def breakpoints(self) -> np.ndarray:
        """Cell edges of every grid on the ladder (one-dimensional use)."""
        edges = [np.arange(1, g.cells_per_axis) * g.h for g in self.estimator.grids]
        return np.unique(np.concatenate(edges)) if edges else np.empty(0)

    def decision_probs(self, X) -> np.ndarray:
        """Rows (P(-1), P(+1), P(abstain))."""
        reg = self.regions(X)
        out = np.zeros((len(reg), 3))
        out[reg == -1, 0] = 1.0
        out[reg == 1, 1] = 1.0
        out[reg == 0, 2] = 1.0
        out[reg == -2, 0] = 1.0 - self.c_hat
        out[reg == 2, 1] = 1.0 - self.c_hat
        out[np.abs(reg) == 2, 2] = self.c_hat
        return out

    def decide_many(self, X, u) -> np.ndarray:
        reg = self.regions(X)
        u = np.asarray(u, dtype=float)
        label = np.sign(reg)
        out = np.where(reg == 0, ABSTAIN, label)
        randomized = (np.abs(reg) == 2) & (u < self.c_hat)
        return np.where(randomized, ABSTAIN, out).astype(int)


def default_band(estimator: HistogramEstimator, unlabeled: UnlabeledSet) -> float:
    if estimator.L is not None and estimator.beta is not None:
        return 2.0 * b_n(estimator.n, estimator.ladder.mu_min, estimator.L, estimator.beta,
                         estimator.dim)
    widths = estimator.bandwidth(unlabeled.X)
    bounds = 9.0 * e_S(estimator.n, estimator.ladder.mu_min, widths, estimator.dim)
    return float(np.clip(np.percentile(bounds, 90), 0.0, 0.5))


def build(estimator: HistogramEstimator, unlabeled: UnlabeledSet, delta: float,
          a_m: float, band: Optional[float] = None) -> PluginClassifier:
    if band is None:
        band = default_band(estimator, unlabeled)
    if band < 0:
        raise ValueError("band must be non-negative")
    eta_hat = estimator.predict(unlabeled.X)
    m = len(eta_hat)
    levels = margin(eta_hat)
    gamma = estimate_threshold(eta_hat, delta, a_m)
    budget = delta - a_m
    if budget <= 0:
        # no budget left: never abstain
        return PluginClassifier(estimator, 0.0, 0.0, 0.0, a_m, delta, 0.0, 0.0, core_empty=True)
    core_empty = np.count_nonzero(levels <= gamma) / m > budget
    p1 = 0.0 if core_empty else np.count_nonzero(levels <= gamma) / m
    p2 = np.count_nonzero(levels <= gamma + band) / m
    target = delta - 5 * a_m
    denom = p2 - p1 - 2 * a_m
    if p1 < target and denom > 0:
        c_hat = min(1.0, max(0.0, (target - p1) / denom))
    else:
        c_hat = 0.0
    return PluginClassifier(estimator, gamma, float(band), float(c_hat), a_m, delta,
                            float(p1), float(p2), bool(core_empty))


def decide(classifier, x, u: float) -> int:
    x = np.atleast_1d(np.asarray(x, dtype=float)).reshape(1, -1)
    return int(classifier.decide_many(x, [u])[0])


def evaluate(classifier, test: LabeledSet, seed: int) -> Metrics:
    """Empirical metrics with one seeded uniform draw per test point."""
    if len(test) == 0:
        raise ValueError("empty test set")
    u = np.random.default_rng([seed, 3]).random(len(test))
    return evaluate_decisions(classifier.decide_many(test.X, u), test.y)


__all__ = [
    "PluginClassifier", "slack_a_m", "estimate_threshold", "build", "decide", "evaluate",
    "default_band", "NEG", "POS", "ABSTAIN",
]
