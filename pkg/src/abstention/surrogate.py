"""Convex-surrogate abstaining classifiers over random Fourier features.

A model is a pair of linear scorers (h, r) on a shared cosine embedding:
sign(h) is the predicted label and r <= 0 means abstain.  Training uses
deterministic full-batch subgradient descent with step c / sqrt(t) and
averages the second half of the iterates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .problems import ABSTAIN, LabeledSet, UnlabeledSet

REG_GRID = tuple(10.0**i for i in range(-5, 6))


class InfeasibleBudget(ValueError):
    pass


class ConstraintNotReached(RuntimeError):
    def __init__(self, message, diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


def hinge(z):
    return np.maximum(0.0, 1.0 - np.asarray(z, dtype=float))


@dataclass(frozen=True)
class FourierFeatures:
    """Cosine embedding approximating exp(-|x - x'|^2 / (2 sigma^2))."""

    W: np.ndarray
    b: np.ndarray
    sigma: float
    seed: int

    @classmethod
    def draw(cls, dim_in: int, dim_out: int, sigma: float, seed: int) -> "FourierFeatures":
        if sigma <= 0:
            raise ValueError("sigma must be positive")
        rng = np.random.default_rng([seed, 11])
        W = rng.normal(0.0, 1.0 / sigma, size=(dim_out, dim_in))
        b = rng.uniform(0.0, 2 * np.pi, size=dim_out)
        return cls(W, b, float(sigma), int(seed))

    @property
    def dim_in(self) -> int:
        return self.W.shape[1]

    @property
    def dim_out(self) -> int:
        return self.W.shape[0]

    def embed(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X.reshape(1, -1)
        if X.shape[1] != self.dim_in:
            raise ValueError(f"expected {self.dim_in} input features, got {X.shape[1]}")
        return math.sqrt(2.0 / self.dim_out) * np.cos(X @ self.W.T + self.b)


def embed(features: FourierFeatures, x) -> np.ndarray:
    return features.embed(x)


def median_heuristic(X, seed: int = 0, size: int = 200) -> float:
    X = np.asarray(X, dtype=float)
    rng = np.random.default_rng([seed, 12])
    if len(X) > size:
        X = X[rng.choice(len(X), size=size, replace=False)]
    diff = X[:, None, :] - X[None, :, :]
    dist = np.sqrt(np.sum(diff**2, axis=-1))[np.triu_indices(len(X), k=1)]
    med = float(np.median(dist)) if dist.size else 1.0
    return med if med > 0 else 1.0


@dataclass(frozen=True)
class SolverConfig:
    iterations: int = 2000
    step: float = 1.0
    reg: float = 1e-4
    seed: int = 0
    tolerance: float = 1e-3
    grid_search: bool = False
    nu_max: float = 100.0
    bisection_steps: int = 40

    def __post_init__(self):
        if self.iterations < 1 or self.step <= 0 or self.reg < 0:
            raise ValueError("iterations and step must be positive, reg non-negative")
        if not 0 < self.tolerance <= 0.1:
            raise ValueError("tolerance must lie in (0, 0.1]")


@dataclass(frozen=True, eq=False)
class SurrogateModel:
    features: FourierFeatures
    u: np.ndarray
    u0: float
    v: np.ndarray
    v0: float
    config: dict = field(default_factory=dict)
    trace: Optional[np.ndarray] = field(default=None, repr=False)
    history: Optional[list] = field(default=None, repr=False)

    def scores(self, X):
        Z = self.features.embed(X)
        return Z @ self.u + self.u0, Z @ self.v + self.v0

    def decide_many(self, X, u=None) -> np.ndarray:
        h, r = self.scores(X)
        label = np.where(h > 0, 1, -1)
        return np.where(r <= 0, ABSTAIN, label)

    def decision_probs(self, X) -> np.ndarray:
        d = self.decide_many(X)
        return np.column_stack([d == -1, d == 1, d == ABSTAIN]).astype(float)


def fixed_cost_loss(h, r, y, lam):
    """hinge((y h - r)/2) + lam hinge(r), the convex bound on l_lambda."""
    h, r, y = (np.asarray(a, dtype=float) for a in (h, r, y))
    return hinge((y * h - r) / 2.0) + lam * hinge(r)


def abstention_loss(h, r, y, lam):
    """l_lambda of the induced decision: sign(h) if r > 0, else abstain."""
    h, r, y = (np.asarray(a, dtype=float) for a in (h, r, y))
    declared = r > 0
    pred = np.where(h > 0, 1.0, -1.0)
    return np.where(declared, (pred != y).astype(float), lam)


def rejection_rate(model: SurrogateModel, points) -> float:
    X = points.X if isinstance(points, (UnlabeledSet, LabeledSet)) else points
    if len(X) == 0:
        raise ValueError("no points")
    _, r = model.scores(X)
    return float(np.mean(r <= 0))


def tau_slack(m: int, feature_bound: float, weight_bound: float) -> float:
    """(2 B R + sqrt(2 log 2m)) / sqrt(m)."""
    if m < 2:
        raise ValueError("m must be at least 2")
    return (2.0 * feature_bound * weight_bound + math.sqrt(2.0 * math.log(2 * m))) / math.sqrt(m)


# -- solver -------------------------------------------------------------------


class _Objective:
    """Empirical objective over pre-embedded data.

    value = mean hinge((y h - r)/2) + lam * mean hinge(r on labeled)
            + nu * mean hinge(r on unlabeled) + reg (|u|^2 + |v|^2)
    """

    def __init__(self, Z, y, lam, reg, Zu=None, nu=0.0):
        self.Z, self.y, self.lam, self.reg = Z, y.astype(float), lam, reg
        self.Zu, self.nu = Zu, nu

    def value(self, w):
        return self.evaluate(w, with_grad=False)[0]

    def evaluate(self, w, with_grad=True):
        u, u0, v, v0 = w
        n = len(self.y)
        h = self.Z @ u + u0
        r = self.Z @ v + v0
        margin = (self.y * h - r) / 2
        val = np.mean(hinge(margin)) + self.reg * (u @ u + v @ v)
        if self.lam:
            val += self.lam * np.mean(hinge(r))
        if self.nu:
            ru = self.Zu @ v + v0
            val += self.nu * np.mean(hinge(ru))
        if not with_grad:
            return float(val), None
        active = (margin < 1).astype(float)
        gh = -0.5 * self.y * active / n
        gr = 0.5 * active / n
        if self.lam:
            gr = gr - self.lam * (r < 1) / n
        gu = self.Z.T @ gh + 2 * self.reg * u
        gv = self.Z.T @ gr + 2 * self.reg * v
        gu0, gv0 = gh.sum(), gr.sum()
        if self.nu:
            gq = -self.nu * (ru < 1) / len(ru)
            gv = gv + self.Zu.T @ gq
            gv0 += gq.sum()
        return float(val), (gu, gu0, gv, gv0)


def _descend(obj: _Objective, w0, iterations: int, step: float, scale: float = 1.0):
    """Subgradient descent; returns (averaged iterate, best-so-far trace)."""
    u, u0, v, v0 = (np.array(w0[0]), float(w0[1]), np.array(w0[2]), float(w0[3]))
    start = iterations // 2
    acc = [np.zeros_like(u), 0.0, np.zeros_like(v), 0.0]
    count = 0
    best = math.inf
    trace = []
    for t in range(1, iterations + 1):
        val, (gu, gu0, gv, gv0) = obj.evaluate((u, u0, v, v0))
        best = min(best, val)
        trace.append(best)
        eta = step / (scale * math.sqrt(t))
        u = u - eta * gu
        u0 -= eta * gu0
        v = v - eta * gv
        v0 -= eta * gv0
        if t > start:
            acc[0] += u
            acc[1] += u0
            acc[2] += v
            acc[3] += v0
            count += 1
    avg = (acc[0] / count, acc[1] / count, acc[2] / count, acc[3] / count)
    return avg, np.array(trace)


def _damping(reg, step):
    # keeps step * 2 reg below 1 so a strong ridge term cannot blow up
    return 1.0 + 2.0 * reg * step


def _zeros(dim):
    return (np.zeros(dim), 0.0, np.zeros(dim), 0.0)


def _fit_fixed(Z, y, lam, reg, config: SolverConfig):
    obj = _Objective(Z, y, lam, reg)
    w, trace = _descend(obj, _zeros(Z.shape[1]), config.iterations, config.step,
                        _damping(reg, config.step))
    return w, obj.value(w), trace


def train_fixed_cost(labeled: LabeledSet, lam: float, features: FourierFeatures,
                     config: SolverConfig = SolverConfig()) -> SurrogateModel:
    if not 0 < lam < 0.5:
        raise ValueError("abstention cost must lie in (0, 1/2)")
    if len(labeled) == 0:
        raise ValueError("empty training set")
    Z = features.embed(labeled.X)
    y = labeled.y
    reg = config.reg
    if config.grid_search:
        reg = select_regularization(Z, y, lam, config)
    w, value, trace = _fit_fixed(Z, y, lam, reg, config)
    echo = {"lambda": lam, "reg": reg, "objective": value, "iterations": config.iterations,
            "step": config.step}
    return SurrogateModel(features, w[0], w[1], w[2], w[3], echo, trace=trace)


def select_regularization(Z, y, lam, config: SolverConfig) -> float:
    """Grid search over 10^i, -5 <= i <= 5, on a held-out fifth.

    Candidates are scored by the held-out abstention loss; ties go to the
    smaller value.
    """
    n = len(y)
    rng = np.random.default_rng([config.seed, 13])
    perm = rng.permutation(n)
    cut = max(1, n // 5)
    hold, train = perm[:cut], perm[cut:]
    if len(train) == 0:
        return config.reg
    best_reg, best_loss = None, math.inf
    for reg in REG_GRID:
        w, _, _ = _fit_fixed(Z[train], y[train], lam, reg, config)
        h = Z[hold] @ w[0] + w[1]
        r = Z[hold] @ w[2] + w[3]
        loss = float(np.mean(abstention_loss(h, r, y[hold], lam)))
        if loss < best_loss - 1e-12:
            best_reg, best_loss = reg, loss
    return best_reg


def train_constrained(labeled: LabeledSet, unlabeled: UnlabeledSet, delta: float,
                      alpha: float, c_relax: float, features: FourierFeatures,
                      config: SolverConfig = SolverConfig()) -> SurrogateModel:
    """Minimize the classification surrogate subject to
    mean hinge(r(X_j)) <= c_relax * delta - alpha on the unlabeled points,
    by bisection on the Lagrange multiplier of the constraint.
    """
    budget = c_relax * delta - alpha
    if budget <= 0:
        raise InfeasibleBudget(f"effective budget {budget} is not positive")
    Z = features.embed(labeled.X)
    Zu = features.embed(unlabeled.X)
    y = labeled.y
    base = _Objective(Z, y, 0.0, config.reg)

    def solve(nu, w0):
        obj = _Objective(Z, y, 0.0, config.reg, Zu, nu)
        w, _ = _descend(obj, w0, config.iterations, config.step, scale=(1.0 + nu) * _damping(config.reg, config.step))
        g = float(np.mean(hinge(Zu @ w[2] + w[3])))
        return w, g, base.value(w)

    history = []
    best = None

    def consider(nu, w, g, f):
        nonlocal best
        history.append((nu, g, f))
        if g <= budget and (best is None or f < best[2]):
            best = (w, g, f, nu)

    w, g, f = solve(0.0, _zeros(Z.shape[1]))
    consider(0.0, w, g, f)
    if g > budget:
        w_hi, g_hi, f_hi = solve(config.nu_max, w)
        consider(config.nu_max, w_hi, g_hi, f_hi)
        if g_hi > budget:
            raise ConstraintNotReached(
                f"constraint {g_hi:.4g} > budget {budget:.4g} at nu_max={config.nu_max}",
                {"history": history, "budget": budget})
        lo, hi = 0.0, config.nu_max
        warm = w
        for _ in range(config.bisection_steps):
            nu = 0.5 * (lo + hi)
            w, g, f = solve(nu, warm)
            consider(nu, w, g, f)
            warm = w
            if g <= budget:
                if budget - g <= config.tolerance:
                    break
                hi = nu
            else:
                lo = nu
            if hi - lo < 1e-6 * config.nu_max:
                break
    w, g, f, nu = best
    echo = {"delta": delta, "alpha": alpha, "c_relax": c_relax, "budget": budget,
            "constraint": g, "objective": f, "nu": nu, "reg": config.reg,
            "iterations": config.iterations, "step": config.step}
    return SurrogateModel(features, w[0], w[1], w[2], w[3], echo, history=history)


def features_for(X, dim_out: int = 100, sigma: Optional[float] = None, seed: int = 0):
    X = np.asarray(X, dtype=float)
    if sigma is None:
        sigma = median_heuristic(X, seed)
    return FourierFeatures.draw(X.shape[1], dim_out, sigma, seed)
