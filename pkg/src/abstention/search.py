"""Bisection over the abstention cost to meet an abstention budget.

Each round trains a fixed-cost learner at lambda_k = (L_k + U_k)/2, measures
Q_k = (rejection on the unlabeled set) + alpha_m and moves the bracket: too
much abstention raises the cost, too little lowers it.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .metrics import Metrics
from .plugin import evaluate as _evaluate
from .problems import LabeledSet, UnlabeledSet
from .surrogate import FourierFeatures, SolverConfig, SurrogateModel, rejection_rate, train_fixed_cost

STOP_INTERVAL = "interval-hit"
STOP_TOLERANCE = "tolerance-hit"
STOP_MAX_ITER = "max-iterations"


class SearchFailed(RuntimeError):
    def __init__(self, message, trace):
        super().__init__(message)
        self.trace = trace


@dataclass(frozen=True)
class TraceRow:
    iteration: int
    lam: float
    lower: float
    upper: float
    rejection: float
    Q: float
    objective: float


@dataclass(frozen=True, eq=False)
class SearchResult:
    lambda_star: float
    model: SurrogateModel
    iterations: int
    trace: list = field(default_factory=list)
    stop_reason: str = STOP_TOLERANCE

    @property
    def Q(self) -> float:
        return next(row.Q for row in self.trace if row.lam == self.lambda_star)

    def trace_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["iter", "lambda", "rejection", "Q", "objective"])
        for row in self.trace:
            writer.writerow([row.iteration, repr(row.lam), repr(row.rejection), repr(row.Q),
                             repr(row.objective)])
        return out.getvalue()


def default_alpha(m: int) -> float:
    return 0.1 / math.sqrt(m)


def run_search(labeled: LabeledSet, unlabeled: UnlabeledSet, delta: float,
               features: FourierFeatures, config: SolverConfig = SolverConfig(), *,
               alpha_m: Optional[float] = None, tol: float = 0.01,
               interval: Optional[Sequence[float]] = None, max_iter: int = 12) -> SearchResult:
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    if tol <= 0 or max_iter < 1:
        raise ValueError("tol must be positive and max_iter at least 1")
    if alpha_m is None:
        alpha_m = default_alpha(len(unlabeled))
    lower, upper = 0.0, 0.5
    trace = []
    models = {}
    for k in range(1, max_iter + 1):
        lam = (lower + upper) / 2
        model = train_fixed_cost(labeled, lam, features, config)
        rej = rejection_rate(model, unlabeled)
        Q = rej + alpha_m
        trace.append(TraceRow(k, lam, lower, upper, rej, Q, model.config["objective"]))
        models[lam] = model
        if interval is not None and interval[0] <= Q <= interval[1]:
            return SearchResult(lam, model, k, trace, STOP_INTERVAL)
        if interval is None and 0 <= delta - Q <= tol:
            return SearchResult(lam, model, k, trace, STOP_TOLERANCE)
        if Q <= delta:
            upper = lam
        else:
            lower = lam
    feasible = [row for row in trace if row.Q <= delta]
    if not feasible:
        raise SearchFailed(f"no round met the budget {delta} in {max_iter} rounds", trace)
    best = min(feasible, key=lambda row: (delta - row.Q, row.iteration))
    return SearchResult(best.lam, models[best.lam], len(trace), trace, STOP_MAX_ITER)


def evaluate_search(result: SearchResult, test: LabeledSet) -> Metrics:
    return _evaluate(result.model, test, seed=0)
