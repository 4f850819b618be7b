"""Experiment runs behind the command line: delta sweeps and rate studies."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from . import __version__
from . import histogram, plugin, search, surrogate
from .config import RunConfig
from .data import MinMax, SplitSpec, load_dataset, parity_label_map, split
from .metrics import population_risk
from .problems import LabeledSet, UnlabeledSet, bayes_risk, bayes_rule, rule_risk

SWEEP_COLUMNS = ("algorithm", "delta", "seed", "rejection_rate", "accuracy_on_accepted",
                 "risk", "excess_risk")


@dataclass(frozen=True, eq=False)
class RunData:
    labeled: LabeledSet
    unlabeled: UnlabeledSet
    test: LabeledSet


def synthetic_data(problem, n: int, m: int, n_test: int, seed: int) -> RunData:
    from .problems import sample_labeled, sample_unlabeled

    X, y = problem.sample_xy(n_test, np.random.default_rng([seed, 4]))
    return RunData(sample_labeled(problem, n, seed), sample_unlabeled(problem, m, seed),
                   LabeledSet(X, y))


def dataset_data(config: RunConfig, seed: int) -> RunData:
    raw = load_dataset(config.dataset, config.label_column)
    label_map = config.label_map
    if label_map == "parity":
        label_map = parity_label_map(raw.labels)
    elif label_map == "binary":
        label_map = None
    parts = split(raw, SplitSpec(tuple(config.fractions), seed, label_map))
    # scale with training statistics only; test points are clipped into the cube
    train = np.vstack([parts.labeled.X, parts.unlabeled.X])
    mm = MinMax(train.min(axis=0), train.max(axis=0))
    return RunData(LabeledSet(mm.apply(parts.labeled.X), parts.labeled.y),
                   UnlabeledSet(mm.apply(parts.unlabeled.X)),
                   LabeledSet(mm.apply(parts.test.X), parts.test.y))


def solver_config(config: RunConfig, seed: int, constrained: bool = False):
    return surrogate.SolverConfig(
        iterations=config.constrained_iterations if constrained else config.iterations,
        step=config.step, reg=config.reg, seed=seed, tolerance=config.constraint_tol,
        grid_search=config.grid_search)


def fit_plugin(config: RunConfig, data: RunData, delta: float, problem=None):
    L = beta = None
    if problem is not None and problem.L is not None:
        L, beta = problem.L, problem.beta
    est = histogram.fit(data.labeled, mu_min=config.mu_min,
                        threshold_scale=config.lepski_scale, L=L, beta=beta)
    a_m = plugin.slack_a_m(len(data.unlabeled), config.slack_scale)
    return plugin.build(est, data.unlabeled, delta, a_m, config.band)


def fit_model(config: RunConfig, algorithm: str, data: RunData, delta: float, seed: int,
              problem=None):
    if algorithm == "bayes-oracle":
        return bayes_rule(problem, delta)
    if algorithm == "plugin":
        return fit_plugin(config, data, delta, problem)
    feats = surrogate.features_for(data.labeled.X, config.features, config.sigma, seed)
    alpha = config.alpha_scale / math.sqrt(len(data.unlabeled))
    if algorithm == "search":
        res = search.run_search(data.labeled, data.unlabeled, delta, feats,
                                solver_config(config, seed), alpha_m=alpha, tol=config.tol,
                                max_iter=config.max_iter)
        return res.model
    if algorithm == "constrained":
        return surrogate.train_constrained(data.labeled, data.unlabeled, delta, alpha,
                                           config.c_relax, feats,
                                           solver_config(config, seed, constrained=True))
    raise ValueError(f"unknown algorithm {algorithm!r}")


def run_one(config: RunConfig, algorithm: str, delta: float, seed: int, problem=None,
            data: RunData = None) -> dict:
    if data is None:
        data = (synthetic_data(problem, config.n, config.m, config.n_test, seed)
                if problem is not None else dataset_data(config, seed))
    model = fit_model(config, algorithm, data, delta, seed, problem)
    metrics = plugin.evaluate(model, data.test, seed)
    excess = None
    if problem is not None and problem.has_bayes:
        if algorithm == "bayes-oracle":
            risk = rule_risk(model)
        else:
            risk, _ = population_risk(problem, model, config.n_mc, seed)
        excess = risk - bayes_risk(problem, delta)
    return {"algorithm": algorithm, "delta": delta, "seed": seed,
            "rejection_rate": metrics.rejection_rate,
            "accuracy_on_accepted": metrics.accuracy_on_accepted,
            "risk": metrics.risk, "excess_risk": excess}


def sweep(config: RunConfig, seed_base: int = 0, log=None):
    """Run every (algorithm, delta, seed); returns (rows, failures)."""
    problem = config.make_problem()
    rows, failures = [], []
    for seed0 in config.seeds:
        seed = int(seed0) + seed_base
        data = (synthetic_data(problem, config.n, config.m, config.n_test, seed)
                if problem is not None else dataset_data(config, seed))
        for algorithm in config.algorithms:
            for delta in config.deltas:
                try:
                    row = run_one(config, algorithm, delta, seed, problem, data)
                except (ValueError, RuntimeError) as exc:
                    failures.append({"algorithm": algorithm, "delta": delta, "seed": seed,
                                     "error": str(exc)})
                    if log:
                        log(f"FAILED {algorithm} delta={delta} seed={seed}: {exc}")
                    continue
                rows.append(row)
                if log:
                    log(f"{algorithm} delta={delta} seed={seed} "
                        f"rejection={row['rejection_rate']:.4f} "
                        f"accuracy={row['accuracy_on_accepted']:.4f}")
    rows.sort(key=lambda r: (r["algorithm"], r["delta"], r["seed"]))
    return rows, failures


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def rows_to_csv(rows, columns=SWEEP_COLUMNS) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row[c]) for c in columns])
    return out.getvalue()


def loglog_slope(ns, values) -> float:
    ns = np.asarray(ns, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(ns) < 2:
        raise ValueError("need at least two sample sizes for a slope")
    if np.any(values <= 0):
        raise ValueError("excess risks must be positive to fit a log-log slope")
    return float(np.polyfit(np.log(ns), np.log(values), 1)[0])


def rates(config: RunConfig, seed_base: int = 0, log=None):
    """Median plug-in excess risk per n; returns (table rows, slope, per-run rows)."""
    problem = config.make_problem()
    if problem is None or not problem.has_bayes:
        raise ValueError("rate studies need a synthetic problem with a known Bayes rule")
    if len(config.n_list) < 2:
        raise ValueError("rate studies need at least two values in n_list")
    delta = config.deltas[0]
    table, runs = [], []
    for n in config.n_list:
        excess = []
        for seed0 in config.seeds:
            seed = int(seed0) + seed_base
            data = synthetic_data(problem, n, n, 2, seed)
            model = fit_plugin(config, data, delta, problem)
            risk, _ = population_risk(problem, model, config.n_mc, seed)
            excess.append(risk - bayes_risk(problem, delta))
            runs.append({"n": n, "seed": seed, "excess_risk": excess[-1]})
        med = float(np.median(excess))
        table.append({"n": n, "median_excess_risk": med})
        if log:
            log(f"n={n} median excess risk={med:.6g}")
    slope = loglog_slope([r["n"] for r in table], [r["median_excess_risk"] for r in table])
    return table, slope, runs


def sweep_svg(rows, width: int = 480, height: int = 360) -> str:
    """Mean accuracy on accepted points against mean rejection, one line per algorithm."""
    series = {}
    for row in rows:
        series.setdefault(row["algorithm"], {}).setdefault(row["delta"], []).append(
            (row["rejection_rate"], row["accuracy_on_accepted"]))
    points = {
        alg: [tuple(np.mean(v, axis=0)) for _, v in sorted(by_delta.items())]
        for alg, by_delta in sorted(series.items())
    }
    all_pts = [p for pts in points.values() for p in pts] or [(0.0, 0.0)]
    xs, ys = zip(*all_pts)
    x0, x1 = 0.0, max(max(xs), 1e-3)
    y0, y1 = min(ys), max(ys)
    if y1 - y0 < 1e-3:
        y0, y1 = y0 - 0.01, y1 + 0.01
    pad = 50

    def sx(x):
        return pad + (x - x0) / (x1 - x0) * (width - 2 * pad)

    def sy(y):
        return height - pad - (y - y0) / (y1 - y0) * (height - 2 * pad)

    colors = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
        f'<text x="{width / 2}" y="{height - 12}" text-anchor="middle" font-size="12">rejection rate</text>',
        f'<text x="14" y="{height / 2}" transform="rotate(-90 14 {height / 2})" '
        f'text-anchor="middle" font-size="12">accuracy on accepted</text>',
        f'<text x="{pad}" y="{height - pad + 14}" font-size="10">{x0:.2f}</text>',
        f'<text x="{width - pad}" y="{height - pad + 14}" font-size="10" text-anchor="end">{x1:.2f}</text>',
        f'<text x="{pad - 4}" y="{height - pad}" font-size="10" text-anchor="end">{y0:.3f}</text>',
        f'<text x="{pad - 4}" y="{pad + 4}" font-size="10" text-anchor="end">{y1:.3f}</text>',
    ]
    for i, (alg, pts) in enumerate(points.items()):
        color = colors[i % len(colors)]
        path = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in pts)
        parts.append(f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="2"/>')
        for x, y in pts:
            parts.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="3" fill="{color}"/>')
        parts.append(f'<text x="{width - pad}" y="{pad + 14 * i}" font-size="11" '
                     f'text-anchor="end" fill="{color}">{alg}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def report(config: RunConfig, rows, failures, wall_time: float) -> dict:
    return {"library_version": __version__, "config": config.as_dict(),
            "rows": len(rows), "failures": failures, "wall_time_seconds": wall_time}
