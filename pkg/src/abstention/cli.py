"""Command line entry point: ``abstain {sweep,rates,eval,synth,oracle}``."""
from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import config as configmod
from . import harness, modelio, plugin
from .data import RawDataset, binary_label_map, load_dataset, serialize_libsvm
from .problems import (LabeledSet, bayes_risk, bayes_rule, load_atoms_csv, problem_from_name,
                       sample_labeled)


def _log(args):
    if args.quiet:
        return None
    return lambda msg: print(msg, file=sys.stderr)


def _write(out_dir, name, text):
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, name)
    with open(path, "w") as fh:
        fh.write(text)
    return path


def _problem(args):
    if getattr(args, "atoms", None):
        with open(args.atoms) as fh:
            return load_atoms_csv(fh.read())
    if args.config:
        cfg = configmod.load(args.config)
        problem = cfg.make_problem()
        if problem is None:
            raise configmod.ConfigError("config names a dataset, not a synthetic problem")
        return problem
    if args.problem:
        return problem_from_name(args.problem, dim=args.dim)
    raise configmod.ConfigError("give --problem, --atoms or --config")


def cmd_sweep(args) -> int:
    cfg = configmod.load(args.config)
    start = time.perf_counter()
    rows, failures = harness.sweep(cfg, args.seed_base, _log(args))
    out = args.out or "."
    _write(out, "sweep.csv", harness.rows_to_csv(rows))
    if cfg.svg and rows:
        _write(out, "sweep.svg", harness.sweep_svg(rows))
    rep = harness.report(cfg, rows, failures, time.perf_counter() - start)
    _write(out, "report.json", json.dumps(rep, indent=1, sort_keys=True) + "\n")
    for f in failures:
        print(f"failed: algorithm={f['algorithm']} delta={f['delta']} seed={f['seed']}: "
              f"{f['error']}", file=sys.stderr)
    return 1 if failures else 0


def cmd_rates(args) -> int:
    cfg = configmod.load(args.config)
    start = time.perf_counter()
    table, slope, runs = harness.rates(cfg, args.seed_base, _log(args))
    out = args.out or "."
    _write(out, "rates.csv", harness.rows_to_csv(table, ("n", "median_excess_risk")))
    _write(out, "rates_runs.csv", harness.rows_to_csv(runs, ("n", "seed", "excess_risk")))
    rep = harness.report(cfg, runs, [], time.perf_counter() - start)
    rep["slope"] = slope
    _write(out, "report.json", json.dumps(rep, indent=1, sort_keys=True) + "\n")
    print(f"slope {slope!r}")
    return 0


def _test_set(path, label_column=None) -> LabeledSet:
    raw = load_dataset(path, label_column)
    labels = set(raw.labels)
    if labels <= {-1, 1}:
        y = np.array(raw.labels, dtype=int)
    else:
        mapping = binary_label_map(raw.labels)
        y = np.array([mapping[v] for v in raw.labels], dtype=int)
    return LabeledSet(raw.X, y)


def cmd_eval(args) -> int:
    model = modelio.load(args.model)
    test = _test_set(args.test)
    m = plugin.evaluate(model, test, args.seed_base)
    row = {"model": os.path.basename(args.model), "n": m.n, "risk": m.risk,
           "rejection_rate": m.rejection_rate, "accuracy_on_accepted": m.accuracy_on_accepted}
    text = harness.rows_to_csv([row], tuple(row))
    if args.out:
        _write(args.out, "eval.csv", text)
    if not args.quiet:
        print(f"risk {m.risk!r}\nrejection_rate {m.rejection_rate!r}\n"
              f"accuracy_on_accepted {m.accuracy_on_accepted!r}")
    sys.stdout.write(text)
    return 0


def cmd_synth(args) -> int:
    problem = _problem(args)
    data = sample_labeled(problem, args.n, args.seed_base)
    text = serialize_libsvm(RawDataset(data.X, tuple(int(v) for v in data.y)))
    if args.out:
        path = _write(args.out, f"{problem.kind}_n{args.n}_seed{args.seed_base}.libsvm", text)
        if not args.quiet:
            print(path)
    else:
        sys.stdout.write(text)
    return 0


def cmd_oracle(args) -> int:
    problem = _problem(args)
    rule = bayes_rule(problem, args.delta)
    print(f"gamma {rule.gamma!r}")
    print(f"c0 {rule.c0!r}")
    print(f"abstention {rule.abstention!r}")
    print(f"bayes_risk {bayes_risk(problem, args.delta)!r}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed-base", type=int, default=0, help="offset added to every seed")
    common.add_argument("--quiet", action="store_true")

    parser = argparse.ArgumentParser(prog="abstain", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("sweep", parents=[common], help="delta sweep -> sweep.csv (+ sweep.svg)")
    sub.add_parser("rates", parents=[common], help="plug-in excess risk against n")
    p = sub.add_parser("eval", parents=[common], help="evaluate a model file on a test file")
    p.add_argument("model")
    p.add_argument("test")
    for name, helptext in (("synth", "emit a synthetic LIBSVM dataset"),
                           ("oracle", "print gamma, c0 and Bayes risk")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--problem", help="catalog problem name")
        p.add_argument("--atoms", help="atoms problem CSV (location..., mass, eta)")
        p.add_argument("--dim", type=int, default=2)
        if name == "synth":
            p.add_argument("--n", type=int, default=1000)
        else:
            p.add_argument("--delta", type=float, required=True)
    return parser


COMMANDS = {"sweep": cmd_sweep, "rates": cmd_rates, "eval": cmd_eval, "synth": cmd_synth,
            "oracle": cmd_oracle}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command in ("sweep", "rates") and not args.config:
        print(f"abstain {args.command}: --config is required", file=sys.stderr)
        return 2
    try:
        return COMMANDS[args.command](args)
    except FileNotFoundError as exc:
        print(f"abstain {args.command}: {exc.filename}: no such file", file=sys.stderr)
        return 2
    except (configmod.ConfigError, modelio.ModelFormatError, ValueError) as exc:
        print(f"abstain {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
