"""Run the bundled experiments and print a short summary.

    python scripts/run_experiments.py [--out results] [--only gaussian_sweep ...]

Each config under scripts/configs is handed to the ``abstain`` command line,
so the outputs (CSV, SVG, report.json) land in one directory per config.
Dataset configs are skipped when their data file is missing.
"""
import argparse
import csv
import json
import os
import sys
from collections import defaultdict

from abstention import cli

HERE = os.path.dirname(os.path.abspath(__file__))
CONFIGS = os.path.join(HERE, "configs")


def summarize_sweep(path):
    acc = defaultdict(list)
    with open(path) as fh:
        for row in csv.DictReader(fh):
            acc[row["algorithm"], float(row["delta"])].append(row)
    print(f"  {'algorithm':<13} {'delta':>5} {'rejection':>9} {'accuracy':>9} {'excess':>9}")
    for (alg, delta), rows in sorted(acc.items()):
        mean = lambda key: sum(float(r[key]) for r in rows) / len(rows)
        excess = f"{mean('excess_risk'):9.5f}" if rows[0]["excess_risk"] else f"{'-':>9}"
        print(f"  {alg:<13} {delta:5.2f} {mean('rejection_rate'):9.4f} "
              f"{mean('accuracy_on_accepted'):9.4f} {excess}")


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="results")
    parser.add_argument("--only", nargs="*", help="config names without .json")
    args = parser.parse_args(argv)

    names = sorted(f[:-5] for f in os.listdir(CONFIGS) if f.endswith(".json"))
    if args.only:
        names = [n for n in names if n in args.only]
    status = 0
    for name in names:
        path = os.path.join(CONFIGS, name + ".json")
        with open(path) as fh:
            cfg = json.load(fh)
        if "dataset" in cfg and not os.path.exists(cfg["dataset"]):
            print(f"{name}: skipped, {cfg['dataset']} not found")
            continue
        out = os.path.join(args.out, name)
        verb = "rates" if cfg.get("n_list") else "sweep"
        print(f"{name}: abstain {verb} -> {out}")
        code = cli.main([verb, "--config", path, "--out", out, "--quiet"])
        status = max(status, code)
        if verb == "sweep" and os.path.exists(os.path.join(out, "sweep.csv")):
            summarize_sweep(os.path.join(out, "sweep.csv"))
        elif verb == "rates":
            with open(os.path.join(out, "rates.csv")) as fh:
                for line in fh.read().splitlines():
                    print("  " + line)
    return status


if __name__ == "__main__":
    sys.exit(main())
