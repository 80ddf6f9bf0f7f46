"""Run every experiment at its default fixture and collect the verdicts in one table."""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass
from pathlib import Path

from fraccal.cli import ExperimentConfig, run


@dataclass(frozen=True)
class SuiteConfig:
    out: Path = Path("results")
    seed: int = 42
    grid: int = 400


RUNS = [
    ("flaplace-cos", {"experiment": "flaplace", "function": "cos", "k": 2.0, "s": 0.75}),
    ("energy-layer", {"experiment": "energy"}),
    ("calibrate-layer", {"experiment": "calibrate"}),
    ("verify-layer", {"experiment": "verify"}),
    ("verify-constant", {"experiment": "verify", "field": "constant"}),
    ("perimeter", {"experiment": "perimeter"}),
    ("counterexample-F1", {"experiment": "counterexample", "candidate": "F1"}),
    ("counterexample-F2", {"experiment": "counterexample", "candidate": "F2"}),
    ("counterexample-F3", {"experiment": "counterexample", "candidate": "F3"}),
    ("local-dirichlet", {"experiment": "local", "lagrangian": "dirichlet"}),
    ("local-p4", {"experiment": "local", "lagrangian": "p-dirichlet:4"}),
]


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=SuiteConfig.out)
    ap.add_argument("--seed", type=int, default=SuiteConfig.seed)
    ap.add_argument("--grid", type=int, default=SuiteConfig.grid)
    ap.add_argument("--only", nargs="*", help="subset of run names")
    args = ap.parse_args(argv)
    cfg = SuiteConfig(args.out, args.seed, args.grid)

    rows, worst = [], 0
    for name, opts in RUNS:
        if args.only and name not in args.only:
            continue
        exp = ExperimentConfig(**opts, seed=cfg.seed, grid=cfg.grid, out=str(cfg.out / name))
        code, report = run(exp)
        worst = max(worst, code)
        for prop, v in report.properties.items():
            rows.append([name, prop, repr(float(v.gap)), repr(float(v.error_estimate)), v.verdict])
            print(f"{name:20s} {prop:24s} {v.verdict:12s} gap={v.gap:.3e} err={v.error_estimate:.1e}")
    cfg.out.mkdir(parents=True, exist_ok=True)
    with (cfg.out / "suite_summary.csv").open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["run", "property", "gap", "error_estimate", "verdict"])
        w.writerows(rows)
    return worst


if __name__ == "__main__":
    sys.exit(main())
