"""Error of the principal-value ladder on the cosine symbol as the cutoffs shrink."""

from __future__ import annotations

import argparse
import csv
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from fraccal.quadrature import (
    AmbientFunction,
    FracParams,
    QuadratureScheme,
    TailModel,
    frac_laplacian,
    frac_laplacian_eps,
)


@dataclass(frozen=True)
class StudyConfig:
    orders: tuple[float, ...] = (0.25, 0.5, 0.75)
    frequency: float = 1.0
    point: float = 0.0
    coarsest: float = 0.4
    levels: int = 5
    radius: float = 10000.0
    out: Path = field(default=Path("results/ladder_convergence.csv"))


def study(cfg: StudyConfig) -> list[dict]:
    u = AmbientFunction(lambda y: np.cos(cfg.frequency * y), TailModel.constant(0.0, 0.0), core_radius=math.inf)
    rows = []
    for s in cfg.orders:
        exact = abs(cfg.frequency) ** (2 * s) * math.cos(cfg.frequency * cfg.point)
        for lvl in range(cfg.levels):
            top = cfg.coarsest / 2**lvl
            ladder = tuple((top / 2**j, top / 2**j) for j in range(3))
            sch = QuadratureScheme(eps=ladder[-1][0], h=ladder[-1][1], outer_radius=cfg.radius, ladder=ladder)
            p = FracParams.of(s)
            val, err = frac_laplacian(u, cfg.point, sch, p)
            truncated = frac_laplacian_eps(u, cfg.point, sch, p)
            rows.append({"s": s, "finest_cutoff": ladder[-1][0], "value": val,
                         "abs_error": abs(val - exact), "error_estimate": err,
                         "truncated_error": abs(truncated - exact)})
    return rows


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--orders", type=float, nargs="+", default=list(StudyConfig.orders))
    ap.add_argument("--k", type=float, default=StudyConfig.frequency)
    ap.add_argument("--at", type=float, default=StudyConfig.point)
    ap.add_argument("--coarsest", type=float, default=StudyConfig.coarsest)
    ap.add_argument("--levels", type=int, default=StudyConfig.levels)
    ap.add_argument("--tail-radius", type=float, default=StudyConfig.radius)
    ap.add_argument("--out", type=Path, default=Path("results/ladder_convergence.csv"))
    a = ap.parse_args(argv)
    cfg = StudyConfig(tuple(a.orders), a.k, a.at, a.coarsest, a.levels, a.tail_radius, a.out)
    rows = study(cfg)
    cfg.out.parent.mkdir(parents=True, exist_ok=True)
    with cfg.out.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        for r in rows:
            w.writerow({k: repr(float(v)) for k, v in r.items()})
    for r in rows:
        print(f"s={r['s']:.2f} eps={r['finest_cutoff']:.4f} error={r['abs_error']:.2e} "
              f"estimate={r['error_estimate']:.2e} truncated only={r['truncated_error']:.2e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
