"""Diagnostics for the ES tuner. These are not acceptance runs.

1. Synthetic quadratic cost: the averaged ES update moves the integrator by
   about -a^2 cos(omega t_f) Q'(y) / 2 per iteration, so the sign of
   cos(omega t_f) decides between descent and ascent, and a^2 sets the speed.
   The sweep runs several (a, omega) pairs and reports the tail mean.
2. Step problem, constant eddy viscosity: scans the learning cost over mu_e
   to locate the optimum the tuner should find.
3. Step problem, retuned ES (omega = 50 so that cos(omega t_f) > 0, and a
   on the scale of that optimum): shows the tuner descending when the phase
   condition holds.

    python scripts/es_diagnostics.py --out runs/diagnostics [--skip-scan] [--skip-retuned]
"""
import argparse
import csv
import math
from pathlib import Path

import numpy as np

from romstab import pipeline
from romstab.closures import ClosureSpec
from romstab.config import preset
from romstab.es import EsParams, tune


def synthetic_sweep(out: Path):
    rows = []
    for a in (0.01, 0.03, 0.1):
        for omega in (10.0, 15.0, 50.0):
            for iters in (2000, 20000):
                s = tune(lambda mu: (mu[0] - 1.0) ** 2 + 0.1, EsParams(a, omega, 1.0, iters))
                mus = np.array([r.mu_hat[0] for r in s.history])
                tail = mus[-len(mus) // 4:].mean()
                rows.append((a, omega, iters, math.cos(omega), tail))
                print(f"a={a:<5} omega={omega:<5} iters={iters:<6} cos={math.cos(omega):+.3f} tail mean={tail:+.4f}")
    with (out / "es_synthetic.csv").open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["a", "omega", "iters", "cos_omega_tf", "tail_mean"])
        w.writerows(rows)


def cost_scan(out: Path):
    setup = pipeline.build_rom(preset("test1"))
    grid = np.concatenate([[0.0], np.geomspace(1e-4, 3.0, 25)])
    rows = []
    for mu_e in grid:
        Q = setup.cost(ClosureSpec("H", mu_e=float(mu_e)))
        rows.append((mu_e, Q))
        print(f"mu_e={mu_e:.4g}  Q={Q:.6g}")
    best = min(rows, key=lambda r: r[1])
    print(f"best mu_e on grid: {best[0]:.4g} (Q={best[1]:.6g}); ROM-G Q={rows[0][1]:.6g}")
    with (out / "cost_scan_H.csv").open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["mu_e", "Q"])
        w.writerows(rows)


def retuned_test1(out: Path, amplitudes=(1e-3, 1.5e-3), omega=50.0, iters=500):
    setup = pipeline.build_rom(preset("test1"))
    for a in amplitudes:
        cfg = preset("test1")
        cfg.es.a, cfg.es.omega, cfg.es.max_iters = [a], [omega], iters
        result = pipeline.run_test1(cfg, out / f"test1_a{a:g}_w{omega:g}", setup)
        s = result.summary
        tail = np.array([r.mu_hat[0] for r in result.state.history[-100:]])
        print(
            f"a={a:g} omega={omega:g}: Q {s['Q_initial']:.6g} -> {s['Q_final']:.6g} "
            f"({100 * (1 - s['Q_final'] / s['Q_initial']):.1f}% drop), "
            f"tail mu_e {tail.mean():.4g} +- {tail.std():.2g}"
        )


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("runs/diagnostics"))
    ap.add_argument("--skip-scan", action="store_true")
    ap.add_argument("--skip-retuned", action="store_true")
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    synthetic_sweep(args.out)
    if not args.skip_scan:
        cost_scan(args.out)
    if not args.skip_retuned:
        retuned_test1(args.out)


if __name__ == "__main__":
    main()
