"""Test 2: dual-channel ES tuning of the linear + nonlinear closure.

Also runs the Test-1 linear-only tuning on the same truth data so the
temperature errors of the two closures can be compared.

    python scripts/run_test2.py --out runs/test2 [--iters 500]
"""
import argparse
import json
import logging
from pathlib import Path

from romstab import pipeline
from romstab.config import preset


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("runs/test2"))
    ap.add_argument("--iters", type=int, default=500)
    ap.add_argument("--skip-linear", action="store_true", help="do not rerun the linear-only tuning")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO)

    cfg = preset("test2")
    cfg.es.max_iters = args.iters
    setup = pipeline.build_rom(cfg)
    result = pipeline.run_test2(cfg, args.out, setup)
    summary = dict(result.summary)
    Q = [r.Q for r in result.state.history]
    summary["Q_drop_first_50"] = 1.0 - min(Q[:51]) / Q[0]

    if not args.skip_linear:
        lin_cfg = preset("test1")
        lin_cfg.es.max_iters = args.iters
        linear = pipeline.run_test1(lin_cfg, args.out / "linear_only", setup)
        summary["error_T_linear_only"] = linear.summary["error_T_tuned"]
        summary["T_error_below_linear"] = summary["error_T_tuned"] <= summary["error_T_linear_only"]
    print(json.dumps(summary, indent=2, sort_keys=True))


if __name__ == "__main__":
    main()
