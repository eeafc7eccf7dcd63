"""Test 1: ES tuning of the constant eddy-viscosity closure on the step problem.

    python scripts/run_test1.py --out runs/test1 [--iters 500]
"""
import argparse
import json
import logging
from pathlib import Path

from romstab import pipeline
from romstab.config import load_config, preset


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", type=Path)
    ap.add_argument("--out", type=Path, default=Path("runs/test1"))
    ap.add_argument("--iters", type=int)
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO)

    cfg = load_config(args.config) if args.config else preset("test1")
    if args.iters is not None:
        cfg.es.max_iters = args.iters
    result = pipeline.run_test1(cfg, args.out)
    print(json.dumps(result.summary, indent=2, sort_keys=True))


if __name__ == "__main__":
    main()
