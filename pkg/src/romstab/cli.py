"""Command-line driver.

    romstab truth  --preset test1 --out runs/test1
    romstab pod    --config my.yaml
    romstab rom    --preset test1 --closure none
    romstab tune   --preset test2 --iters 100
    romstab report --out runs/test1

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import io
from .config import dump_config, load_config, preset
from .errors import ConfigError, RomstabError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="YAML experiment file")
    common.add_argument("--preset", choices=("test1", "test2"), help="built-in experiment")
    common.add_argument("--out", type=Path, help="output directory (overrides config)")
    common.add_argument("--iters", type=int, help="override es.max_iters")
    common.add_argument("--closure", help="override closure kind, e.g. none, H, R, H+NEV")
    common.add_argument("--mu-e", type=float, help="override closure amplitude mu_e")
    common.add_argument("--mu-nl", type=float, help="override nonlinear amplitude mu_nl")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="romstab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("truth", parents=[common], help="solve the FEM truth and write truth.csv")
    sub.add_parser("pod", parents=[common], help="write POD eigenvalues and modes")
    sub.add_parser("rom", parents=[common], help="integrate the ROM with a fixed closure")
    sub.add_parser("tune", parents=[common], help="ES-tune the closure amplitudes")
    sub.add_parser("report", parents=[common], help="summarize a finished tuning run")
    return p


def _resolve_config(args):
    if args.config is not None:
        cfg = load_config(args.config)
    else:
        cfg = preset(args.preset or "test1")
    if args.iters is not None:
        if args.iters < 0:
            raise ConfigError("es.max_iters", "must be >= 0")
        cfg.es.max_iters = args.iters
    if args.closure is not None:
        cfg.closure.kind = args.closure
    if args.mu_e is not None:
        cfg.closure.mu_e = args.mu_e
    if args.mu_nl is not None:
        cfg.closure.mu_nl = args.mu_nl
    if args.out is not None:
        cfg.out = str(args.out)
    return cfg.validate()


def report(out: Path) -> dict:
    out = Path(out)
    summary_path = out / "summary.json"
    if not summary_path.exists():
        raise ConfigError("out", f"no summary.json in {out}; run `tune` first")
    summary = json.loads(summary_path.read_text())
    hist = io.load_history(out / "history.csv")
    Q = hist["Q"]
    tail = hist["mu_e"][-min(100, len(Q)):]
    summary["history_rows"] = int(len(Q))
    summary["Q_drop_first_50"] = float(1.0 - Q[: min(51, len(Q))].min() / Q[0]) if Q[0] > 0 else 0.0
    summary["mu_e_tail_mean"] = float(np.mean(tail))
    summary["mu_e_tail_std"] = float(np.std(tail))
    return summary


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    log = logging.getLogger("romstab")
    stage = args.command
    try:
        if stage == "report":
            out = args.out if args.out is not None else Path(_resolve_config(args).out)
            print(json.dumps(report(out), indent=2, sort_keys=True))
            return EXIT_OK
        cfg = _resolve_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    from . import pipeline

    out = Path(cfg.out)
    try:
        dump_config(cfg, out / "config.yaml")
        if stage == "truth":
            snaps = pipeline.run_truth(cfg, out)
            log.info("wrote %d snapshots to %s", snaps.s, out / "truth.csv")
        elif stage == "pod":
            setup = pipeline.run_pod(cfg, out)
            log.info("POD: r_w=%d r_T=%d, lambda_1 = %.4g / %.4g", setup.basis_w.r, setup.basis_T.r,
                     setup.basis_w.eigenvalues[0], setup.basis_T.eigenvalues[0])
        elif stage == "rom":
            result = pipeline.run_rom(cfg, out)
            print(json.dumps(result, indent=2, sort_keys=True))
        elif stage == "tune":
            result = pipeline.run_tune(cfg, out)
            print(json.dumps(result.summary, indent=2, sort_keys=True))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (RomstabError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure in stage '{stage}': {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
