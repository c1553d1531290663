"""Run every experiment at its default settings and write CSVs to a results directory.

    python scripts/reproduce.py [results_dir] [--seed N] [--quick]

``--quick`` cuts trial counts by 10x for a smoke run.
"""

import argparse
import logging
import time
from pathlib import Path

from arnsp.config import EXPERIMENTS, parse_config
from arnsp.experiments import run_experiment, write_outputs


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("out_dir", nargs="?", default="results")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--quick", action="store_true")
    ap.add_argument("--workers", type=int, default=None)
    args = ap.parse_args()
    logging.basicConfig(level=logging.WARNING)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    runs = [(name, {}) for name in EXPERIMENTS]
    # the downlink sweeps are also worth having in full-pipeline mode
    runs += [(name, {"mode": "full"}) for name in ("sweep-ber", "sweep-sr")]
    runs += [("sweep-rho", {"mode": "synthetic"})]
    for name, extra in runs:
        cfg = parse_config(experiment=name, seed=args.seed, workers=args.workers, **extra)
        if args.quick:
            cfg.trials = max(1, cfg.trials // 10)
        suffix = f"_{extra['mode']}" if extra else ""
        cfg.out = str(out / f"{name}{suffix}.csv")
        t0 = time.perf_counter()
        res = run_experiment(cfg)
        write_outputs(cfg, res)
        print(f"{cfg.out}: {len(res.result.rows)} rows, failure rate {res.result.failure_rate:.1%}, "
              f"{time.perf_counter() - t0:.1f} s")


if __name__ == "__main__":
    main()
