"""Command-line entry point: ``arnsp <experiment> [flags]``."""

from __future__ import annotations

import argparse
import logging
import sys

from .config import EXPERIMENTS, MODES, ConfigError, parse_config
from .experiments import MAX_FAILURE_RATE, run_experiment, write_outputs

log = logging.getLogger("arnsp")


def _floats(text):
    return [float(x) for x in text.replace(",", " ").split()]


def _ints(text):
    return [int(x) for x in text.replace(",", " ").split()]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("common")
    g.add_argument("--config", help="YAML file of key: value settings")
    g.add_argument("--seed", type=int)
    g.add_argument("--out", help="output CSV path (default: <experiment>.csv)")
    g.add_argument("--trials", type=int)
    g.add_argument("--n-antennas", type=int)
    g.add_argument("--snapshots", type=int)
    g.add_argument("--mode", choices=MODES)
    g.add_argument("--workers", type=int)
    s = common.add_argument_group("scenario (angles in degrees)")
    s.add_argument("--theta-b", dest="theta_b_deg", type=float)
    s.add_argument("--theta-e", dest="theta_e_deg", type=float)
    s.add_argument("--spacing", type=float, help="element spacing in wavelengths")
    s.add_argument("--total-power-dbm", type=float)
    s.add_argument("--beta1-sq", type=float)
    s.add_argument("--beta2-sq", type=float)
    s.add_argument("--snr-db", type=float, help="downlink P_s/sigma^2; also the uplink SNR unless --uplink-snr-db")
    s.add_argument("--uplink-snr-db", type=float)
    s.add_argument("--eve-snr-offset-db", type=float)
    s.add_argument("--rho", type=float)
    s.add_argument("--fixed-delta", dest="fixed_delta_deg", type=float)
    s.add_argument("--delta-cap", dest="delta_cap_deg", type=float)
    s.add_argument("--max-angle", dest="max_angle_deg", type=float)
    w = common.add_argument_group("sweeps")
    w.add_argument("--snr-grid", dest="snr_grid_db", type=_floats)
    w.add_argument("--n-grid", type=_ints)
    w.add_argument("--interval-grid", dest="interval_grid_deg", type=_floats)
    w.add_argument("--rho-grid", type=_floats)
    w.add_argument("--interval", dest="interval_deg", type=float)
    w.add_argument("--angle-step", dest="angle_step_deg", type=float)
    w.add_argument("--eye-symbols", type=int)
    w.add_argument("--symbols-per-trial", type=int)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="arnsp", description="Adaptive robust NSP directional-modulation experiments")
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        sub.add_parser(name, parents=[common])
    return parser


def main(argv=None) -> int:
    args = vars(build_parser().parse_args(argv))
    logging.basicConfig(level=logging.INFO if args.pop("verbose") else logging.WARNING, format="%(levelname)s %(message)s")
    config_file = args.pop("config")
    try:
        cfg = parse_config(config_file, **args)
    except (ConfigError, OSError) as e:
        print(f"arnsp: config error: {e}", file=sys.stderr)
        return 2
    for line in cfg.echo(runtime=True):
        print(line)
    out = run_experiment(cfg)
    for path in write_outputs(cfg, out):
        print(f"wrote {path}")
    rate = out.result.failure_rate
    if rate > 0:
        log.warning("%.1f%% of trials failed estimation and were excluded", 100 * rate)
    if rate > MAX_FAILURE_RATE:
        print(f"arnsp: failure rate {rate:.1%} exceeds {MAX_FAILURE_RATE:.0%}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
