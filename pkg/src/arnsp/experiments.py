"""Seeded Monte-Carlo experiments and their CSV output.

Every trial draws from ``trial_rng(seed, trial)``, never keyed by axis value,
array size or scheme. All points of a sweep and all schemes therefore see the
same underlying draws (smaller arrays see a prefix of a larger array's noise),
which keeps scheme and sweep comparisons tight, and results do not depend on
how trials are distributed over workers.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from pathlib import Path

import numpy as np

from .array_model import ArrayGeometry, Convention
from .beamformer import Scheme
from .config import ExperimentConfig
from .downlink import (
    ExperimentResult,
    LinkConfig,
    ResultRow,
    SymbolBlock,
    bit_errors,
    dbm_to_watts,
    eye_phases,
    phase_spread,
    secrecy_rate,
)
from .estimator import Label, estimate_sources
from .pipeline import ALL_SCHEMES, TRIAL_FAILURES, full_design, synthetic_design, trial_rng
from .predictor import crlb
from .uplink import UplinkScenario, generate_snapshots

log = logging.getLogger(__name__)

CSV_COLUMNS = ("axis", "axis_value", "n_antennas", "scheme", "metric", "value", "stderr", "trials", "failures", "seed")
MAX_FAILURE_RATE = 0.10


@dataclass
class RunOutput:
    result: ExperimentResult
    scatter: list | None = None  # (angle_deg, scheme, symbol, phase_deg) rows for eye-pattern


# ---------------------------------------------------------------- helpers


def _map(fn, items, workers):
    items = list(items)
    if workers is None:
        workers = os.cpu_count() or 1
    if workers <= 1 or len(items) < 2:
        return [fn(i) for i in items]
    chunk = max(1, len(items) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=chunk))


def _geom(cfg, n=None, convention=Convention.DOWNLINK_COS_CENTERED):
    return ArrayGeometry(n or cfg.n_antennas, cfg.spacing, convention)


def _link(cfg, snr_db):
    return LinkConfig.from_snr(
        snr_db,
        cfg.total_power_dbm,
        beta1_sq=cfg.beta1_sq,
        beta2_sq=cfg.beta2_sq,
        theta_b=np.deg2rad(cfg.theta_b_deg),
        theta_e=np.deg2rad(cfg.theta_e_deg),
        seed=cfg.seed,
    )


def _scenario(cfg, uplink_snr_db):
    """Uplink with unit noise variance and per-source SNRs as configured."""
    return UplinkScenario(
        theta_b=np.deg2rad(cfg.theta_b_deg),
        theta_e=np.deg2rad(cfg.theta_e_deg),
        power_b=10 ** (uplink_snr_db / 10),
        power_e=10 ** ((uplink_snr_db + cfg.eve_snr_offset_db) / 10),
        noise_var=1.0,
        n_snapshots=cfg.snapshots,
        seed=cfg.seed,
    )


def _design_kw(cfg):
    return dict(
        fixed_delta=np.deg2rad(cfg.fixed_delta_deg),
        delta_cap=np.deg2rad(cfg.delta_cap_deg),
        max_angle=np.deg2rad(cfg.max_angle_deg),
    )


def _mean_stderr(x):
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        return float("nan"), float("nan")
    se = float(np.std(x, ddof=1) / np.sqrt(x.size)) if x.size > 1 else 0.0
    return float(np.mean(x)), se


def _row(result, axis_value, metric, scheme, values, failures=0, n=0):
    mean, se = _mean_stderr(values)
    result.rows.append(ResultRow(float(axis_value), metric, str(scheme), mean, se, len(values), failures, n))


# ---------------------------------------------------------------- uplink estimation


def _uplink_trial(cfg: ExperimentConfig, n: int, trial: int):
    """Estimates for every SNR grid point from one trial's draws; None marks a failure."""
    geom = _geom(cfg, n, Convention.UPLINK_SIN)
    out = []
    for snr in cfg.snr_grid_db:
        scn = _scenario(cfg, snr)
        try:
            snap = generate_snapshots(scn, geom, rng=trial_rng(cfg.seed, trial))
            est = {s.label: s for s in estimate_sources(snap, geom, 2)}
            out.append(
                (est[Label.BOB].angle_est, est[Label.EVE].angle_est, est[Label.BOB].snr_est, est[Label.EVE].snr_est)
            )
        except (*TRIAL_FAILURES, KeyError) as e:
            log.info("trial %d (N=%d, SNR=%g dB) failed: %s", trial, n, snr, e)
            out.append(None)
    return out


def _uplink_sweep(cfg: ExperimentConfig, axis_metrics) -> ExperimentResult:
    res = ExperimentResult(cfg.experiment, "snr_db", cfg.seed)
    truth = {Label.BOB: np.deg2rad(cfg.theta_b_deg), Label.EVE: np.deg2rad(cfg.theta_e_deg)}
    for n in cfg.n_grid:
        records = _map(partial(_uplink_trial, cfg, n), range(cfg.trials), cfg.workers)
        for i, snr in enumerate(cfg.snr_grid_db):
            ok = [r[i] for r in records if r[i] is not None]
            fails = cfg.trials - len(ok)
            arr = np.array(ok, dtype=float).reshape(-1, 4)
            for j, label in enumerate((Label.BOB, Label.EVE)):
                exact_db = snr + (cfg.eve_snr_offset_db if label is Label.EVE else 0.0)
                axis_metrics(res, snr, n, label, arr[:, j], arr[:, 2 + j], truth[label], exact_db, fails)
    return res


def _snr_metrics(cfg, res, snr, n, label, angles, gammas, theta, exact_db, fails):
    mean_lin, se_lin = _mean_stderr(gammas)
    mean_db = 10 * np.log10(mean_lin) if mean_lin > 0 else -np.inf
    se_db = 10 / np.log(10) * se_lin / mean_lin if mean_lin > 0 else np.nan
    res.rows.append(ResultRow(snr, "snr_est_db", label.value, mean_db, se_db, gammas.size, fails, n))
    positive = gammas[gammas > 0]
    err_db = 10 * np.log10(positive) - exact_db
    rmse = float(np.sqrt(np.mean(err_db**2))) if positive.size else np.nan
    se = float(np.std(err_db**2, ddof=1) / np.sqrt(positive.size) / (2 * rmse)) if positive.size > 1 else 0.0
    res.rows.append(
        ResultRow(snr, "snr_rmse_db", label.value, rmse, se, positive.size, fails + gammas.size - positive.size, n)
    )


def _rmse_metrics(cfg, res, snr, n, label, angles, gammas, theta, exact_db, fails):
    err = angles - theta
    rmse = float(np.sqrt(np.mean(err**2))) if err.size else np.nan
    se = float(np.std(err**2, ddof=1) / np.sqrt(err.size) / (2 * rmse)) if err.size > 1 and rmse > 0 else 0.0
    res.rows.append(ResultRow(snr, "rmse_deg", label.value, np.degrees(rmse), np.degrees(se), err.size, fails, n))
    bound = crlb(theta, 10 ** (exact_db / 10), cfg.snapshots, ArrayGeometry(n, cfg.spacing))
    res.rows.append(ResultRow(snr, "sqrt_crlb_deg", label.value, np.degrees(np.sqrt(bound)), 0.0, err.size, fails, n))


def run_snr_est(cfg):
    return _uplink_sweep(cfg, partial(_snr_metrics, cfg))


def run_rmse_vs_snr(cfg):
    return _uplink_sweep(cfg, partial(_rmse_metrics, cfg))


# ---------------------------------------------------------------- downlink sweeps


def _link_trial(cfg: ExperimentConfig, trial: int):
    """Bit errors and secrecy rates, shape (points, schemes); NaN rows mark failures."""
    geom = _geom(cfg)
    rng = trial_rng(cfg.seed, trial)
    kw = _design_kw(cfg)
    if cfg.mode == "synthetic":
        unit = rng.uniform(-1.0, 1.0, 2)
        block = SymbolBlock.draw(rng, cfg.symbols_per_trial)
        points = cfg.interval_grid_deg
    else:
        points = cfg.snr_grid_db
    errs = np.full((len(points), len(ALL_SCHEMES)), np.nan)
    srs = np.full_like(errs, np.nan)
    for i, p in enumerate(points):
        if cfg.mode == "synthetic":
            link = _link(cfg, cfg.snr_db)
            dr = synthetic_design(
                link.theta_b, link.theta_e, np.deg2rad(p), unit, geom, ALL_SCHEMES, kw["fixed_delta"], 1.0
            )
        else:
            link = _link(cfg, p)
            prng = trial_rng(cfg.seed, trial)
            try:
                dr = full_design(_scenario(cfg, p - cfg.snr_db + cfg.uplink_snr_db), geom, prng, (cfg.rho,), **kw)[0]
            except TRIAL_FAILURES as e:
                log.info("trial %d at %g dB failed: %s", trial, p, e)
                continue
            block = SymbolBlock.draw(prng, cfg.symbols_per_trial)
        for j, s in enumerate(ALL_SCHEMES):
            bf = dr.beamformers[s]
            errs[i, j] = bit_errors(bf, link, geom, block)
            srs[i, j] = secrecy_rate(bf, link, geom)
    return errs, srs


def _link_sweep(cfg, metric) -> ExperimentResult:
    axis = "interval_deg" if cfg.mode == "synthetic" else "snr_db"
    points = cfg.interval_grid_deg if cfg.mode == "synthetic" else cfg.snr_grid_db
    recs = _map(partial(_link_trial, cfg), range(cfg.trials), cfg.workers)
    errs = np.stack([r[0] for r in recs])  # trials x points x schemes
    srs = np.stack([r[1] for r in recs])
    res = ExperimentResult(cfg.experiment, axis, cfg.seed)
    bits = 2 * cfg.symbols_per_trial
    for i, p in enumerate(points):
        for j, s in enumerate(ALL_SCHEMES):
            ok = ~np.isnan(errs[:, i, j])
            fails = int(np.count_nonzero(~ok))
            if metric == "ber":
                _row(res, p, "ber", s.value, errs[ok, i, j] / bits, fails, cfg.n_antennas)
            else:
                _row(res, p, "secrecy_rate", s.value, srs[ok, i, j], fails, cfg.n_antennas)
    return res


def run_sweep_ber(cfg):
    return _link_sweep(cfg, "ber")


def run_sweep_sr(cfg):
    return _link_sweep(cfg, "sr")


def _rho_trial(cfg: ExperimentConfig, trial: int):
    geom = _geom(cfg)
    rng = trial_rng(cfg.seed, trial)
    link = _link(cfg, cfg.snr_db)
    kw = _design_kw(cfg)
    out = np.full(len(cfg.rho_grid), np.nan)
    if cfg.mode == "synthetic":
        unit = rng.uniform(-1.0, 1.0, 2)
        designs = [
            synthetic_design(link.theta_b, link.theta_e, np.deg2rad(cfg.interval_deg), unit, geom, (Scheme.AR_NSP,), kw["fixed_delta"], rho)
            for rho in cfg.rho_grid
        ]
    else:
        try:
            designs = full_design(_scenario(cfg, cfg.uplink_snr_db), geom, rng, cfg.rho_grid, (Scheme.AR_NSP,), **kw)
        except TRIAL_FAILURES as e:
            log.info("trial %d failed: %s", trial, e)
            return out
    block = SymbolBlock.draw(rng, cfg.symbols_per_trial)
    for i, dr in enumerate(designs):
        out[i] = bit_errors(dr.beamformers[Scheme.AR_NSP], link, geom, block)
    return out


def run_sweep_rho(cfg):
    errs = np.stack(_map(partial(_rho_trial, cfg), range(cfg.trials), cfg.workers))
    res = ExperimentResult(cfg.experiment, "rho", cfg.seed)
    for i, rho in enumerate(cfg.rho_grid):
        ok = ~np.isnan(errs[:, i])
        _row(res, rho, "ber", Scheme.AR_NSP.value, errs[ok, i] / (2 * cfg.symbols_per_trial), int(np.count_nonzero(~ok)), cfg.n_antennas)
    return res


# ---------------------------------------------------------------- eye pattern


def eye_grid(cfg) -> np.ndarray:
    n = int(round(180 / cfg.angle_step_deg))
    return np.linspace(-90.0, 90.0, n + 1)


def _eye_trial(cfg: ExperimentConfig, draw: int, keep_phases: bool = False):
    geom = _geom(cfg)
    rng = trial_rng(cfg.seed, draw)
    link = _link(cfg, cfg.snr_db)
    grid = np.deg2rad(eye_grid(cfg))
    kw = _design_kw(cfg)
    if cfg.mode == "synthetic":
        unit = rng.uniform(-1.0, 1.0, 2)
        dr = synthetic_design(link.theta_b, link.theta_e, np.deg2rad(cfg.interval_deg), unit, geom, ALL_SCHEMES, kw["fixed_delta"], 1.0)
    else:
        try:
            dr = full_design(_scenario(cfg, cfg.uplink_snr_db), geom, rng, (cfg.rho,), **kw)[0]
        except TRIAL_FAILURES as e:
            log.info("eye draw %d failed: %s", draw, e)
            return None
    block = SymbolBlock.draw(rng, cfg.eye_symbols)
    noise = np.sqrt(0.5) * (rng.standard_normal((grid.size, cfg.eye_symbols)) + 1j * rng.standard_normal((grid.size, cfg.eye_symbols)))
    spreads, phases = [], []
    for s in ALL_SCHEMES:
        ph = eye_phases(dr.beamformers[s], link, geom, grid, block, noise)
        spreads.append(phase_spread(ph, block.symbols))
        if keep_phases:
            phases.append(ph)
    return np.array(spreads), (phases if keep_phases else None)


def eye_pattern(cfg: ExperimentConfig, theta_deg=None):
    """Mean phase spread per (scheme, angle) over ``cfg.trials`` draws plus scatter data.

    Returns ``(grid_deg, spreads[draw, scheme, angle], scatter_phases)``; the
    scatter phases come from draw 0, one (angles x symbols) array per scheme.
    """
    first = _eye_trial(cfg, 0, keep_phases=True)
    rest = _map(partial(_eye_trial, cfg), range(1, cfg.trials), cfg.workers)
    recs = [first] + rest
    spreads = np.stack([r[0] if r is not None else np.full((len(ALL_SCHEMES), eye_grid(cfg).size), np.nan) for r in recs])
    scatter = first[1] if first is not None else None
    return eye_grid(cfg), spreads, scatter


def run_eye_pattern(cfg):
    grid, spreads, scatter = eye_pattern(cfg)
    res = ExperimentResult(cfg.experiment, "angle_deg", cfg.seed)
    ok = ~np.isnan(spreads[:, 0, 0])
    for j, s in enumerate(ALL_SCHEMES):
        for k, a in enumerate(grid):
            _row(res, a, "phase_spread_deg", s.value, np.degrees(spreads[ok, j, k]), int(np.count_nonzero(~ok)), cfg.n_antennas)
    rows = []
    if scatter is not None:
        for j, s in enumerate(ALL_SCHEMES):
            ph = np.degrees(scatter[j])
            for k, a in enumerate(grid):
                rows.extend((a, s.value, m, ph[k, m]) for m in range(ph.shape[1]))
    return RunOutput(res, rows)


# ---------------------------------------------------------------- single estimate


def run_estimate(cfg):
    """Algorithm walk-through: estimates, predicted intervals and per-scheme link metrics."""
    geom = _geom(cfg)
    link = _link(cfg, cfg.snr_db)
    res = ExperimentResult(cfg.experiment, "trial", cfg.seed, attempted=cfg.trials)
    for t in range(cfg.trials):
        rng = trial_rng(cfg.seed, t)
        try:
            dr = full_design(_scenario(cfg, cfg.uplink_snr_db), geom, rng, (cfg.rho,), **_design_kw(cfg))[0]
        except TRIAL_FAILURES as e:
            log.warning("estimate trial %d failed: %s", t, e)
            res.failed += 1
            res.rows.append(ResultRow(t, "angle_est_deg", "bob", np.nan, np.nan, 0, 1, cfg.n_antennas))
            continue
        for src in dr.sources:
            pred = dr.predictions[src.label]
            for metric, value in (
                ("angle_est_deg", np.degrees(src.angle_est)),
                ("snr_est_db", 10 * np.log10(src.snr_est) if src.snr_est > 0 else -np.inf),
                ("sqrt_crlb_deg", np.degrees(np.sqrt(pred.crlb_var))),
                ("delta_max_deg", np.degrees(pred.delta_max)),
            ):
                res.rows.append(ResultRow(t, metric, src.label.value, value, 0.0, 1, 0, cfg.n_antennas))
        block = SymbolBlock.draw(rng, cfg.symbols_per_trial)
        for s in ALL_SCHEMES:
            bf = dr.beamformers[s]
            res.rows.append(ResultRow(t, "secrecy_rate", s.value, secrecy_rate(bf, link, geom), 0.0, 1, 0, cfg.n_antennas))
            ber = bit_errors(bf, link, geom, block) / (2 * cfg.symbols_per_trial)
            res.rows.append(ResultRow(t, "ber", s.value, ber, 0.0, 1, 0, cfg.n_antennas))
    return res


# ---------------------------------------------------------------- dispatch and output

RUNNERS = {
    "estimate": run_estimate,
    "snr-est": run_snr_est,
    "rmse-vs-snr": run_rmse_vs_snr,
    "sweep-ber": run_sweep_ber,
    "sweep-sr": run_sweep_sr,
    "sweep-rho": run_sweep_rho,
    "eye-pattern": run_eye_pattern,
}


def run_experiment(cfg: ExperimentConfig) -> RunOutput:
    out = RUNNERS[cfg.experiment](cfg)
    return out if isinstance(out, RunOutput) else RunOutput(out)


def _g(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    x = float(x)
    if np.isnan(x):
        return "nan"
    if np.isinf(x):
        return "inf" if x > 0 else "-inf"
    s = f"{x:.6g}"
    return "0" if s == "-0" else s


def format_csv(cfg: ExperimentConfig, result: ExperimentResult) -> str:
    lines = [f"# arnsp experiment: {cfg.experiment}"]
    lines += [f"# {line}" for line in cfg.echo()]
    failed, tot = result.failure_counts()
    lines.append(f"# failed_trials = {failed} / {tot}")
    lines.append(",".join(CSV_COLUMNS))
    for r in result.rows:
        lines.append(
            ",".join(
                [
                    result.axis,
                    _g(r.axis_value),
                    str(r.n_antennas),
                    r.scheme,
                    r.metric,
                    _g(r.value),
                    _g(r.stderr),
                    str(r.trials),
                    str(r.failures),
                    str(cfg.seed),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def format_scatter_csv(cfg: ExperimentConfig, rows) -> str:
    lines = [f"# arnsp experiment: {cfg.experiment} scatter (draw 0)"]
    lines += [f"# {line}" for line in cfg.echo()]
    lines.append("angle_deg,scheme,symbol,phase_deg")
    lines += [f"{_g(a)},{s},{m},{_g(p)}" for a, s, m, p in rows]
    return "\n".join(lines) + "\n"


def default_out(cfg) -> Path:
    return Path(cfg.out) if cfg.out else Path(f"{cfg.experiment}.csv")


def write_outputs(cfg: ExperimentConfig, out: RunOutput) -> list[Path]:
    path = default_out(cfg)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_csv(cfg, out.result), encoding="utf-8")
    written = [path]
    if out.scatter:
        sp = path.with_name(path.stem + "_scatter" + path.suffix)
        sp.write_text(format_scatter_csv(cfg, out.scatter), encoding="utf-8")
        written.append(sp)
    return written
