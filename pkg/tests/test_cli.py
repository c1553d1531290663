import numpy as np
import pytest

from arnsp.cli import main
from arnsp.config import ConfigError, ExperimentConfig, parse_config
from arnsp.experiments import CSV_COLUMNS, format_csv, run_experiment


def read_csv(path):
    lines = path.read_text().splitlines()
    comments = [l for l in lines if l.startswith("#")]
    body = [l.split(",") for l in lines if not l.startswith("#")]
    return comments, body[0], body[1:]


def test_empty_config_gives_reference_scenario():
    cfg = parse_config()
    assert (cfg.theta_b_deg, cfg.theta_e_deg) == (45.0, -30.0)
    assert cfg.spacing == 0.5 and cfg.total_power_dbm == 30.0
    assert (cfg.beta1_sq, cfg.beta2_sq) == (0.9, 0.1)
    assert cfg.rho == 1.0


def test_beta_sum_violation_names_key():
    with pytest.raises(ConfigError, match="beta"):
        parse_config(beta1_sq=0.5, beta2_sq=0.6)


def test_flag_overrides_file(tmp_path):
    f = tmp_path / "c.yaml"
    f.write_text("theta-b-deg: 45\nsnapshots: 50\n")
    cfg = parse_config(f, theta_b_deg=30, snapshots=None)
    assert cfg.theta_b_deg == 30.0
    assert cfg.snapshots == 50


def test_unknown_and_invalid_keys(tmp_path):
    f = tmp_path / "c.yaml"
    f.write_text("bogus: 1\n")
    with pytest.raises(ConfigError, match="bogus"):
        parse_config(f)
    with pytest.raises(ConfigError, match="theta_b_deg"):
        parse_config(theta_b_deg=85)
    with pytest.raises(ConfigError, match="snapshots"):
        parse_config(snapshots="many")
    with pytest.raises(ConfigError, match="mode"):
        parse_config(mode="both")


def test_experiment_defaults_resolved():
    assert parse_config(experiment="sweep-rho").mode == "full"
    assert parse_config(experiment="sweep-ber").mode == "synthetic"
    assert parse_config(experiment="snr-est").trials == 500
    assert parse_config(snr_db=7).uplink_snr_db == 7


SMALL = {
    "estimate": [],
    "snr-est": ["--trials", "20", "--snr-grid", "0,10", "--n-grid", "8,16"],
    "rmse-vs-snr": ["--trials", "20", "--snr-grid", "0,10", "--n-grid", "16"],
    "sweep-ber": ["--trials", "10", "--interval-grid", "0,4", "--symbols-per-trial", "200"],
    "sweep-sr": ["--trials", "10", "--mode", "full", "--snr-grid", "5,10", "--symbols-per-trial", "100"],
    "sweep-rho": ["--trials", "10", "--rho-grid", "0.5,1", "--symbols-per-trial", "100"],
    "eye-pattern": ["--trials", "2", "--angle-step", "10", "--eye-symbols", "50"],
}


@pytest.mark.parametrize("experiment", sorted(SMALL))
def test_cli_runs_and_writes_csv(experiment, tmp_path, capsys):
    out = tmp_path / f"{experiment}.csv"
    assert main([experiment, "--out", str(out), "--seed", "3", *SMALL[experiment]]) == 0
    stdout = capsys.readouterr().out
    assert "theta_b_deg = 45" in stdout
    comments, header, rows = read_csv(out)
    assert tuple(header) == CSV_COLUMNS
    assert any(c.startswith("# seed = 3") for c in comments)
    assert rows and all(r[-1] == "3" for r in rows)
    if experiment == "eye-pattern":
        assert (tmp_path / "eye-pattern_scatter.csv").exists()


def test_rmse_csv_has_crlb_overlay(tmp_path):
    out = tmp_path / "r.csv"
    main(["rmse-vs-snr", "--out", str(out), *SMALL["rmse-vs-snr"]])
    _, header, rows = read_csv(out)
    metrics = {r[header.index("metric")] for r in rows}
    assert {"rmse_deg", "sqrt_crlb_deg"} <= metrics


def test_cli_determinism(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["sweep-ber", "--seed", "11", *SMALL["sweep-ber"]]
    main([*args, "--out", str(a)])
    main([*args, "--out", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_cli_bad_config_exit_code(tmp_path, capsys):
    assert main(["estimate", "--beta1-sq", "0.5", "--beta2-sq", "0.6", "--out", str(tmp_path / "x.csv")]) == 2
    assert "beta" in capsys.readouterr().err


def test_cli_high_failure_rate_exit_code(tmp_path):
    # Bob sits next to the allowed-angle limit: about half the estimates land beyond it
    args = ["estimate", "--trials", "20", "--theta-b", "79.999", "--uplink-snr-db", "0", "--out", str(tmp_path / "f.csv")]
    assert main(args) == 1
    comments, _, _ = read_csv(tmp_path / "f.csv")
    assert any("failed_trials" in c and not c.endswith("= 0 / 0") for c in comments)


def test_float_format_six_significant(tmp_path):
    cfg = parse_config(experiment="estimate")
    text = format_csv(cfg, run_experiment(cfg).result)
    for line in text.splitlines():
        if line.startswith("#") or line.startswith("axis"):
            continue
        value = line.split(",")[5]
        if value not in ("nan", "inf", "-inf"):
            assert len(value.replace("-", "").replace(".", "").split("e")[0].lstrip("0")) <= 6


def test_parallel_workers_match_serial(tmp_path):
    base = parse_config(experiment="sweep-ber", trials=6, interval_grid_deg=[2.0], symbols_per_trial=200, workers=1)
    par = parse_config(experiment="sweep-ber", trials=6, interval_grid_deg=[2.0], symbols_per_trial=200, workers=2)
    assert format_csv(base, run_experiment(base).result) == format_csv(par, run_experiment(par).result)


def test_echo_skips_runtime_fields():
    lines = ExperimentConfig(out="x.csv", workers=3).echo()
    assert not any(l.startswith(("out", "workers")) for l in lines)
