import csv
import json

import pytest

from slabcgo.cli import EXIT_CONFIG, EXIT_OK, ConfigError, ExperimentConfig, main, run


def _rows(path):
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# ")
    return list(csv.DictReader(lines[1:]))


def test_ini_round_trip():
    cfg = ExperimentConfig("identity-limits", seed=3)
    cfg.phase.xi = (0.7, 0.4, 0.0)
    cfg.phase.tau_list = (8.0, 16.0)
    cfg.phase.scenario = "same"
    cfg.grid.n = 16
    cfg.tolerances = {"tol": 1e-9}
    back = ExperimentConfig.from_ini(cfg.to_ini())
    assert back == cfg


@pytest.mark.parametrize("argv, message", [
    (["cgo-decay", "--tau-list", ""], "empty"),
    (["cgo-decay", "--tau-list", "16,8"], "increasing"),
    (["identity-limits", "--tau-list=-1,2"], "positive"),
    (["cgo-decay", "--xi", "1,2"], "three components"),
])
def test_bad_flags_exit_with_config_code(argv, message, tmp_path, caplog):
    assert main(argv + ["--out", str(tmp_path)]) == EXIT_CONFIG
    assert message in caplog.text


def test_config_errors(tmp_path):
    with pytest.raises(ConfigError, match="unknown experiment"):
        ExperimentConfig("teleport").validate()
    with pytest.raises(ConfigError, match="missing"):
        ExperimentConfig.from_ini("[phase]\nxi = 1,2,3\n")
    with pytest.raises(ConfigError, match="not a tolerance"):
        ExperimentConfig("cgo-decay", tolerances={"speed": 1.0}).validate()
    bad = tmp_path / "bad.ini"
    bad.write_text("[experiment]\nkind = phase-table\n[grid]\nwidth = 3\n")
    assert main(["run", str(bad)]) == EXIT_CONFIG
    assert main(["run", str(tmp_path / "missing.ini")]) == EXIT_CONFIG


def test_constant_factorization_exits_cleanly(tmp_path):
    assert main(["factorize-check", "--contrast", "0", "--out", str(tmp_path)]) == EXIT_OK
    rows = _rows(tmp_path / "factorize_check.csv")
    assert all(float(r["residual"]) <= 1e-10 for r in rows)
    report = json.loads((tmp_path / "factorize_check.json").read_text())
    assert report["passed"] is True and "[experiment]" in report["config"]
    assert (tmp_path / "plot_factorize_check.py").exists()


@pytest.mark.slow
def test_cgo_decay_reports_fitted_slope(tmp_path):
    assert main(["cgo-decay", "--grid", "16", "--tau-list", "8,16,32,64", "--out", str(tmp_path)]) == EXIT_OK
    rows = _rows(tmp_path / "cgo_decay.csv")
    assert "fitted_slope" in rows[0]
    assert -1.3 <= float(rows[0]["fitted_slope"]) <= -0.7


def test_outputs_are_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    cfg = ExperimentConfig("phase-table")
    cfg.phase.tau_list = (2.0, 4.0, 8.0)
    run(cfg, str(a))
    run(cfg, str(b))
    for name in ("phase_table.csv", "phase_table.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_run_subcommand_with_config_file(tmp_path):
    cfg = ExperimentConfig("phase-table")
    cfg.phase.tau_list = (2.0, 4.0)
    cfg.output.out = str(tmp_path / "out")
    ini = tmp_path / "phase.ini"
    ini.write_text(cfg.to_ini())
    assert main(["run", str(ini)]) == EXIT_OK
    assert len(_rows(tmp_path / "out" / "phase_table.csv")) == 4


def test_dump_fields_writes_binary(tmp_path):
    cfg = ExperimentConfig("forward-mms")
    cfg.grid.n = 32
    cfg.grid.n3 = 16
    cfg.output.dump_fields = True
    code, result = run(cfg, str(tmp_path))
    assert result.fields
    assert any(p.suffix == ".bin" for p in tmp_path.iterdir())
