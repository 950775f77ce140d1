import csv
import io
import math
import subprocess
import sys
from pathlib import Path

import pytest

from urllc_mc.cli import CCDF_COLUMNS, KPI_COLUMNS, RunManifest, main, run
from urllc_mc.config import ConfigError, ScenarioConfig, format_config, parse_config
from urllc_mc.policy import PolicyName

GOLDEN = Path(__file__).parent / "golden"


def test_empty_config_is_reference_scenario():
    cfg = parse_config("")
    assert cfg == ScenarioConfig()
    assert (cfg.n_users, cfg.activation_prob, cfg.policy.delta_mc_db, cfg.harq_rtt_ttis,
            cfg.initial_budget_ttis, cfg.initial_bler, cfg.tti_ms) == (10, 0.3, 20.0, 2, 6, 0.1, 0.125)


def test_range_error():
    with pytest.raises(ConfigError, match="line 2, key 'activation_prob'"):
        parse_config("n_users = 4\nactivation_prob = 1.5\n")


def test_latency_aware_policy():
    cfg = parse_config('policy = "latency_aware"\ntau_ttis = 5\n')
    assert cfg.policy.kind is PolicyName.LATENCY_AWARE_MC and cfg.policy.tau_ttis == 5


def test_infinite_tau():
    assert math.isinf(parse_config("tau_ttis = inf").policy.tau_ttis)


@pytest.mark.parametrize("text, match", [
    ("polcy = 1", "line 1, key 'polcy': unknown key"),
    ("n_users = 2.5", "expected an integer"),
    ("fading = 1", "expected true/false"),
    ('policy = "dual"', "unknown policy"),
    ("n_users =", "parse error"),
    ("mc_success = \"both\"", "mc_success"),
])
def test_config_errors(text, match):
    with pytest.raises(ConfigError, match=match):
        parse_config(text)


def test_format_round_trip():
    cfg = parse_config('policy = "legacy_mc"\nmacro_radius = 300\nseed = 99\nfading = false\n')
    assert parse_config(format_config(cfg)) == cfg


def kpi_rows(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_run_writes_schema(tmp_path):
    m = RunManifest(ScenarioConfig(n_slots=300), out_dir=tmp_path, replications=2, base_seed=5)
    out = io.StringIO()
    assert run(m, out) == 0
    rows = kpi_rows(tmp_path / "kpi.csv")
    assert tuple(rows[0]) == KPI_COLUMNS
    assert [(r[0], r[1]) for r in rows[1:]] == [(p, s) for p in ("sc", "legacy_mc", "latency_aware_mc")
                                                 for s in ("5", "6")]
    # same seed, same traffic for every policy
    assert len({r[3] for r in rows[1:] if r[1] == "5"}) == 1
    for p in ("sc", "legacy_mc", "latency_aware_mc"):
        assert tuple(kpi_rows(tmp_path / f"ccdf_{p}.csv")[0]) == CCDF_COLUMNS
    assert "latency_aware_mc" in out.getvalue()


def test_golden_output(tmp_path):
    assert main(["--slots", "200", "--seed", "3", "--out", str(tmp_path)], stdout=io.StringIO()) == 0
    for name in ("kpi.csv", "ccdf_sc.csv", "ccdf_legacy_mc.csv", "ccdf_latency_aware_mc.csv"):
        assert (tmp_path / name).read_bytes() == (GOLDEN / name).read_bytes(), name


def test_rerun_is_byte_identical(tmp_path):
    args = ["--slots", "500", "--reps", "2", "--policy", "all"]
    main(args + ["--out", str(tmp_path / "a")], stdout=io.StringIO())
    main(args + ["--out", str(tmp_path / "b")], stdout=io.StringIO())
    for f in (tmp_path / "a").iterdir():
        assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()


def test_rewrites_instead_of_appending(tmp_path):
    for _ in range(2):
        main(["--slots", "100", "--policy", "sc", "--out", str(tmp_path)], stdout=io.StringIO())
    assert len(kpi_rows(tmp_path / "kpi.csv")) == 2


def test_config_file_and_flags(tmp_path):
    cfgfile = tmp_path / "s.cfg"
    cfgfile.write_text('n_users = 2\npolicy = "sc"\n')
    assert main(["--config", str(cfgfile), "--slots", "50", "--fading", "off", "--policy", "sc",
                 "--out", str(tmp_path)], stdout=io.StringIO()) == 0
    row = kpi_rows(tmp_path / "kpi.csv")[1]
    assert row[2] == "50"


def test_bad_config_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("activation_prob = 1.5\n")
    assert main(["--config", str(bad), "--out", str(tmp_path)]) == 2
    assert "activation_prob" in capsys.readouterr().err
    assert main(["--reps", "0", "--out", str(tmp_path)]) == 2
    assert main(["--config", str(tmp_path / "missing.cfg")]) == 2


def test_oracle_mode(tmp_path):
    out = io.StringIO()
    assert main(["--oracle", "--position", "400", "0", "--out", str(tmp_path)], stdout=out) == 0
    rows = kpi_rows(tmp_path / "oracle.csv")
    assert [r[0] for r in rows[1:]] == ["sc", "legacy_mc", "latency_aware_mc"]
    assert "MC-eligible share" in out.getvalue()


def test_parallel_matches_serial(tmp_path):
    args = ["--slots", "300", "--reps", "2"]
    main(args + ["--out", str(tmp_path / "s")], stdout=io.StringIO())
    main(args + ["--jobs", "2", "--out", str(tmp_path / "p")], stdout=io.StringIO())
    assert (tmp_path / "s" / "kpi.csv").read_bytes() == (tmp_path / "p" / "kpi.csv").read_bytes()


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "urllc_mc", "--slots", "50", "--policy", "sc",
                           "--out", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "kpi.csv").exists()
