import csv
import json
import subprocess
import sys

import pytest

from gsbq.cli import RunConfig, main, parse_config, run
from gsbq.errors import UsageError

EXACT_BETA = "-2.1666666666666667"


def test_flags_are_echoed():
    cfg = parse_config(["solve", "--beta", "-2.1667", "--c", "0", "--p", "2"])
    assert (cfg.command, cfg.beta, cfg.c, cfg.p) == ("solve", -2.1667, 0.0, 2.0)
    assert (cfg.L, cfg.n, cfg.parity) == (200.0, 4096, "odd")


def test_speed_out_of_range_is_a_usage_error():
    with pytest.raises(UsageError, match="c out of range"):
        parse_config(["--c", "1.5"])


def test_flags_override_file(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"command": "solve", "n": 1024, "p": 3}))
    cfg = parse_config(["--config", str(path), "--n", "2048"])
    assert (cfg.command, cfg.n, cfg.p) == ("solve", 2048, 3.0)
    assert parse_config([], config_file=str(path)).n == 1024


def test_unknown_config_key_is_named(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"command": "solve", "resolutoin": 3}))
    with pytest.raises(UsageError, match="resolutoin"):
        parse_config(["--config", str(path)])


@pytest.mark.parametrize(
    "argv, fragment",
    [
        (["solve", "--n", "1000"], "power of two"),
        (["solve", "--L", "-1"], "L must be positive"),
        (["sweep", "--segment", "ellipse"], "k is required"),
        (["solve", "--unknown-flag", "1"], "unrecognized"),
        (["solve", "--beta", "3"], "beta"),
        ([], "command missing"),
    ],
)
def test_usage_errors(argv, fragment):
    with pytest.raises(UsageError, match=fragment):
        parse_config(argv)


def test_bad_file_values(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"command": "solve", "n": 10.5}))
    with pytest.raises(UsageError, match="'n'"):
        parse_config(["--config", str(path)])
    path.write_text("[1, 2]")
    with pytest.raises(UsageError):
        parse_config(["--config", str(path)])


def test_main_exit_codes(tmp_path, capsys):
    assert main(["--c", "1.5"]) == 2
    assert "c out of range" in capsys.readouterr().err
    # a box too short for the profile is a computation error
    assert main(["solve", "--L", "5", "--n", "64", "--output", str(tmp_path)]) == 1
    assert "beta=-1" in capsys.readouterr().err


def test_solve_writes_profile_and_diagnostics(tmp_path):
    assert main(["solve", "--beta", EXACT_BETA, "--c", "0", "--output", str(tmp_path)]) == 0
    with open(tmp_path / "profile.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["x", "phi"] and len(rows) == 4097
    diag = json.loads((tmp_path / "diagnostics.json").read_text())
    assert diag["ik_gap_rel"] <= 1e-8


def test_output_directory_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("GSBQ_OUTPUT_DIR", str(tmp_path / "env"))
    assert main(["kernel", "--beta", "0", "--c", "0"]) == 0
    rows = list(csv.DictReader(open(tmp_path / "env" / "kernel.csv")))
    assert [float(r["x"]) for r in rows] == [0.0, 1.0, 5.0]
    assert all(float(r["abs_diff"]) <= 1e-8 for r in rows)


def test_atlas_large_p_has_no_stable_rows(tmp_path):
    args = ["atlas", "--p", "12", "--resolution", "8", "--L", "100", "--n", "2048", "--output", str(tmp_path)]
    assert main(args) == 0
    rows = list(csv.DictReader(open(tmp_path / "atlas_points.csv")))
    assert rows and not any(r["classification"] == "Stable" for r in rows)
    assert (tmp_path / "atlas_crossings.csv").read_text().startswith("beta,c")


def test_validate_default_config_passes(tmp_path, capsys):
    assert main(["validate", "--output", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out and out.count("PASS") >= 10


def test_outputs_are_deterministic(tmp_path):
    common = ["--p", "3", "--L", "60", "--n", "1024", "--samples", "4"]
    assert main(["sweep", "--segment", "S2", "--output", str(tmp_path / "a"), *common]) == 0
    assert main(["sweep", "--segment", "S2", "--workers", "2", "--output", str(tmp_path / "b"), *common]) == 0
    assert (tmp_path / "a" / "sweep.csv").read_bytes() == (tmp_path / "b" / "sweep.csv").read_bytes()
    ev = ["evolve", "--beta", "0", "--c", "0.8", "--L", "60", "--n", "512", "--t-final", "0.05",
          "--perturbation", "bandlimited_noise", "--seed", "7"]
    assert main([*ev, "--output", str(tmp_path / "e1")]) == 0
    assert main([*ev, "--output", str(tmp_path / "e2")]) == 0
    for name in ("trajectory.csv", "evolve.json"):
        assert (tmp_path / "e1" / name).read_bytes() == (tmp_path / "e2" / name).read_bytes()


def test_functionals_and_classify(tmp_path, capsys):
    assert main(["functionals", "--beta", "0", "--c", "0.3", "--L", "100", "--n", "2048", "--output", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "functionals.json").read_text())
    assert abs(rep["I"] - rep["K"]) <= 1e-8 * rep["K"]
    capsys.readouterr()
    assert main(["classify", "--beta", "0", "--c", "0.8", "--L", "100", "--n", "2048", "--output", str(tmp_path)]) == 0
    assert capsys.readouterr().out.strip() == "Stable"
    assert json.loads((tmp_path / "classify.json").read_text())["classification"] == "Stable"


def test_run_reports_unwritable_output(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    cfg = RunConfig(command="kernel", output=str(blocker / "sub"))
    assert run(cfg) == 2


def test_module_entry_point(tmp_path):
    res = subprocess.run(
        [sys.executable, "-m", "gsbq", "kernel", "--beta", "-3", "--x", "0,2", "--output", str(tmp_path)],
        capture_output=True,
        text=True,
    )
    assert res.returncode == 0, res.stderr
    assert len((tmp_path / "kernel.csv").read_text().splitlines()) == 3
