import json

import pytest

import alia
import alia.cli as cli
from alia.errors import ConfigError


def minimal_config(**overrides):
    cfg = {
        "problem": {"kind": "dual_lasso", "lambda": 0.1},
        "data": {"synthetic": {"seed": 1, "m": 20, "n": 5}},
        "solvers": [{"kind": "alia_s2"}],
    }
    cfg.update(overrides)
    return cfg


def write_config(tmp_path, cfg, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def strip_wall_clock(csv_text):
    lines = csv_text.splitlines()
    return [line.rsplit(",", 1)[0] for line in lines]


# ---------------------------------------------------------------------------
# config parsing


def test_parse_config_fills_defaults():
    cfg = cli.parse_config(json.dumps(minimal_config()))
    assert cfg.solvers == [{"kind": "alia_s2", "sigma": 1.0, "gamma0": 1.0, "epsilon": 0.0}]
    assert cfg.stopping == {"tol_two": 1e-4, "tol_inf": 1e-6, "max_iters": 100000}
    assert cfg.verify is False and cfg.seed == 0


def test_parse_config_rejects_bad_tolerance():
    cfg = minimal_config(stopping={"tol_two": -1})
    with pytest.raises(ConfigError, match="config.stopping.tol_two"):
        cli.parse_config(json.dumps(cfg))


def test_parse_config_rejects_unknown_keys_with_path():
    cfg = minimal_config()
    cfg["solvers"][0]["sigm"] = 2.0
    with pytest.raises(ConfigError, match=r"config.solvers\[0\].sigm"):
        cli.parse_config(json.dumps(cfg))
    cfg = minimal_config(extra=1)
    with pytest.raises(ConfigError, match="config.extra"):
        cli.parse_config(json.dumps(cfg))


def test_parse_config_accepts_benchmark_lambda():
    cfg = cli.parse_config(json.dumps(minimal_config()))
    assert cfg.problem["lambda"] == 0.1


def test_parse_config_requires_solvers():
    cfg = minimal_config(solvers=[])
    with pytest.raises(ConfigError, match="solvers"):
        cli.parse_config(json.dumps(cfg))


def test_parse_config_requires_exactly_one_data_source():
    cfg = minimal_config(data={"libsvm": "x", "synthetic": {"seed": 1, "m": 2, "n": 2}})
    with pytest.raises(ConfigError, match="exactly one"):
        cli.parse_config(json.dumps(cfg))


# ---------------------------------------------------------------------------
# run command


def test_run_writes_trace_and_summary(tmp_path):
    path = write_config(tmp_path, minimal_config(solvers=[
        {"kind": "alia_s1"}, {"kind": "alia_s2"}, {"kind": "flip_admm"}, {"kind": "condat_vu"},
    ]))
    rc = cli.main(["run", path, "--out", str(tmp_path)])
    assert rc == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert set(summary) == {"alia_s1", "alia_s2", "flip_admm", "condat_vu"}
    for name, entry in summary.items():
        assert entry["status"] == "converged"
        assert entry["min_gamma"] > 0
        trace = (tmp_path / f"{name}.trace.csv").read_text().splitlines()
        assert trace[0] == cli.TRACE_HEADER
        assert len(trace) - 1 == entry["iterations"]
        assert entry["final_residuals"]["res2_w12"] <= 1e-4


def test_run_matvec_count_is_linear_in_iterations(tmp_path):
    path = write_config(tmp_path, minimal_config(solvers=[{"kind": "alia_s1"}, {"kind": "alia_s2"}]))
    assert cli.main(["run", path, "--out", str(tmp_path)]) == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    for entry in summary.values():
        iters = entry["iterations"]
        assert entry["totals"]["matvec"] == 8 * iters  # 2 applies + 2 adjoints per operator
        assert entry["totals"]["prox"] == 2 * iters
        assert entry["totals"]["grad"] == 2 * iters + 2  # plus the setup evaluations


def test_run_zero_iteration_budget_exits_2(tmp_path):
    cfg = minimal_config(stopping={"max_iters": 0})
    path = write_config(tmp_path, cfg)
    rc = cli.main(["run", path, "--out", str(tmp_path)])
    assert rc == 2
    trace = (tmp_path / "alia_s2.trace.csv").read_text().splitlines()
    assert trace == [cli.TRACE_HEADER]
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["alia_s2"]["status"] == "max_iters"
    assert summary["alia_s2"]["final_residuals"] is None


def test_run_traces_are_deterministic(tmp_path):
    cfg = minimal_config(solvers=[{"kind": "alia_s1"}, {"kind": "alia_s2"}, {"kind": "flip_admm"}])
    a, b = tmp_path / "a", tmp_path / "b"
    path = write_config(tmp_path, cfg)
    assert cli.main(["run", path, "--out", str(a)]) == 0
    assert cli.main(["run", path, "--out", str(b)]) == 0
    for name in ("alia_s1", "alia_s2", "flip_admm"):
        ta = strip_wall_clock((a / f"{name}.trace.csv").read_text())
        tb = strip_wall_clock((b / f"{name}.trace.csv").read_text())
        assert ta == tb


def test_run_verify_fills_slack_columns(tmp_path):
    path = write_config(tmp_path, minimal_config())
    assert cli.main(["run", path, "--out", str(tmp_path), "--verify"]) == 0
    rows = (tmp_path / "alia_s2.trace.csv").read_text().splitlines()[1:]
    header = cli.TRACE_HEADER.split(",")
    for row in rows:
        cells = dict(zip(header, row.split(",")))
        for col in ("slack_x", "slack_y", "slack_u"):
            assert cells[col] != ""
            assert float(cells[col]) >= -1e-10


def test_run_without_verify_leaves_slack_columns_empty(tmp_path):
    path = write_config(tmp_path, minimal_config())
    assert cli.main(["run", path, "--out", str(tmp_path)]) == 0
    row = (tmp_path / "alia_s2.trace.csv").read_text().splitlines()[1]
    cells = dict(zip(cli.TRACE_HEADER.split(","), row.split(",")))
    assert cells["slack_x"] == "" and cells["slack_y"] == "" and cells["slack_u"] == ""


def test_run_jobs_flag_matches_sequential(tmp_path):
    cfg = minimal_config(solvers=[{"kind": "alia_s1"}, {"kind": "alia_s2"}])
    path = write_config(tmp_path, cfg)
    seq, par = tmp_path / "seq", tmp_path / "par"
    assert cli.main(["run", path, "--out", str(seq)]) == 0
    assert cli.main(["run", path, "--out", str(par), "--jobs", "2"]) == 0
    for name in ("alia_s1", "alia_s2"):
        assert strip_wall_clock((seq / f"{name}.trace.csv").read_text()) == strip_wall_clock(
            (par / f"{name}.trace.csv").read_text()
        )


def test_run_missing_data_file_exits_1(tmp_path, capsys):
    cfg = minimal_config(data={"libsvm": str(tmp_path / "nope.txt")})
    path = write_config(tmp_path, cfg)
    assert cli.main(["run", path, "--out", str(tmp_path)]) == 1
    assert "not found" in capsys.readouterr().err


def test_run_bad_config_exits_1(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    assert cli.main(["run", str(path), "--out", str(tmp_path)]) == 1
    assert "error" in capsys.readouterr().err


def test_run_libsvm_data_source(tmp_path):
    data = alia.synth_dataset(2, 10, 3)
    (tmp_path / "data.txt").write_text(alia.format_libsvm(data))
    cfg = minimal_config(data={"libsvm": str(tmp_path / "data.txt")})
    path = write_config(tmp_path, cfg)
    assert cli.main(["run", path, "--out", str(tmp_path)]) == 0


def test_run_custom_file_problem(tmp_path):
    obj = {
        "f1": {"kind": "zero", "dim": 1},
        "f2": {"kind": "quadratic", "Q": [[1.0]]},
        "g1": {"kind": "zero", "dim": 1},
        "g2": {"kind": "zero", "dim": 1},
        "A": {"kind": "dense", "matrix": [[1.0]]},
        "B": {"kind": "dense", "matrix": [[-1.0]]},
        "c": [0.0],
    }
    (tmp_path / "problem.json").write_text(json.dumps(obj))
    cfg = {
        "problem": {"kind": "custom_file", "path": str(tmp_path / "problem.json")},
        "solvers": [{"kind": "alia_s1"}, {"kind": "alia_s2"}],
    }
    path = write_config(tmp_path, cfg)
    assert cli.main(["run", path, "--out", str(tmp_path)]) == 0


def test_run_consensus_problem(tmp_path):
    cfg = {
        "problem": {"kind": "consensus", "n_blocks": 3, "gamma": 0.01, "tau": 0.01},
        "data": {"synthetic": {"seed": 3, "L": 10, "N": 4, "K": 2, "snr_db": 30}},
        "solvers": [{"kind": "alia_s2"}],
        "stopping": {"max_iters": 20000},
    }
    path = write_config(tmp_path, cfg)
    assert cli.main(["run", path, "--out", str(tmp_path)]) == 0


def test_run_duplicate_solver_kinds_get_distinct_names(tmp_path):
    cfg = minimal_config(solvers=[{"kind": "alia_s2"}, {"kind": "alia_s2", "sigma": 2.0}])
    path = write_config(tmp_path, cfg)
    assert cli.main(["run", path, "--out", str(tmp_path)]) == 0
    assert (tmp_path / "alia_s2.trace.csv").exists()
    assert (tmp_path / "alia_s2_2.trace.csv").exists()


# ---------------------------------------------------------------------------
# check and roots commands


def test_check_valid_config(tmp_path, capsys):
    path = write_config(tmp_path, minimal_config())
    assert cli.main(["check", path]) == 0
    assert capsys.readouterr().out.strip() == "ok"


def test_check_invalid_config(tmp_path, capsys):
    path = write_config(tmp_path, minimal_config(stopping={"tol_two": -1}))
    assert cli.main(["check", path]) == 1
    assert "tol_two" in capsys.readouterr().err


def test_roots_command(capsys):
    assert cli.main(["roots", "1", "-6", "11", "-6"]) == 0
    out = capsys.readouterr().out.split()
    assert [float(v) for v in out] == pytest.approx([1.0, 2.0, 3.0], abs=1e-9)


def test_roots_command_no_real_roots(capsys):
    assert cli.main(["roots", "0", "1", "0", "1"]) == 0
    assert capsys.readouterr().out.strip() == ""
