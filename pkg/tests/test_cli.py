import json

import numpy as np
import pytest

from geodisc import checks, cli
from geodisc.artifacts import read_csv_columns
from geodisc.checks import CheckResult


@pytest.fixture(autouse=True)
def isolated(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("GEODISC_SEED", raising=False)
    return tmp_path


SE2_INIT = "-2,-1.5,0,1,0,0.05,0,0.02,0,0,0.1,-0.05"


class TestSimulate:
    def test_free_single_step_csv(self, capsys):
        rc = cli.main(
            ["simulate", "--problem", "free", "--n", "1", "--init", "0,1,2,3", "--h", "0.1", "--steps", "1"]
        )
        assert rc == 0
        cols = read_csv_columns("free-trajectory.csv")
        assert list(cols) == ["t", "q0", "qdot0", "p0_0", "p1_0", "u0", "H", "clearance"]
        assert [float(v) for v in cols["t"]] == [0.0, 0.1]
        row1 = [float(cols[k][1]) for k in ("q0", "qdot0", "p0_0", "p1_0")]
        assert np.allclose(row1, [0.1145, 1.29, 2.0, 2.8], atol=1e-12)
        assert float(cols["H"][0]) == pytest.approx(6.5)
        assert float(cols["u0"][0]) == pytest.approx(3.0)
        assert cols["clearance"] == ["", ""]
        assert "csv: free-trajectory.csv" in capsys.readouterr().out

    def test_se2_run_with_artifacts(self, capsys):
        rc = cli.main(
            ["simulate", "--init=" + SE2_INIT, "--steps", "40", "--csv-out", "traj.csv", "--svg-out", "traj.svg"]
        )
        assert rc == 0
        lines = open("traj.csv").read().splitlines()
        assert len(lines) == 42
        svg = open("traj.svg").read()
        assert "<polyline" in svg and "<circle" in svg
        out = capsys.readouterr().out
        assert "clearance" in out and "csv: traj.csv" in out

    def test_missing_init_is_config_error(self, capsys):
        rc = cli.main(["simulate"])
        assert rc == 2
        assert capsys.readouterr().err.startswith("error: config-error:")

    def test_nonpositive_h_is_config_error(self, capsys):
        rc = cli.main(["simulate", "--init=" + SE2_INIT, "--h=-0.1"])
        assert rc == 2
        assert "error: config-error:" in capsys.readouterr().err

    def test_csv_output_is_bit_stable(self):
        args = ["simulate", "--problem", "free", "--n", "1", "--init", "0.3,-1,0.7,2", "--h", "0.05", "--steps", "3"]
        assert cli.main(args + ["--csv-out", "one.csv"]) == 0
        assert cli.main(args + ["--csv-out", "two.csv"]) == 0
        assert open("one.csv", "rb").read() == open("two.csv", "rb").read()


class TestConfigFile:
    def test_flags_override_file(self, isolated):
        cfg = {
            "problem": "free",
            "n": 1,
            "h": 0.1,
            "steps": 4,
            "initial_state": [0, 1, 2, 3],
            "csv_out": "a.csv",
        }
        (isolated / "cfg.json").write_text(json.dumps(cfg))
        assert cli.main(["simulate", "--config", "cfg.json", "--steps", "1"]) == 0
        assert len(open("a.csv").read().splitlines()) == 3  # header + 2 states

    def test_invalid_json(self, isolated, capsys):
        (isolated / "bad.json").write_text("{not json")
        assert cli.main(["simulate", "--config", "bad.json"]) == 2
        assert "config-error" in capsys.readouterr().err

    def test_unknown_key(self, isolated, capsys):
        (isolated / "bad.json").write_text('{"stepz": 3}')
        assert cli.main(["simulate", "--config", "bad.json"]) == 2
        assert "stepz" in capsys.readouterr().err

    def test_missing_file(self, capsys):
        assert cli.main(["simulate", "--config", "nope.json"]) == 2

    def test_env_seed_override(self, monkeypatch):
        monkeypatch.setenv("GEODISC_SEED", "77")
        cfg = cli.load_config(cli.build_parser().parse_args(["check"]))
        assert cfg.seed == 77
        monkeypatch.setenv("GEODISC_SEED", "many")
        with pytest.raises(cli.ConfigError):
            cli.load_config(cli.build_parser().parse_args(["check"]))


class TestShoot:
    ARGS = ["shoot", "--problem", "free", "--n", "1", "--q0", "0", "--v0", "0", "--q1", "1", "--v1", "0", "--T", "1", "--h", "0.1"]

    def test_free_boundary_problem(self, capsys):
        rc = cli.main(self.ARGS)
        assert rc == 0
        out = capsys.readouterr().out
        assert "converged    = True" in out
        p0 = float(out.split("p0(0)")[1].split("[")[1].split("]")[0])
        assert abs(p0 - 12.0) / 12.0 < 0.02
        cols = read_csv_columns("free-shoot.csv")
        assert len(cols["t"]) == 11

    def test_zero_tolerance_fails_but_writes_csv(self, capsys):
        rc = cli.main(self.ARGS + ["--tol", "0", "--csv-out", "best.csv"])
        assert rc == 1
        assert "error: non-convergence:" in capsys.readouterr().err
        assert len(read_csv_columns("best.csv")["t"]) == 11


class TestCheck:
    def test_report_schema_and_success(self, capsys):
        rc = cli.main(["check", "--suite", "closed-form", "--suite", "axioms", "--json-out", "report.json"])
        out, err = capsys.readouterr()
        assert rc == 0
        report = json.loads(out)
        assert isinstance(report, list) and report
        for entry in report:
            assert set(entry) == {"suite", "case", "status", "defect", "tolerance"}
            assert entry["status"] in ("pass", "info")
            assert entry["suite"] in ("closed-form", "axioms")
        assert json.load(open("report.json")) == report
        assert "0 failures" in err

    def test_convergence_h_flag(self, capsys):
        rc = cli.main(["check", "--suite", "convergence", "--h", "0.1,0.05"])
        out, _ = capsys.readouterr()
        assert rc == 0
        report = json.loads(out)
        assert len(report) == 1 and "order" in report[0]["case"]

    def test_failing_suite_sets_exit_code(self, monkeypatch, capsys):
        stub = lambda rng: [CheckResult("closed-form", "stub", "fail", 1.0, 0.0)]
        monkeypatch.setitem(checks.SUITES, "closed-form", stub)
        rc = cli.main(["check", "--suite", "closed-form"])
        assert rc == 1
        assert "1 failures" in capsys.readouterr().err

    def test_unknown_suite_is_config_error(self, capsys):
        assert cli.main(["check", "--suite", "bogus"]) == 2

    def test_sphere_lift_check_problem_selects_suite(self, capsys):
        rc = cli.main(["check", "--problem", "sphere-lift-check"])
        out, _ = capsys.readouterr()
        assert rc == 0
        assert {entry["suite"] for entry in json.loads(out)} == {"sphere-lift"}


class TestPlot:
    def make_csv(self):
        rc = cli.main(
            [
                "simulate", "--problem", "obstacle", "--init", "2.5,0,0,0,1,0,0,0,0,0,0,0",
                "--h", "0.05", "--steps", "10", "--csv-out", "o.csv",
            ]
        )
        assert rc == 0

    def test_roundtrip_with_inferred_circle(self, capsys):
        self.make_csv()
        assert cli.main(["plot", "o.csv", "o.svg"]) == 0
        svg = open("o.svg").read()
        assert "<circle" in svg
        points = svg.split('points="')[1].split('"')[0]
        assert len(points.split()) == 11

    def test_missing_column(self, isolated, capsys):
        (isolated / "m.csv").write_text("a,b\n1,2\n")
        assert cli.main(["plot", "m.csv", "m.svg"]) == 2
        assert "missing column" in capsys.readouterr().err

    def test_ragged_rows(self, isolated):
        (isolated / "r.csv").write_text("q0,q1\n1\n")
        assert cli.main(["plot", "r.csv", "r.svg"]) == 2

    def test_nonnumeric_cells(self, isolated):
        (isolated / "x.csv").write_text("q0,q1\nfoo,bar\n")
        assert cli.main(["plot", "x.csv", "x.svg"]) == 2

    def test_missing_file(self):
        assert cli.main(["plot", "absent.csv", "out.svg"]) == 2
