import json

import jsonschema
import numpy as np
import pytest

from fracgm.artifacts import read_columns
from fracgm.cli import SCHEMA_FOR, ExperimentConfig, load_schema, main, parse_config_file
from fracgm.errors import DomainError, InvalidParameterError
from fracgm.solver import local_maxima


def validate_tree(root):
    seen = 0
    for path in sorted(root.rglob("*.json")):
        jsonschema.validate(json.loads(path.read_text()), load_schema(SCHEMA_FOR[path.name]))
        seen += 1
    return seen


def snapshot(root):
    return {p.relative_to(root): p.read_bytes() for p in sorted(root.rglob("*"))
            if p.is_file() and p.name != "metadata.json"}


@pytest.fixture(scope="module")
def solve_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("solve")
    status = main(["solve", "--s", "0.75", "--eps", "0.02", "--m", "1", "-o", str(out), "--plots"])
    return status, out


class TestSolve:
    def test_exit_and_bumps(self, solve_dir):
        status, out = solve_dir
        assert status == 0
        cols = read_columns(out / "profile.csv")
        assert list(cols) == ["x", "u", "v", "W", "u_minus_W"]
        assert len(local_maxima(cols["u"])) == 2
        assert np.all(cols["v"] > 0)

    def test_schemas(self, solve_dir):
        _, out = solve_dir
        assert validate_tree(out) == 2
        sol = json.loads((out / "solution.json").read_text())
        assert sol["newton"]["converged"]
        assert (out / "profile.svg").read_text().startswith("<svg")

    def test_verify_round_trip(self, solve_dir, tmp_path):
        _, out = solve_dir
        status = main(["verify", "--s", "0.75", "--eps", "0.02", "--input", str(out / "profile.csv"),
                       "-o", str(tmp_path)])
        assert status == 0
        rep = json.loads((tmp_path / "verify.json").read_text())
        assert rep["refined_residual_u"] <= 1e-8 and rep["refined_residual_v"] <= 1e-8
        assert rep["n_local_maxima"] == 2
        validate_tree(tmp_path)


class TestGreen:
    def test_log_case_fields(self, tmp_path, capsys):
        assert main(["green", "--s", "0.5", "-o", str(tmp_path)]) == 0
        consts = json.loads((tmp_path / "green_constants.json").read_text())
        assert "a2" in consts and "a0" not in consts and "a1" not in consts
        assert json.loads(capsys.readouterr().out) == consts
        validate_tree(tmp_path)

    def test_power_case_fields(self, tmp_path):
        assert main(["green", "--s", "0.75", "-o", str(tmp_path), "--n-x", "9"]) == 0
        consts = json.loads((tmp_path / "green_constants.json").read_text())
        assert {"a0", "a1", "gamma_far"} <= set(consts) and "a2" not in consts
        cols = read_columns(tmp_path / "green.csv")
        assert list(cols) == ["x", "G", "expansion", "abs_diff"]
        assert cols["x"].size == 9

    def test_deterministic(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for d in (a, b):
            assert main(["green", "--s", "0.75", "-o", str(d), "--n-x", "11", "--plots"]) == 0
        assert snapshot(a) == snapshot(b)


class TestPipeline:
    def test_minimize(self, tmp_path):
        assert main(["minimize", "--s", "0.75", "--eps", "0.02", "-o", str(tmp_path)]) == 0
        rep = json.loads((tmp_path / "minimize.json").read_text())
        assert rep["relative_margin"] >= 0.05
        assert {"alpha", "beta", "gamma"} <= set(rep["constants"])
        assert (tmp_path / "trace.csv").read_text().startswith("start,barrier,value,d1")
        validate_tree(tmp_path)

    def test_minimize_deterministic(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for d in (a, b):
            assert main(["minimize", "--s", "0.75", "--eps", "0.02", "-o", str(d)]) == 0
        assert snapshot(a) == snapshot(b)

    def test_reduce(self, tmp_path):
        assert main(["reduce", "--s", "0.75", "--eps", "0.02", "--positions", "4.3", "-o", str(tmp_path)]) == 0
        rep = json.loads((tmp_path / "reduce.json").read_text())
        assert len(rep["projections"]) == 2 and len(rep["reduced_forces"]) == 1
        assert rep["projections"][0] == pytest.approx(-rep["projections"][1], rel=1e-8)
        assert list(read_columns(tmp_path / "reduce.csv")) == ["x", "W", "V", "S"]
        validate_tree(tmp_path)

    def test_ground_state(self, tmp_path):
        assert main(["ground-state", "--s", "0.6", "--n", "4096", "--L", "100", "-o", str(tmp_path)]) == 0
        rep = json.loads((tmp_path / "ground_state.json").read_text())
        assert rep["residual"] <= 1e-9
        validate_tree(tmp_path)


class TestErrors:
    def test_domain_error(self, tmp_path, capsys):
        assert main(["green", "--s", "0.4", "-o", str(tmp_path)]) == 2
        rec = json.loads(capsys.readouterr().err)
        assert rec["error"] == "domain-error"
        jsonschema.validate(rec, load_schema("error"))

    @pytest.mark.parametrize("argv", [
        ["solve", "--m", "0"],
        ["solve", "--eps", "1.5"],
        ["solve", "--n", "1000"],
        ["solve", "--s", "0.6,0.7"],
        ["reduce"],
        ["verify"],
        ["minimize", "--eps", "abc"],
    ])
    def test_invalid_input(self, argv, tmp_path):
        assert main(argv + ["-o", str(tmp_path)]) == 2

    def test_numerical_failure(self, tmp_path, capsys):
        # a window this narrow holds no interior minimum
        assert main(["minimize", "--s", "0.75", "--eps", "0.02", "--eta", "0.9", "-o", str(tmp_path)]) == 1
        rec = json.loads((tmp_path / "error.json").read_text())
        assert rec["error"] == "no-interior-minimum"
        assert rec["command"] == "minimize"
        validate_tree(tmp_path)

    def test_verify_rejects_foreign_file(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("x,u\n0.0,1.0\n0.5,1.0\n1.0,1.0\n")
        assert main(["verify", "--input", str(bad), "-o", str(tmp_path / "o")]) == 2
        assert main(["verify", "--input", str(tmp_path / "missing.csv"), "-o", str(tmp_path / "m")]) == 2
        rec = json.loads((tmp_path / "m" / "error.json").read_text())
        assert rec["error"] == "invalid-field"


class TestConfig:
    def test_file_and_override(self, tmp_path):
        f = tmp_path / "run.cfg"
        f.write_text("# desk run\ns = 0.5\neps = 0.01, 0.005\nm = 2\nodd = yes\n")
        values = parse_config_file(f)
        assert values == {"s": [0.5], "eps": [0.01, 0.005], "m": 2, "odd": True}
        cfg = ExperimentConfig("sweep", **values)
        assert cfg.k == 5 and cfg.parity == "odd_k"

    def test_cli_overrides_file(self, tmp_path, monkeypatch):
        from fracgm import cli
        f = tmp_path / "run.cfg"
        f.write_text("s = 0.6\nn_x = 5\n")
        seen = {}
        monkeypatch.setattr(cli, "run", lambda cfg: seen.setdefault("cfg", cfg) and 0)
        main(["green", "--config-file", str(f), "--s", "0.8"])
        assert seen["cfg"].s == [0.8] and seen["cfg"].n_x == 5

    def test_unknown_key(self, tmp_path):
        f = tmp_path / "run.cfg"
        f.write_text("grid_size = 3\n")
        with pytest.raises(InvalidParameterError):
            parse_config_file(f)

    def test_validation(self):
        with pytest.raises(DomainError):
            ExperimentConfig("solve", s=[0.4])
        with pytest.raises(InvalidParameterError):
            ExperimentConfig("solve", eps=[])
        # the ground state alone is defined below one half
        assert ExperimentConfig("ground-state", s=[0.3]).s == [0.3]

    def test_auto_grid(self):
        cfg = ExperimentConfig("solve", eps=[0.005], auto_grid=True)
        g = cfg.grid_for(0.005)
        assert g.half_length == 2000.0 and g.spacing <= 0.0625
        assert ExperimentConfig("solve").grid_for(0.005).half_length == 200.0


class TestSweep:
    def test_sweep(self, tmp_path, monkeypatch):
        monkeypatch.setenv("FGM_THREADS", "2")
        status = main(["sweep", "--s", "0.75", "--eps", "0.02", "0.01", "--auto-grid", "-o", str(tmp_path)])
        assert status == 0
        assert (tmp_path / "s0.75_eps0.02" / "profile.csv").exists()
        assert (tmp_path / "s0.75_eps0.01" / "profile.csv").exists()
        summary = read_columns(tmp_path / "summary.csv")
        # sup|u - W| shrinks with eps, so its fitted exponent is positive
        assert summary["sup_u_deviation"][0] > 0
        validate_tree(tmp_path)

    def test_bad_thread_count(self, tmp_path, monkeypatch):
        monkeypatch.setenv("FGM_THREADS", "zero")
        assert main(["sweep", "--eps", "0.02", "-o", str(tmp_path)]) == 2
