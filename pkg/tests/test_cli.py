"""Command-line surface: CSV round trips, determinism, error reporting."""

import json
import subprocess
import sys

import numpy as np
import pytest

from pgbayes import cli
from pgbayes.errors import InputError
from pgbayes.pandemic import EPISODES, pandemic_series


def run_cli(args, cwd):
    return subprocess.run([sys.executable, "-m", "pgbayes.cli"] + args,
                          cwd=cwd, capture_output=True, text=True)


class TestPandemicSeries:
    def test_length_and_count(self):
        # enumeration oracle: years 1800..2020 inclusive; episode ranges
        # 1855-60, 1889-90, 1915-26 (contains 1918-20), 1957-58, 1968-69,
        # 2009-10, 2019-20 -> 6+2+12+2+2+2+2 = 28 indicator years
        data = pandemic_series()
        assert data.t == 221
        assert data.y.sum() == 28

    def test_overlap_deduplicated(self):
        spans = sorted((start, end) for _, start, end in EPISODES)
        total_naive = sum(end - start + 1 for start, end in spans)
        data = pandemic_series()
        assert total_naive == 31          # raw span-years, before overlap
        assert data.y.sum() == 28         # 1918-1920 nested in 1915-1926

    def test_design_is_local_level(self):
        data = pandemic_series()
        assert data.x.shape == (221, 1)
        assert np.all(data.x == 1.0)


class TestReadWrite:
    def test_round_trip(self, tmp_path):
        from pgbayes.model import simulate_dataset
        from pgbayes.rng import RngStream

        data = simulate_dataset("binomial", 30, RngStream(1), d=3, trials=4)
        path = tmp_path / "data.csv"
        cli.write_dataset(path, data)
        loaded, names = cli.read_dataset(path, "binomial")
        assert np.allclose(loaded.x, data.x)
        assert np.array_equal(loaded.y, data.y)
        assert np.array_equal(loaded.trials, data.trials)
        assert names == ["x0", "x1", "intercept"]

    def test_missing_outcome_column(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b\n1,2\n")
        with pytest.raises(InputError, match="'y'"):
            cli.read_dataset(path, "logit")

    def test_malformed_value_reports_row(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("y,x0\n1,0.5\n0,oops\n")
        with pytest.raises(InputError, match="row 1"):
            cli.read_dataset(path, "logit")

    def test_count_exceeding_trials_reports_row(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("y,n,x0\n1,2,0.1\n3,2,0.2\n")
        with pytest.raises(InputError, match="row 1"):
            cli.read_dataset(path, "binomial")

    def test_label_out_of_range_reports_row(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("y,x0\n0,0.1\n1,0.2\n9,0.3\n")
        # m is inferred from max, so force a negative instead
        path.write_text("y,x0\n0,0.1\n-1,0.2\n")
        with pytest.raises(InputError):
            cli.read_dataset(path, "mnl")


class TestCommands:
    def test_fit_emits_two_files(self, tmp_path):
        r = run_cli(["simulate", "--model", "probit", "--n", "30", "--d", "1",
                     "--output", "sim.csv", "--seed", "1"], tmp_path)
        assert r.returncode == 0, r.stderr
        r = run_cli(["fit", "--model", "probit", "--input", "sim.csv",
                     "--draws", "100", "--burnin", "20", "--seed", "2"],
                    tmp_path)
        assert r.returncode == 0, r.stderr
        assert (tmp_path / "draws.csv").exists()
        payload = json.loads((tmp_path / "diag.json").read_text())
        assert payload["seed"] == 2
        assert "intercept" in payload["coefficients"]

    def test_fit_is_byte_deterministic(self, tmp_path):
        run_cli(["simulate", "--model", "logit", "--n", "25", "--d", "2",
                 "--output", "sim.csv", "--seed", "5"], tmp_path)
        for name in ("a.csv", "b.csv"):
            r = run_cli(["fit", "--model", "logit", "--input", "sim.csv",
                         "--draws", "80", "--burnin", "10", "--seed", "6",
                         "--draws-out", name, "--diag-out", f"{name}.json"],
                        tmp_path)
            assert r.returncode == 0, r.stderr
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    def test_bad_input_gives_json_error_and_nonzero_exit(self, tmp_path):
        (tmp_path / "bad.csv").write_text("y,x0\n1,0.5\n2,0.2\n")
        r = run_cli(["fit", "--model", "logit", "--input", "bad.csv"], tmp_path)
        assert r.returncode == 1
        err = json.loads(r.stderr)
        assert err["error"] == "InputError"

    def test_benchmark_summarize(self, tmp_path):
        r = run_cli(["benchmark", "--model", "logit", "--samplers", "upg,amh",
                     "--grid", "intercept", "--values", "0", "--n", "120",
                     "-R", "2", "--draws", "150", "--burnin", "30",
                     "--summarize", "--output", "bench.csv"], tmp_path)
        assert r.returncode == 0, r.stderr
        lines = (tmp_path / "bench.csv").read_text().strip().splitlines()
        assert lines[0].startswith("model,sampler,grid,value,median_if")
        assert len(lines) == 3

    def test_mnl_fit_round_trip(self, tmp_path):
        run_cli(["simulate", "--model", "mnl", "--n", "60", "--d", "2",
                 "--m", "2", "--output", "sim.csv", "--seed", "7"], tmp_path)
        r = run_cli(["fit", "--model", "mnl", "--input", "sim.csv",
                     "--draws", "100", "--burnin", "20", "--seed", "8"],
                    tmp_path)
        assert r.returncode == 0, r.stderr
        header = (tmp_path / "draws.csv").read_text().splitlines()[0]
        assert header.split(",")[:2] == ["cat1_x0", "cat1_intercept"]
        assert "gamma1" in header and "delta2" in header

    def test_prior_override_via_config(self, tmp_path):
        (tmp_path / "prior.json").write_text('{"prior": {"a0": 4.0, "g0": 9.0}}')
        run_cli(["simulate", "--model", "logit", "--n", "20", "--d", "1",
                 "--output", "sim.csv", "--seed", "9"], tmp_path)
        r = run_cli(["fit", "--model", "logit", "--input", "sim.csv",
                     "--draws", "60", "--burnin", "10", "--config", "prior.json"],
                    tmp_path)
        assert r.returncode == 0, r.stderr
        payload = json.loads((tmp_path / "diag.json").read_text())
        assert payload["prior"]["a0"] == 4.0
        assert payload["prior"]["g0"] == 9.0
