"""CLI behavior: output schemas, config layering, determinism, error paths."""
import json
import subprocess
import sys

import numpy as np
import pytest

from banditlab.cli import (coerce_value, fmt, main as cli_main, parse_grid,
                           parse_seeds)

SYN = ["--d", "4", "--arms", "3", "--bumps", "1", "--noise-sigma", "0.05"]


def read(path):
    return path.read_text()


def csv_header(path):
    return read(path).splitlines()[0].split(",")


def make_classification_csv(tmp_path, rows=12):
    rng = np.random.default_rng(0)
    lines = []
    for i in range(rows):
        feats = rng.uniform(0.1, 1.0, size=3)
        lines.append(",".join(f"{v:.4f}" for v in feats)
                     + ("," + ("pos" if i % 2 else "neg")))
    p = tmp_path / "cls.csv"
    p.write_text("\n".join(lines) + "\n")
    return p


def make_news_csv(tmp_path, rows=30):
    rng = np.random.default_rng(1)
    lines = []
    for _ in range(rows):
        arm = int(rng.integers(1, 11))
        click = int(rng.integers(0, 2))
        feats = rng.uniform(-1, 1, size=100)
        lines.append(",".join([str(arm), str(click)]
                              + [f"{v:.4f}" for v in feats]))
    p = tmp_path / "news.csv"
    p.write_text("\n".join(lines) + "\n")
    return p


class TestHelpers:
    def test_parse_seeds_forms(self):
        assert parse_seeds("7") == [7]
        assert parse_seeds("1,2,5") == [1, 2, 5]
        assert parse_seeds("0:4") == [0, 1, 2, 3]

    def test_parse_seeds_rejects_bad_input(self):
        from banditlab.cli import CliError
        with pytest.raises(CliError):
            parse_seeds("-3")
        with pytest.raises(CliError):
            parse_seeds("")

    def test_parse_grid(self):
        grid = parse_grid(["rho=0.1,0.5", "flag=true"])
        assert grid == {"rho": [0.1, 0.5], "flag": [True]}

    def test_coerce_value(self):
        assert coerce_value("true") is True
        assert coerce_value("off") is False
        assert coerce_value("none") is None
        assert coerce_value("3") == 3
        assert coerce_value("0.5") == 0.5
        assert coerce_value("text") == "text"

    def test_fmt_round_trips_floats(self):
        for v in (0.1, 1e-9, 123456.789, float(np.float64(1) / 3)):
            assert float(fmt(v)) == v


class TestRun:
    def test_result_schema_and_echo(self, tmp_path):
        out = tmp_path / "o"
        rc = cli_main(["run", "--policy", "lnucb-ta", "--T", "40",
                       "--seeds", "3", "--out", str(out)] + SYN)
        assert rc == 0
        header = csv_header(out / "result.csv")
        assert header == ["round", "cumulative_reward", "mean_reward",
                          "cumulative_regret"]
        assert len(read(out / "result.csv").splitlines()) == 41
        payload = json.loads(read(out / "result.json"))
        assert payload["seed"] == 3
        assert payload["policy"] == "lnucb-ta"
        assert payload["version"]
        assert len(payload["dataset_fingerprint"]) == 64
        assert payload["config_echo"]["T"] == 40
        assert payload["config_echo"]["seeds"] == [3]
        assert payload["summary"]["horizon"] == 40
        assert payload["env"]["kind"] == "synthetic"

    def test_repeat_runs_are_byte_identical(self, tmp_path):
        args = ["run", "--policy", "lnucb-ta", "--T", "30", "--seeds", "0"] + SYN
        a, b = tmp_path / "a", tmp_path / "b"
        assert cli_main(args + ["--out", str(a)]) == 0
        assert cli_main(args + ["--out", str(b)]) == 0
        assert read(a / "result.csv") == read(b / "result.csv")
        pa = json.loads(read(a / "result.json"))
        pb = json.loads(read(b / "result.json"))
        # Wall time and the output path are the only legitimate differences.
        for p in (pa, pb):
            p["summary"].pop("runtime_s")
            p["config_echo"]["options"].pop("out")
        assert pa == pb

    def test_trace_columns(self, tmp_path):
        out = tmp_path / "o"
        rc = cli_main(["run", "--policy", "lnucb-ta", "--T", "15",
                       "--seeds", "0", "--trace", "--out", str(out)] + SYN)
        assert rc == 0
        header = csv_header(out / "result.csv")
        assert header[-5:] == ["linear", "knn", "alpha", "width", "ucb"]
        assert len(header) == 9

    def test_format_csv_only(self, tmp_path):
        out = tmp_path / "o"
        rc = cli_main(["run", "--policy", "random", "--T", "10", "--seeds", "0",
                       "--format", "csv", "--out", str(out)] + SYN)
        assert rc == 0
        assert (out / "result.csv").exists()
        assert not (out / "result.json").exists()

    def test_config_file_with_flag_override(self, tmp_path):
        cfg = tmp_path / "exp.ini"
        cfg.write_text(
            "[experiment]\n"
            "T = 50\nseeds = 5\nd = 4\narms = 3\nbumps = 1\n"
            "noise_sigma = 0.08\n"
            "\n"
            "[policy:linucb]\n"
            "alpha = 0.3\n"
        )
        out = tmp_path / "o"
        rc = cli_main(["run", "--config", str(cfg), "--T", "25",
                       "--out", str(out)])
        assert rc == 0
        payload = json.loads(read(out / "result.json"))
        assert payload["config_echo"]["T"] == 25  # flag beats config
        assert payload["config_echo"]["options"]["noise_sigma"] == 0.08
        assert payload["config_echo"]["policies"] == [
            {"id": "linucb", "params": {"alpha": 0.3}}]
        assert payload["summary"]["horizon"] == 25

    def test_classification_dataset(self, tmp_path):
        data = make_classification_csv(tmp_path)
        out = tmp_path / "o"
        rc = cli_main(["run", "--env", "classification", "--data", str(data),
                       "--policy", "eps-greedy", "--T", "10", "--seeds", "0",
                       "--out", str(out)])
        assert rc == 0
        lines = read(out / "result.csv").splitlines()
        assert len(lines) == 11
        assert "cumulative_regret" in lines[0]
        payload = json.loads(read(out / "result.json"))
        import hashlib
        want = hashlib.sha256(data.read_bytes()).hexdigest()
        assert payload["dataset_fingerprint"] == want
        assert payload["env"]["n_arms"] == 2

    def test_news_replay_dataset(self, tmp_path):
        data = make_news_csv(tmp_path)
        out = tmp_path / "o"
        rc = cli_main(["run", "--env", "news", "--data", str(data),
                       "--policy", "random", "--T", "20", "--seeds", "0",
                       "--out", str(out)])
        assert rc == 0
        lines = read(out / "result.csv").splitlines()
        # Replay has no oracle, so no regret column.
        assert lines[0] == "round,cumulative_reward,mean_reward"
        payload = json.loads(read(out / "result.json"))
        assert payload["summary"]["matched_steps"] <= 20
        assert payload["summary"]["final_regret"] is None


class TestCompare:
    def test_aggregate_rows_in_canonical_order(self, tmp_path):
        out = tmp_path / "o"
        rc = cli_main(["compare", "--policy", "linucb", "--policy",
                       "eps-greedy", "--T", "30", "--seeds", "0:2",
                       "--out", str(out)] + SYN)
        assert rc == 0
        lines = read(out / "aggregate.csv").splitlines()
        assert lines[0].split(",")[:2] == ["policy", "params"]
        assert [l.split(",")[0] for l in lines[1:]] == ["eps-greedy", "linucb"]
        run_files = sorted(p.name for p in (out / "runs").iterdir()
                           if p.suffix == ".csv")
        assert run_files == [
            "eps-greedy__default__s0.csv", "eps-greedy__default__s1.csv",
            "linucb__default__s0.csv", "linucb__default__s1.csv",
        ]

    def test_needs_two_policies_or_seeds(self, tmp_path):
        rc = cli_main(["compare", "--policy", "linucb", "--T", "10",
                       "--seeds", "0", "--out", str(tmp_path / "o")] + SYN)
        assert rc == 2
        assert not (tmp_path / "o").exists()


class TestSweep:
    def test_grid_rows_and_tie_break_to_smaller_params(self, tmp_path):
        out = tmp_path / "o"
        # Capacity never binds at this horizon, so both grid points produce
        # identical runs; the tie must resolve to the smaller params string.
        rc = cli_main(["sweep", "--policy", "knn-ucb",
                       "--param", "theta_max=1",
                       "--grid", "store_capacity=100,200",
                       "--T", "40", "--seeds", "0:2", "--out", str(out)] + SYN)
        assert rc == 0
        sweep_lines = read(out / "sweep.csv").splitlines()
        assert len(sweep_lines) == 3
        params = [l.split(",")[1] for l in sweep_lines[1:]]
        assert params == ['"store_capacity=100', '"store_capacity=200']
        best_lines = read(out / "best.csv").splitlines()
        assert len(best_lines) == 2
        assert best_lines[1].startswith('knn-ucb,"store_capacity=100')
        # Identical behavior means identical finals in both rows; the wall
        # time in the last column is the one legitimate difference.
        a = sweep_lines[1].split('",')[1].split(",")[:-1]
        b = sweep_lines[2].split('",')[1].split(",")[:-1]
        assert a == b

    def test_grid_validation(self, tmp_path):
        rc = cli_main(["sweep", "--policy", "ucb", "--grid", "rho",
                       "--T", "10", "--seeds", "0",
                       "--out", str(tmp_path / "o")] + SYN)
        assert rc == 2
        assert not (tmp_path / "o").exists()


class TestBound:
    def test_curve_rows_and_b_scaling(self, tmp_path):
        out1, out2 = tmp_path / "b1", tmp_path / "b2"
        base = ["bound", "--T", "30", "--d", "2", "--sigma", "0.5"]
        assert cli_main(base + ["--b", "1.0", "--out", str(out1)]) == 0
        assert cli_main(base + ["--b", "2.0", "--out", str(out2)]) == 0
        lines1 = read(out1 / "bound.csv").splitlines()
        lines2 = read(out2 / "bound.csv").splitlines()
        assert lines1[0] == "round,regret_bound"
        assert len(lines1) == 31
        assert lines1[1].split(",")[0] == "1"
        for l1, l2 in zip(lines1[1:], lines2[1:]):
            assert float(l2.split(",")[1]) == 2.0 * float(l1.split(",")[1])

    def test_rejects_bad_delta(self, tmp_path):
        rc = cli_main(["bound", "--delta", "2.0", "--T", "5",
                       "--out", str(tmp_path / "o")])
        assert rc == 2


class TestErrorPaths:
    def test_unknown_policy(self, tmp_path):
        rc = cli_main(["run", "--policy", "nope", "--T", "10", "--seeds", "0",
                       "--out", str(tmp_path / "o")] + SYN)
        assert rc == 2
        assert not (tmp_path / "o").exists()

    def test_classification_requires_data(self, tmp_path):
        rc = cli_main(["run", "--env", "classification", "--policy",
                       "eps-greedy", "--T", "10", "--seeds", "0",
                       "--out", str(tmp_path / "o")])
        assert rc == 2

    def test_missing_dataset_path(self, tmp_path):
        rc = cli_main(["run", "--env", "news", "--data",
                       str(tmp_path / "absent.csv"), "--policy", "random",
                       "--T", "10", "--seeds", "0",
                       "--out", str(tmp_path / "o")])
        assert rc == 2

    def test_run_wants_one_seed(self, tmp_path):
        rc = cli_main(["run", "--policy", "random", "--T", "10",
                       "--seeds", "0:3", "--out", str(tmp_path / "o")] + SYN)
        assert rc == 2

    def test_no_policy_given(self, tmp_path):
        rc = cli_main(["run", "--T", "10", "--seeds", "0",
                       "--out", str(tmp_path / "o")] + SYN)
        assert rc == 2

    def test_bad_policy_param_value(self, tmp_path):
        rc = cli_main(["run", "--policy", "lnucb-ta", "--param", "kappa=3.0",
                       "--T", "10", "--seeds", "0",
                       "--out", str(tmp_path / "o")] + SYN)
        assert rc == 2
        assert not (tmp_path / "o").exists()

    def test_unknown_experiment_option_in_config(self, tmp_path):
        cfg = tmp_path / "bad.ini"
        cfg.write_text("[experiment]\nwarp = 9\n\n[policy:random]\n")
        rc = cli_main(["run", "--config", str(cfg), "--T", "5", "--seeds", "0",
                       "--out", str(tmp_path / "o")] + SYN)
        assert rc == 2


def test_module_entry_point_smoke(tmp_path):
    out = tmp_path / "o"
    proc = subprocess.run(
        [sys.executable, "-m", "banditlab.cli", "bound", "--T", "5",
         "--out", str(out)],
        capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert (out / "bound.csv").exists()
