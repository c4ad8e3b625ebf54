"""CLI contracts: file outputs, schemas, determinism, parallel equivalence."""

import json
from pathlib import Path

import pytest

from repq.cli import derive_job_seed, main

FAST = ["--episodes", "10", "--n-agents", "4", "--encounters-per-episode", "20"]


def read(path: Path) -> str:
    return path.read_text(encoding="utf-8")


class TestRun:
    def test_produces_episode_csv_and_summary(self, tmp_path, capsys):
        out = tmp_path / "out"
        assert main(["run", "--out", str(out), "--rng-seed", "7", *FAST]) == 0
        lines = read(out / "episodes.csv").splitlines()
        assert len(lines) == 11  # header + 10 episodes
        assert lines[0].split(",")[:3] == ["episode", "mean_reward", "coop_level"]
        assert len(lines[0].split(",")) == 3 + 16
        summary = json.loads(read(out / "summary.json"))
        assert summary["episodes"] == 10
        assert "coop_final" in summary

    def test_decentralized_adds_norm_census_columns(self, tmp_path):
        out = tmp_path / "out"
        main(["run", "--out", str(out), "--mode", "decentralized", "--rng-seed", "1", *FAST])
        header = read(out / "episodes.csv").splitlines()[0].split(",")
        assert len(header) == 3 + 32
        assert header[-1] == "norm_census_15"

    def test_rerun_is_byte_identical(self, tmp_path):
        out_a = tmp_path / "a"
        out_b = tmp_path / "b"
        args = ["run", "--rng-seed", "99", "--seed-fraction", "0.25", *FAST]
        main(args + ["--out", str(out_a)])
        main(args + ["--out", str(out_b)])
        assert read(out_a / "episodes.csv") == read(out_b / "episodes.csv")
        assert read(out_a / "summary.json") == read(out_b / "summary.json")

    def test_thin_keeps_every_nth_plus_final(self, tmp_path):
        out = tmp_path / "out"
        main(["run", "--out", str(out), "--thin", "4", "--rng-seed", "3", *FAST])
        rows = read(out / "episodes.csv").splitlines()[1:]
        assert [int(r.split(",")[0]) for r in rows] == [0, 4, 8, 9]

    def test_dump_qtables(self, tmp_path):
        out = tmp_path / "out"
        main(["run", "--out", str(out), "--dump-qtables", "--seed-fraction", "0.5",
              "--rng-seed", "5", *FAST])
        doc = json.loads(read(out / "qtables.json"))
        kinds = [a["kind"] for a in doc["agents"]]
        assert kinds.count("seeded") == 2
        assert kinds.count("learner") == 2
        learner = next(a for a in doc["agents"] if a["kind"] == "learner")
        assert len(learner["q"]) == 4

    def test_config_file_and_flag_precedence(self, tmp_path):
        cfg = tmp_path / "conf.yaml"
        cfg.write_text("episodes: 5\nn_agents: 4\nencounters_per_episode: 20\nrng_seed: 2\n")
        out1 = tmp_path / "o1"
        main(["run", "--config", str(cfg), "--out", str(out1)])
        assert json.loads(read(out1 / "summary.json"))["episodes"] == 5
        out2 = tmp_path / "o2"
        main(["run", "--config", str(cfg), "--episodes", "7", "--out", str(out2)])
        assert json.loads(read(out2 / "summary.json"))["episodes"] == 7

    def test_invalid_value_reports_field_and_exits_2(self, tmp_path, capsys):
        code = main(["run", "--out", str(tmp_path / "x"), "--chi", "0.7", *FAST])
        assert code == 2
        err = capsys.readouterr().err
        assert "chi" in err
        report = json.loads(err)
        assert report["error"] == "invalid configuration"

    def test_unknown_config_field_rejected(self, tmp_path, capsys):
        cfg = tmp_path / "conf.yaml"
        cfg.write_text("episodes: 5\nbogus_field: 1\n")
        code = main(["run", "--config", str(cfg), "--out", str(tmp_path / "x")])
        assert code == 2
        assert "bogus_field" in capsys.readouterr().err

    def test_zero_episodes_flags_no_data(self, tmp_path):
        out = tmp_path / "out"
        main(["run", "--out", str(out), "--episodes", "0", "--rng-seed", "1"])
        summary = json.loads(read(out / "summary.json"))
        assert summary["no_data"] is True
        assert len(read(out / "episodes.csv").splitlines()) == 1


class TestSweep:
    def test_cartesian_row_count(self, tmp_path):
        out = tmp_path / "sweep"
        assert main([
            "sweep", "--out", str(out), "--rng-seed", "11",
            "--sweep-norm", "9,0",
            "--sweep-seed-fraction", "0,0.1,0.2,0.3,0.4,0.5",
            "--runs-per-point", "2", *FAST,
        ]) == 0
        lines = read(out / "sweep.csv").splitlines()
        assert lines[0] == ("b,seed_fraction,alpha,norm,mode,run_index,"
                            "coop_final,dominant_rule,dominant_norm")
        assert len(lines) == 1 + 12 * 2
        assert len(list((out / "points").iterdir())) == 12

    def test_worker_count_does_not_change_bytes(self, tmp_path):
        args = ["sweep", "--rng-seed", "4", "--sweep-b", "2,5",
                "--runs-per-point", "2", *FAST]
        out1 = tmp_path / "w1"
        out2 = tmp_path / "w2"
        main(args + ["--out", str(out1), "--workers", "1"])
        main(args + ["--out", str(out2), "--workers", "2"])
        assert read(out1 / "sweep.csv") == read(out2 / "sweep.csv")
        for p1 in sorted((out1 / "points").rglob("*.csv")):
            p2 = out2 / p1.relative_to(out1)
            assert read(p1) == read(p2)
        for p1 in sorted((out1 / "points").rglob("summary.json")):
            p2 = out2 / p1.relative_to(out1)
            assert read(p1) == read(p2)

    def test_point_summaries_aggregate_runs(self, tmp_path):
        out = tmp_path / "sweep"
        main(["sweep", "--out", str(out), "--rng-seed", "8",
              "--sweep-alpha", "0,0.5", "--runs-per-point", "3", *FAST])
        point_dirs = sorted((out / "points").iterdir())
        assert len(point_dirs) == 2
        doc = json.loads(read(point_dirs[0] / "summary.json"))
        assert doc["n_runs"] == 3
        assert len(doc["coop_final_values"]) == 3
        assert len(doc["pooled_rule_census"]) == 16

    def test_experiment_config_file(self, tmp_path):
        cfg = tmp_path / "exp.yaml"
        out = tmp_path / "sweep"
        cfg.write_text(
            "base:\n"
            "  episodes: 8\n"
            "  n_agents: 4\n"
            "  encounters_per_episode: 20\n"
            "  rng_seed: 3\n"
            "sweep:\n"
            "  b: [2.0, 5.0]\n"
            "runs_per_point: 2\n"
            f"out_dir: {out}\n"
        )
        main(["sweep", "--config", str(cfg)])  # out_dir from the file
        assert len(read(out / "sweep.csv").splitlines()) == 1 + 4

    def test_experiment_file_rejects_unknown_keys(self, tmp_path, capsys):
        cfg = tmp_path / "exp.yaml"
        cfg.write_text("base: {episodes: 5}\nbogus: 1\n")
        assert main(["sweep", "--config", str(cfg)]) == 2
        assert "bogus" in capsys.readouterr().err

    def test_job_seeds_order_independent(self):
        a = derive_job_seed(42, {"b": 5.0, "alpha": 0.2}, 3)
        b = derive_job_seed(42, {"alpha": 0.2, "b": 5.0}, 3)
        assert a == b
        assert a != derive_job_seed(42, {"b": 5.0, "alpha": 0.2}, 4)
        assert a != derive_job_seed(43, {"b": 5.0, "alpha": 0.2}, 3)
        assert 0 <= a < 2**64


class TestStability:
    def test_single_norm_rows(self, tmp_path, capsys):
        out = tmp_path / "stab.csv"
        assert main(["stability", "--norm", "9", "--out", str(out)]) == 0
        lines = read(out).splitlines()
        assert len(lines) == 17
        assert lines[0] == ("norm,resident_rule,resident_payoff,worst_mutant,"
                            "worst_mutant_payoff,stable,strictly_stable,converged,"
                            "resident_good_fraction")
        rule5 = next(l for l in lines[1:] if l.split(",")[1] == "5")
        assert rule5.split(",")[5] == "1"  # stable

    def test_all_norms_rows(self, tmp_path):
        out = tmp_path / "stab.csv"
        main(["stability", "--norm", "all", "--out", str(out)])
        assert len(read(out).splitlines()) == 257

    def test_norm0_reputation_collapse(self, tmp_path):
        out = tmp_path / "stab.csv"
        main(["stability", "--norm", "0", "--chi", "0.001", "--out", str(out)])
        for line in read(out).splitlines()[1:]:
            assert float(line.split(",")[8]) == pytest.approx(0.001, abs=1e-9)

    def test_stdout_when_no_out(self, capsys):
        main(["stability", "--norm", "9"])
        assert len(capsys.readouterr().out.splitlines()) == 17

    def test_bad_norm_rejected(self, capsys):
        assert main(["stability", "--norm", "17"]) == 2


class TestCensus:
    def test_round_trip_through_dump(self, tmp_path):
        out = tmp_path / "run"
        main(["run", "--out", str(out), "--dump-qtables", "--seed-fraction", "0.5",
              "--rng-seed", "6", *FAST])
        census_csv = tmp_path / "census.csv"
        assert main(["census", str(out / "qtables.json"), "--out", str(census_csv)]) == 0
        lines = read(census_csv).splitlines()
        assert lines[0] == "code,rule_count"
        counts = [int(l.split(",")[1]) for l in lines[1:]]
        assert sum(counts) == 2  # two learners

    def test_decentralized_dump_includes_norm_counts(self, tmp_path):
        out = tmp_path / "run"
        main(["run", "--out", str(out), "--dump-qtables", "--mode", "decentralized",
              "--rng-seed", "6", *FAST])
        census_csv = tmp_path / "census.csv"
        main(["census", str(out / "qtables.json"), "--out", str(census_csv)])
        header = read(census_csv).splitlines()[0]
        assert header == "code,rule_count,norm_count"

    def test_no_learners_is_an_error(self, tmp_path, capsys):
        out = tmp_path / "run"
        main(["run", "--out", str(out), "--dump-qtables", "--seed-fraction", "1.0",
              "--rng-seed", "2", *FAST])
        assert main(["census", str(out / "qtables.json")]) == 2
