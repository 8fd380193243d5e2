import json

import numpy as np
import pytest

from mmpad.cli import main
from mmpad.io import read_csv, read_scores, write_csv, write_scores
from mmpad.synth import SynthConfig, generate


def run(argv, capsys=None):
    code = main([str(a) for a in argv])
    if capsys is None:
        return code
    captured = capsys.readouterr()
    return code, captured


def make_dataset(path, seed=0, n=400, d=2, sigma=0.3):
    code = main([
        "synth", "--n", str(n), "--d", str(d), "--k-dims", "1",
        "--period", "40", "--anomaly-start", str(n // 2), "--anomaly-len", "30",
        "--noise", str(sigma), "--seed", str(seed), "--out", str(path),
    ])
    assert code == 0
    return path


class TestSynthCommand:
    def test_writes_labeled_csv(self, tmp_path):
        out = make_dataset(tmp_path / "s.csv")
        ts = read_csv(out)
        assert ts.d == 2
        assert ts.labels is not None and ts.labels.sum() == 30

    def test_same_seed_byte_identical(self, tmp_path):
        a = make_dataset(tmp_path / "a.csv", seed=7)
        b = make_dataset(tmp_path / "b.csv", seed=7)
        assert a.read_bytes() == b.read_bytes()

    def test_too_many_anomalous_channels_is_usage_error(self, tmp_path, capsys):
        code = main([
            "synth", "--n", "100", "--d", "8", "--k-dims", "9",
            "--anomaly-start", "10", "--anomaly-len", "5",
            "--out", str(tmp_path / "x.csv"),
        ])
        assert code == 2

    def test_bad_flag_value_exits_2(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            main(["synth", "--n", "zero", "--out", str(tmp_path / "x.csv")])
        assert exc.value.code == 2


class TestScoreCommand:
    def test_scores_written_with_diagnostics(self, tmp_path, capsys):
        data = make_dataset(tmp_path / "a.csv")
        out = tmp_path / "a.scores.csv"
        code, captured = run(
            ["score", "--input", data, "--output", out, "--window", "40",
             "--k", "5", "--threads", "1"],
            capsys,
        )
        assert code == 0
        assert "window=40" in captured.err
        assert "ell_ex=20" in captured.err
        scores = read_scores(out)
        assert scores.shape == (400,)

    def test_default_output_is_input_derived(self, tmp_path, capsys):
        data = make_dataset(tmp_path / "b.csv")
        code = main(["score", "--input", str(data), "--window", "40", "--threads", "1"])
        assert code == 0
        assert (tmp_path / "b.scores.csv").exists()

    def test_series_too_short_is_data_error(self, tmp_path, capsys):
        tiny = tmp_path / "tiny.csv"
        tiny.write_text("v\n1\n2\n3\n")
        code, captured = run(["score", "--input", tiny, "--window", "3"], capsys)
        assert code == 1
        assert "too short" in captured.err

    def test_unknown_flag_exits_2(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            main(["score", "--input", "x.csv", "--window", "2"])
        assert exc.value.code == 2

    def test_missing_input_file_is_data_error(self, tmp_path, capsys):
        code, captured = run(["score", "--input", tmp_path / "nope.csv"], capsys)
        assert code == 1


class TestEvalCommand:
    def test_perfect_scores_all_ones(self, tmp_path, capsys):
        # at eval-window 0 the ramps vanish, so scores equal to the labels
        # are exactly perfect for all four metrics
        data = make_dataset(tmp_path / "a.csv")
        ts = read_csv(data)
        scores_path = tmp_path / "scores.csv"
        write_scores(ts.labels.astype(float), scores_path)
        code, captured = run(
            ["eval", "--input", data, "--scores", scores_path, "--eval-window", "0"],
            capsys,
        )
        assert code == 0
        report = dict(
            line.split() for line in captured.out.strip().splitlines()
        )
        for name in ("auc-pr", "auc-roc", "vus-pr", "vus-roc"):
            assert float(report[name]) == 1.0

    def test_vus_pr_at_zero_window_equals_auc_pr(self, tmp_path, capsys):
        data = make_dataset(tmp_path / "a.csv", seed=3)
        scores_path = tmp_path / "scores.csv"
        rng = np.random.default_rng(0)
        write_scores(rng.random(400), scores_path)
        code, captured = run(
            ["eval", "--input", data, "--scores", scores_path, "--eval-window", "0"],
            capsys,
        )
        assert code == 0
        report = dict(line.split() for line in captured.out.strip().splitlines())
        assert report["vus-pr"] == report["auc-pr"]

    def test_length_mismatch_names_both(self, tmp_path, capsys):
        data = make_dataset(tmp_path / "a.csv")
        scores_path = tmp_path / "scores.csv"
        write_scores(np.zeros(17), scores_path)
        code, captured = run(["eval", "--input", data, "--scores", scores_path], capsys)
        assert code == 1
        assert "17" in captured.err and "400" in captured.err

    def test_missing_label_column(self, tmp_path, capsys):
        unlabeled = tmp_path / "u.csv"
        ts = generate(SynthConfig(n=50, d=1, k_anom=1, anomaly_start=10, anomaly_len=5, seed=1))
        write_csv(type(ts)(ts.values, ts.channel_names, None), unlabeled)
        scores_path = tmp_path / "scores.csv"
        write_scores(np.zeros(50), scores_path)
        code, captured = run(["eval", "--input", unlabeled, "--scores", scores_path], capsys)
        assert code == 1
        assert "Label" in captured.err

    def test_json_output(self, tmp_path, capsys):
        data = make_dataset(tmp_path / "a.csv")
        ts = read_csv(data)
        scores_path = tmp_path / "scores.csv"
        write_scores(ts.labels.astype(float), scores_path)
        out = tmp_path / "report.json"
        code = main([
            "eval", "--input", str(data), "--scores", str(scores_path),
            "--eval-window", "2", "--metrics", "auc-roc", "--output", str(out),
        ])
        assert code == 0
        data = json.loads(out.read_text())
        assert data["metrics"]["auc-roc"] == 1.0
        assert data["eval_window"] == 2

    def test_unknown_metric_exits_2(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            main(["eval", "--input", "a", "--scores", "b", "--metrics", "f1"])
        assert exc.value.code == 2


class TestBenchCommand:
    def make_bench_dir(self, tmp_path, count=3):
        data_dir = tmp_path / "data"
        data_dir.mkdir()
        for i in range(count):
            make_dataset(data_dir / f"ds{i}.csv", seed=i, n=300)
        return data_dir

    def test_report_shape(self, tmp_path, capsys):
        data_dir = self.make_bench_dir(tmp_path)
        config = tmp_path / "configs.txt"
        config.write_text(
            "knn1 window=40 k=1 dim=1\n"
            "knn2 window=40 k=2 dim=0.5\n"
        )
        report_path = tmp_path / "report.json"
        code, captured = run(
            ["bench", "--data-dir", data_dir, "--config", config,
             "--report", report_path, "--threads", "1"],
            capsys,
        )
        assert code == 0
        report = json.loads(report_path.read_text())
        assert report["datasets"] == ["ds0.csv", "ds1.csv", "ds2.csv"]
        cells = [
            report["per_dataset"][ds][m]
            for ds in report["datasets"]
            for m in ("knn1", "knn2")
        ]
        assert len(cells) == 6
        assert all("vus-pr" in cell for cell in cells)
        assert len(report["summary"]) == 2

    def test_single_config_rank_one(self, tmp_path):
        data_dir = self.make_bench_dir(tmp_path, count=2)
        config = tmp_path / "configs.txt"
        config.write_text("only window=40 k=1 dim=1\n")
        report_path = tmp_path / "report.json"
        assert main([
            "bench", "--data-dir", str(data_dir), "--config", str(config),
            "--report", str(report_path), "--threads", "1",
        ]) == 0
        report = json.loads(report_path.read_text())
        assert report["summary"][0]["mean_rank"] == 1.0

    def test_dominating_external_method(self, tmp_path):
        data_dir = self.make_bench_dir(tmp_path, count=2)
        external = tmp_path / "external" / "perfect"
        external.mkdir(parents=True)
        for ds in ("ds0.csv", "ds1.csv"):
            ts = read_csv(data_dir / ds)
            # proximity-to-anomaly scores order every ramped label vector
            # perfectly, so they dominate at every buffer width
            marked = np.flatnonzero(ts.labels)
            distance = np.abs(np.arange(ts.n)[:, None] - marked[None, :]).min(axis=1)
            write_scores(-distance.astype(float), external / ds)
        config = tmp_path / "configs.txt"
        config.write_text("mine window=40 k=1 dim=1\n")
        report_path = tmp_path / "report.json"
        assert main([
            "bench", "--data-dir", str(data_dir), "--config", str(config),
            "--report", str(report_path), "--external-scores",
            str(tmp_path / "external"), "--threads", "1",
        ]) == 0
        report = json.loads(report_path.read_text())
        ranks = {row["method"]: row["mean_rank"] for row in report["summary"]}
        assert ranks["perfect"] == 1.0
        assert ranks["mine"] == 2.0

    def test_empty_directory_exits_1(self, tmp_path, capsys):
        empty = tmp_path / "empty"
        empty.mkdir()
        config = tmp_path / "configs.txt"
        config.write_text("only window=40 k=1 dim=1\n")
        code, captured = run(
            ["bench", "--data-dir", empty, "--config", config,
             "--report", tmp_path / "r.json"],
            capsys,
        )
        assert code == 1

    def test_presorting_beats_all_dimension_mean_over_seeds(self, tmp_path, capsys):
        # K-of-N data, one anomalous channel of eight: the dimension-1
        # pre-sorted score must out-rank the all-dimension mean on VUS-PR
        # for a clear majority of seeds.
        wins = 0
        seeds = 20
        for seed in range(seeds):
            data = tmp_path / f"kofn{seed}.csv"
            assert main([
                "synth", "--n", "1200", "--d", "8", "--k-dims", "1",
                "--period", "30", "--anomaly-start", "600", "--anomaly-len", "50",
                "--noise", "0.6", "--seed", str(seed), "--out", str(data),
            ]) == 0
            values = {}
            for name, dim in (("sorted", "1"), ("naive", "8")):
                scores = tmp_path / f"{name}{seed}.csv"
                assert main([
                    "score", "--input", str(data), "--output", str(scores),
                    "--window", "18", "--k", "1", "--dim", dim, "--threads", "1",
                ]) == 0
                assert main([
                    "eval", "--input", str(data), "--scores", str(scores),
                    "--eval-window", "18", "--metrics", "vus-pr",
                ]) == 0
                out = capsys.readouterr().out
                values[name] = float(out.strip().splitlines()[0].split()[1])
            wins += values["sorted"] > values["naive"]
        assert wins >= 16, f"pre-sorting won only {wins}/{seeds} seeds"

    def test_failures_recorded_not_fatal(self, tmp_path):
        data_dir = self.make_bench_dir(tmp_path, count=1)
        tiny = data_dir / "aa_tiny.csv"
        tiny.write_text("v,Label\n1,0\n2,0\n3,1\n")
        config = tmp_path / "configs.txt"
        config.write_text("only window=40 k=1 dim=1\n")
        report_path = tmp_path / "report.json"
        assert main([
            "bench", "--data-dir", str(data_dir), "--config", str(config),
            "--report", str(report_path), "--threads", "1",
        ]) == 0
        report = json.loads(report_path.read_text())
        assert "aa_tiny.csv" in report["failures"]
        assert report["ranked_datasets"] == ["ds0.csv"]
