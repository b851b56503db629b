import numpy as np

from eqc import load_dense_csv
from eqc.cli import cli_entry


class TestSimulate:
    def test_writes_loadable_dataset(self, tmp_path):
        out = tmp_path / "d.csv"
        code = cli_entry([
            "simulate", "--family", "t3", "--n", "100", "--p", "50",
            "--noise", "0", "--seed", "7", "--out", str(out),
        ])
        assert code == 0
        data = load_dense_csv(out)
        assert data.X.shape == (100, 50)
        assert set(np.unique(data.y)) == {1, 2}

    def test_test_split_written(self, tmp_path):
        out, test = tmp_path / "tr.csv", tmp_path / "te.csv"
        code = cli_entry([
            "simulate", "--family", "lognormal", "--n", "40", "--p", "5",
            "--seed", "1", "--out", str(out), "--test-out", str(test),
            "--n-test", "60",
        ])
        assert code == 0
        assert load_dense_csv(test).n == 60


class TestFitPredict:
    def test_fit_then_predict_deterministic(self, tmp_path):
        train = tmp_path / "train.csv"
        cli_entry([
            "simulate", "--family", "lognormal", "--n", "60", "--p", "6",
            "--seed", "3", "--out", str(train),
        ])
        model = tmp_path / "model.txt"
        code = cli_entry([
            "fit", "--data", str(train), "--classifier", "eqc-ridge",
            "--theta-grid", "0.3,0.5,0.7", "--alpha-grid", "0.1,1.0",
            "--folds", "3", "--seed", "5", "--out", str(model),
        ])
        assert code == 0
        p1, p2 = tmp_path / "p1.csv", tmp_path / "p2.csv"
        assert cli_entry(["predict", "--model", str(model), "--data", str(train),
                          "--out", str(p1)]) == 0
        assert cli_entry(["predict", "--model", str(model), "--data", str(train),
                          "--out", str(p2)]) == 0
        assert p1.read_text() == p2.read_text()
        lines = p1.read_text().strip().splitlines()
        assert lines[0] == "index,prediction,score"
        assert len(lines) == 61

    def test_multiclass_fit_predict(self, tmp_path):
        rng = np.random.Generator(np.random.PCG64(4))
        from eqc import Dataset, save_dense_csv

        X = rng.standard_normal((60, 3))
        y = np.repeat([1, 2, 3], 20)
        X[y == 1, 0] += 2.0
        X[y == 3, 1] -= 2.0
        train = tmp_path / "m.csv"
        save_dense_csv(Dataset(X, y), train)
        model = tmp_path / "model.txt"
        code = cli_entry([
            "fit", "--data", str(train), "--classifier", "eqc-multiclass",
            "--theta-grid", "0.5", "--alpha-grid", "0.1", "--folds", "2",
            "--out", str(model),
        ])
        assert code == 0
        out = tmp_path / "p.csv"
        assert cli_entry(["predict", "--model", str(model), "--data", str(train),
                          "--out", str(out)]) == 0
        assert out.read_text().splitlines()[0] == "index,prediction,max_probability"


class TestUsageErrors:
    def test_unknown_flag_exits_2(self, capsys):
        code = cli_entry(["simulate", "--nope", "x"])
        assert code == 2
        assert "usage" in capsys.readouterr().err.lower()

    def test_missing_subcommand_exits_2(self):
        assert cli_entry([]) == 2

    def test_runtime_error_exits_1(self, tmp_path, capsys):
        code = cli_entry([
            "predict", "--model", str(tmp_path / "missing.txt"),
            "--data", str(tmp_path / "missing.csv"), "--out", str(tmp_path / "o"),
        ])
        assert code == 1
        assert "error" in capsys.readouterr().err.lower()


class TestBenchCommand:
    def test_bench_emits_reports(self, tmp_path):
        cfg = tmp_path / "exp.cfg"
        cfg.write_text(
            "mode = scenario\n"
            "family = t3\n"
            "n_train = 40\n"
            "p = 4\n"
            "classifiers = qc,mc\n"
            "replications = 2\n"
            "test_size = 200\n"
            "theta_grid = 0.3,0.5,0.7\n"
            "alpha_grid = 1.0\n"
            "folds = 2\n"
            "seed = 6\n"
            f"out = {tmp_path / 'results'}\n"
        )
        code = cli_entry(["bench", "--config", str(cfg)])
        assert code == 0
        assert (tmp_path / "results" / "errors_long.csv").exists()
        assert (tmp_path / "results" / "summary.csv").exists()

    def test_selftest_passes(self):
        assert cli_entry(["selftest"]) == 0
