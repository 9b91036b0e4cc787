import json

import pytest

from fairadapter.cli import ConfigError, RunConfig, load_config, run_cli
from fairadapter.embeddings import read_embedding_set, validate_set
from fairadapter.nn import init_model, write_checkpoint


def make_data(tmp_path, name="data.jsonl", categories=4, real=6, fake=6, dim=8, seed=7):
    path = tmp_path / name
    code = run_cli([
        "synth", "--categories", str(categories), "--real", str(real), "--fake", str(fake),
        "--dim", str(dim), "--noise", "0.1", "--seed", str(seed), "--out", str(path),
    ])
    assert code == 0
    return path


class TestSynth:
    def test_synth_writes_readable_file(self, tmp_path):
        path = tmp_path / "d.jsonl"
        code = run_cli(["synth", "--categories", "4", "--dim", "16", "--seed", "7",
                        "--real", "3", "--fake", "3", "--out", str(path)])
        assert code == 0
        eset = read_embedding_set(path)
        assert eset.dim == 16
        assert len(eset.categories) == 4
        assert validate_set(eset, require_both_labels_per_category=True) == []

    def test_skew_flag(self, tmp_path):
        path = tmp_path / "d.jsonl"
        code = run_cli(["synth", "--categories", "2", "--real", "2", "--fake", "2",
                        "--dim", "4", "--skew", "1.0,0.5", "--out", str(path)])
        assert code == 0
        assert run_cli(["synth", "--categories", "2", "--real", "2", "--fake", "2",
                        "--dim", "4", "--skew", "1.0", "--out", str(path)]) == 1

    def test_unwritable_path(self, tmp_path):
        code = run_cli(["synth", "--real", "1", "--fake", "1",
                        "--out", str(tmp_path / "missing" / "d.jsonl")])
        assert code == 2


class TestConfig:
    def test_defaults(self):
        cfg = load_config(None, {})
        assert cfg.epochs == 40
        assert cfg.learning_rate == 0.0002
        assert cfg.threshold == 0.5

    def test_empty_file_means_defaults(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text("")
        cfg = load_config(str(path), {})
        assert cfg == RunConfig()

    def test_flag_beats_file(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"epochs": 5}))
        assert load_config(str(path), {}).epochs == 5
        assert load_config(str(path), {"epochs": 3}).epochs == 3

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"epcohs": 5}))
        with pytest.raises(ConfigError, match="epcohs"):
            load_config(str(path), {})

    def test_out_of_range_rejected(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"threshold": 1.5}))
        with pytest.raises(ConfigError, match="threshold"):
            load_config(str(path), {})

    def test_config_errors_exit_2(self, tmp_path):
        data = make_data(tmp_path)
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"epcohs": 5}))
        code = run_cli(["train", "--data", str(data), "--out", str(tmp_path / "m.jsonl"),
                        "--config", str(cfg)])
        assert code == 2


class TestTrainEval:
    def test_train_then_eval(self, tmp_path):
        data = make_data(tmp_path)
        model_path = tmp_path / "model.jsonl"
        history_path = tmp_path / "history.jsonl"
        code = run_cli(["train", "--data", str(data), "--out", str(model_path),
                        "--history", str(history_path), "--epochs", "2", "--seed", "1"])
        assert code == 0
        assert model_path.exists() and history_path.exists()
        first = json.loads(history_path.read_text().splitlines()[0])
        assert set(first) == {"round", "l_fair", "l_c", "losses", "lambdas"}

        report_path = tmp_path / "report.json"
        code = run_cli(["eval", "--data", str(data), "--model", str(model_path),
                        "--out", str(report_path),
                        "--table", str(tmp_path / "table.csv"),
                        "--predictions", str(tmp_path / "preds.csv")])
        assert code == 0
        report = json.loads(report_path.read_text())
        assert "f_fpr" in report and "per_category" in report
        assert (tmp_path / "table.csv").exists()
        assert (tmp_path / "preds.csv").exists()

    def test_default_history_path(self, tmp_path):
        data = make_data(tmp_path)
        model_path = tmp_path / "model.jsonl"
        assert run_cli(["train", "--data", str(data), "--out", str(model_path),
                        "--epochs", "1"]) == 0
        assert (tmp_path / "model.jsonl.history").exists()

    def test_eval_dimension_mismatch_exits_1(self, tmp_path, capsys):
        data = make_data(tmp_path, dim=8)
        bad_model = tmp_path / "bad.jsonl"
        write_checkpoint(init_model(5, 2, seed=0), bad_model)
        code = run_cli(["eval", "--data", str(data), "--model", str(bad_model),
                        "--out", str(tmp_path / "r.json")])
        assert code == 1
        assert "dimension" in capsys.readouterr().err

    def test_missing_data_exits_2(self, tmp_path):
        code = run_cli(["train", "--data", str(tmp_path / "nope.jsonl"),
                        "--out", str(tmp_path / "m.jsonl"), "--epochs", "1"])
        assert code == 2

    def test_corrupt_data_exits_1(self, tmp_path):
        bad = tmp_path / "bad.jsonl"
        bad.write_text('{"format":"other","version":1,"dim":2,"encoder":"x"}\n')
        code = run_cli(["train", "--data", str(bad), "--out", str(tmp_path / "m.jsonl"),
                        "--epochs", "1"])
        assert code == 1


class TestUsageErrors:
    def test_unknown_subcommand(self, capsys):
        assert run_cli(["frobnicate"]) == 2
        assert "usage" in capsys.readouterr().err

    def test_unknown_flag(self, capsys):
        assert run_cli(["synth", "--bogus", "1", "--out", "x"]) == 2
        assert "usage" in capsys.readouterr().err

    def test_no_arguments(self):
        assert run_cli([]) == 2


class TestAblate:
    def test_comparison_table(self, tmp_path):
        data = make_data(tmp_path, real=8, fake=8)
        out = tmp_path / "ablation.csv"
        code = run_cli(["ablate", "--data", str(data), "--out", str(out),
                        "--epochs", "1", "--seed", "3", "--test-fraction", "0.25"])
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0].startswith("variant,f_fpr,f_auc")
        variants = [line.split(",")[0] for line in lines[1:]]
        assert variants == ["full", "no-fair-adapter", "no-fair-loss", "no-classify-loss"]


class TestDeterminism:
    def test_train_eval_byte_identical(self, tmp_path):
        data = make_data(tmp_path)
        outputs = []
        for run in ("a", "b"):
            model_path = tmp_path / f"model-{run}.jsonl"
            history_path = tmp_path / f"history-{run}.jsonl"
            report_path = tmp_path / f"report-{run}.json"
            assert run_cli(["train", "--data", str(data), "--out", str(model_path),
                            "--history", str(history_path), "--epochs", "2",
                            "--seed", "11"]) == 0
            assert run_cli(["eval", "--data", str(data), "--model", str(model_path),
                            "--out", str(report_path)]) == 0
            outputs.append((model_path.read_bytes(), history_path.read_bytes(),
                            report_path.read_bytes()))
        assert outputs[0] == outputs[1]
