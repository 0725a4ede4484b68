import json
from pathlib import Path

import numpy as np
import pytest

from helpgraph.cli import main
from helpgraph.cli.config import ConfigError, KEYS, parse_config, train_settings
from helpgraph.graph import BipartiteGraph
from helpgraph.io import (DataFormatError, IdMap, read_edge_list, read_labels, read_matrix_csv,
                          write_edge_list, write_matrix_csv)

TINY = """\
# small enough for a few seconds per command
n_users = 100
n_domains = 80
n_labeled = 40
epochs = 2
steps_per_epoch = 3
batch_size = 16
pair_batch_size = 32
repetitions = 2
"""


def _write(path: Path, text: str) -> Path:
    path.write_text(text, encoding="utf-8")
    return path


@pytest.fixture(scope="module")
def tiny(tmp_path_factory):
    root = tmp_path_factory.mktemp("tiny")
    cfg = _write(root / "run.cfg", TINY)
    data = root / "data"
    data.mkdir()
    assert main(["generate", "--config", str(cfg), "--out", str(data)]) == 0
    return cfg, data


def _train(tmp_path, cfg, data, extra="", name="out"):
    out = tmp_path / name
    out.mkdir()
    c = _write(tmp_path / f"{name}.cfg", cfg.read_text() + extra)
    code = main(["train", "--config", str(c), "--data", str(data), "--out", str(out)])
    return code, out


class TestReaders:
    def test_edge_list_round_trip(self, tmp_path):
        g = BipartiteGraph.from_edges(2, 3, [(0, 1, 2.0), (1, 2, 0.5)])
        write_edge_list(tmp_path / "e.tsv", g, ["u0", "u1"], ["d0", "d1", "d2"])
        back, users, domains = read_edge_list(tmp_path / "e.tsv")
        assert [(users.ids[u], domains.ids[d], w) for u, d, w in back.edges()] == [("u0", "d1", 2.0), ("u1", "d2", 0.5)]

    @pytest.mark.parametrize("text,line,fragment", [
        ("a\tb\t1\na\tb\t2\n", 2, "duplicate"),
        ("a\tb\n", 1, "3 tab-separated"),
        ("# comment\na\tb\tx\n", 2, "not a number"),
        ("a\tb\t-1\n", 1, ">= 0"),
    ])
    def test_edge_list_errors_carry_line(self, tmp_path, text, line, fragment):
        p = _write(tmp_path / "bad.tsv", text)
        with pytest.raises(DataFormatError, match=fragment) as info:
            read_edge_list(p)
        assert info.value.line == line
        assert f"bad.tsv:{line}" in str(info.value)

    def test_strict_ids(self, tmp_path):
        p = _write(tmp_path / "e.tsv", "u0\td9\t1\n")
        with pytest.raises(DataFormatError, match="unknown domain"):
            read_edge_list(p, IdMap(["u0"]), IdMap(["d0"]), strict_ids=True)

    def test_matrix_round_trip_is_lossless(self, tmp_path):
        x = np.random.default_rng(0).standard_normal((4, 3)) * 1e-7
        write_matrix_csv(tmp_path / "m.csv", ["a", "b", "c", "d"], x)
        ids, back = read_matrix_csv(tmp_path / "m.csv")
        assert ids == ["a", "b", "c", "d"] and back.tobytes() == x.tobytes()

    def test_matrix_errors(self, tmp_path):
        with pytest.raises(DataFormatError, match="header"):
            read_matrix_csv(_write(tmp_path / "m.csv", "x,f0\na,1\n"))
        with pytest.raises(DataFormatError, match="columns") as info:
            read_matrix_csv(_write(tmp_path / "m.csv", "id,f0\na,1\nb,1,2\n"))
        assert info.value.line == 3

    def test_labels_need_known_domains(self, tmp_path):
        p = _write(tmp_path / "l.tsv", "d0\t1\ttrain\nd5\t0\ttest\n")
        with pytest.raises(DataFormatError, match="unknown domain"):
            read_labels(p, IdMap(["d0", "d1"]))
        idx, ys, train = read_labels(_write(tmp_path / "l2.tsv", "d1\t0\n"), IdMap(["d0", "d1"]))
        assert idx.tolist() == [1] and ys.tolist() == [0.0] and train.tolist() == [True]


class TestConfig:
    def test_empty_text_gives_defaults(self):
        assert parse_config("") == {k: v.default for k, v in KEYS.items()}

    def test_values_are_typed(self):
        v = parse_config("epochs = 3\nlambda = 0.5\nmodel = mlp\nheldout_window = yes\n")
        assert (v["epochs"], v["lambda"], v["model"], v["heldout_window"]) == (3, 0.5, "mlp", True)

    def test_inline_comments_and_help_output_parse(self):
        from helpgraph.cli.config import describe_keys
        assert parse_config("epochs = 4  # short run\n")["epochs"] == 4
        assert parse_config(describe_keys()) == parse_config("")

    @pytest.mark.parametrize("text,fragment", [("epoch = 3", "unknown key"), ("epochs 3", "key = value"),
                                               ("epochs = three", "cannot parse"),
                                               ("heldout_window = maybe", "cannot parse")])
    def test_parse_errors(self, text, fragment):
        with pytest.raises(ConfigError, match=fragment):
            parse_config(text)

    @pytest.mark.parametrize("text", ["model = svm", "margin = 0", "unsupervised_loss = hinge"])
    def test_semantic_errors(self, text):
        with pytest.raises(ConfigError):
            train_settings(parse_config(text))


class TestGenerate:
    def test_default_config_writes_four_files_and_manifest(self, tmp_path):
        assert main(["generate", "--out", str(tmp_path)]) == 0
        names = sorted(p.name for p in tmp_path.iterdir())
        assert names == sorted(["edges.tsv", "domain_features.csv", "user_features.csv", "labels.tsv",
                                "manifest.json"])
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert manifest["counts"]["users"] == 5000 and manifest["config"]["seed"] == 0

    def test_rerun_is_byte_identical(self, tiny, tmp_path):
        cfg, data = tiny
        assert main(["generate", "--config", str(cfg), "--out", str(tmp_path)]) == 0
        for name in ("edges.tsv", "domain_features.csv", "user_features.csv", "labels.tsv"):
            assert (tmp_path / name).read_bytes() == (data / name).read_bytes()

    def test_seed_flag_overrides_config(self, tiny, tmp_path):
        cfg, data = tiny
        assert main(["generate", "--config", str(cfg), "--seed", "7", "--out", str(tmp_path)]) == 0
        assert json.loads((tmp_path / "manifest.json").read_text())["seed"] == 7
        assert (tmp_path / "edges.tsv").read_bytes() != (data / "edges.tsv").read_bytes()

    def test_missing_output_directory_is_io_error(self, tmp_path, capsys):
        assert main(["generate", "--out", str(tmp_path / "nope")]) == 2
        assert "does not exist" in capsys.readouterr().err

    def test_bad_config_is_invalid_input(self, tmp_path):
        cfg = _write(tmp_path / "c.cfg", "class_prevalence = 1.5\n")
        assert main(["generate", "--config", str(cfg), "--out", str(tmp_path)]) == 1

    def test_heldout_window_files(self, tmp_path):
        cfg = _write(tmp_path / "c.cfg", TINY + "heldout_window = true\n")
        assert main(["generate", "--config", str(cfg), "--out", str(tmp_path)]) == 0
        assert (tmp_path / "heldout_edges.tsv").is_file() and (tmp_path / "domain_classes.tsv").is_file()


class TestCompress:
    def test_hand_example(self, tmp_path):
        edges = _write(tmp_path / "e.tsv", "u0\tA\t3\nu0\tB\t5\nu1\tA\t2\nu1\tB\t1\n")
        assert main(["compress", "--edges", str(edges), "--out", str(tmp_path)]) == 0
        assert (tmp_path / "domain_graph.tsv").read_text() == "A\tB\t4\n"
        assert (tmp_path / "domain_ids.tsv").read_text() == "A\t0\nB\t1\n"

    def test_empty_input_gives_empty_graph(self, tmp_path):
        edges = _write(tmp_path / "e.tsv", "")
        assert main(["compress", "--edges", str(edges), "--out", str(tmp_path)]) == 0
        assert (tmp_path / "domain_graph.tsv").read_text() == ""

    def test_duplicate_edge_names_line(self, tmp_path, capsys):
        edges = _write(tmp_path / "e.tsv", "u0\tA\t3\nu1\tA\t1\nu0\tA\t2\n")
        assert main(["compress", "--edges", str(edges), "--out", str(tmp_path)]) == 1
        assert "e.tsv:3" in capsys.readouterr().err

    def test_missing_input_is_io_error(self, tmp_path):
        assert main(["compress", "--edges", str(tmp_path / "none.tsv"), "--out", str(tmp_path)]) == 2


class TestTrainAndEvaluate:
    def test_train_writes_report_and_checkpoint(self, tiny, tmp_path):
        cfg, data = tiny
        code, out = _train(tmp_path, cfg, data)
        assert code == 0
        report = json.loads((out / "report.json").read_text())
        assert report["runs"] == 2 and len(report["per_run"]) == 2
        assert (out / "run_0.json").is_file() and (out / "run_1.json").is_file()
        ck = json.loads((out / "checkpoint.json").read_text())
        assert ck["model_kind"] == "help"

    def test_single_repetition_has_zero_sd(self, tiny, tmp_path):
        cfg, data = tiny
        code, out = _train(tmp_path, cfg, data, "repetitions = 1\n")
        report = json.loads((out / "report.json").read_text())
        assert code == 0 and report["auprc_sd"] == 0.0 and report["auroc_sd"] == 0.0

    def test_label_propagation_has_no_checkpoint(self, tiny, tmp_path):
        cfg, data = tiny
        code, out = _train(tmp_path, cfg, data, "model = lp\n")
        assert code == 0 and not (out / "checkpoint.json").exists()
        assert json.loads((out / "report.json").read_text())["runs"] == 1

    def test_help_without_pair_term_matches_mlp(self, tiny, tmp_path):
        cfg, data = tiny
        _, a = _train(tmp_path, cfg, data, "model = mlp\n", "mlp")
        _, b = _train(tmp_path, cfg, data, "lambda = 0\n", "help")
        ra, rb = (json.loads((p / "report.json").read_text()) for p in (a, b))
        assert ra["per_run"] == rb["per_run"]

    def test_inconsistent_data_is_invalid(self, tiny, tmp_path):
        cfg, data = tiny
        bad = tmp_path / "bad"
        bad.mkdir()
        for p in data.iterdir():
            (bad / p.name).write_bytes(p.read_bytes())
        with open(bad / "edges.tsv", "a", encoding="utf-8") as fh:
            fh.write("ghost_user\td0\t1\n")
        code, _ = _train(tmp_path, cfg, bad)
        assert code == 1

    def test_manifest_count_mismatch_is_invalid(self, tiny, tmp_path):
        cfg, data = tiny
        bad = tmp_path / "bad"
        bad.mkdir()
        for p in data.iterdir():
            (bad / p.name).write_bytes(p.read_bytes())
        doc = json.loads((bad / "manifest.json").read_text())
        doc["counts"]["users"] += 1
        (bad / "manifest.json").write_text(json.dumps(doc))
        code, _ = _train(tmp_path, cfg, bad)
        assert code == 1

    def test_missing_data_file_is_io_error(self, tiny, tmp_path):
        cfg, _ = tiny
        code, _ = _train(tmp_path, cfg, tmp_path)
        assert code == 2

    def test_evaluate_reproduces_training_metrics(self, tiny, tmp_path):
        cfg, data = tiny
        _, out = _train(tmp_path, cfg, data)
        ev = tmp_path / "ev"
        ev.mkdir()
        assert main(["evaluate", "--checkpoint", str(out / "checkpoint.json"), "--data", str(data),
                     "--out", str(ev)]) == 0
        meta = json.loads((out / "checkpoint.json").read_text())["payload"]["meta"]
        got = json.loads((ev / "evaluation.json").read_text())
        assert got["auprc_mean"] == meta["auprc"] and got["auroc_mean"] == meta["auroc"]
        assert len((ev / "predictions.csv").read_text().splitlines()) == 81
        assert set(json.loads((ev / "pr_curve.json").read_text())) == {"threshold", "precision", "recall"}


class TestExportAndStudy:
    def test_export_user_embeddings(self, tiny, tmp_path):
        cfg, data = tiny
        _, out = _train(tmp_path, cfg, data, "repetitions = 1\n")
        assert main(["export-embeddings", "--checkpoint", str(out / "checkpoint.json"),
                     "--features", str(data / "user_features.csv"), "--out", str(tmp_path)]) == 0
        lines = (tmp_path / "embeddings_user.csv").read_text().splitlines()
        assert len(lines) == 101
        assert all(len(line.split(",")) == 33 for line in lines)
        assert lines[0].split(",")[:2] == ["id", "e0"]

    def test_export_rejects_baseline_checkpoint(self, tiny, tmp_path, capsys):
        cfg, data = tiny
        _, out = _train(tmp_path, cfg, data, "model = mlp\nrepetitions = 1\n")
        assert main(["export-embeddings", "--checkpoint", str(out / "checkpoint.json"),
                     "--features", str(data / "user_features.csv"), "--out", str(tmp_path)]) == 1
        assert "'mlp'" in capsys.readouterr().err

    def test_export_rejects_wrong_width(self, tiny, tmp_path):
        cfg, data = tiny
        _, out = _train(tmp_path, cfg, data, "repetitions = 1\n")
        assert main(["export-embeddings", "--checkpoint", str(out / "checkpoint.json"),
                     "--features", str(data / "domain_features.csv"), "--out", str(tmp_path)]) == 1

    def test_separation_study_from_labels(self, tmp_path):
        rng = np.random.default_rng(0)
        y = (rng.random(60) < 0.3).astype(int)
        x = rng.standard_normal((60, 5))
        x[:, 0] += 8 * y
        ids = [f"u{i}" for i in range(60)]
        write_matrix_csv(tmp_path / "emb.csv", ids, x, prefix="e")
        _write(tmp_path / "lab.tsv", "".join(f"{k}\t{v}\n" for k, v in zip(ids, y.tolist())))
        assert main(["separation-study", "--embeddings", str(tmp_path / "emb.csv"),
                     "--labels", str(tmp_path / "lab.tsv"), "--out", str(tmp_path)]) == 0
        assert json.loads((tmp_path / "separation.json").read_text())["score"] == 1.0
        header = (tmp_path / "coords.csv").read_text().splitlines()[0]
        assert header == "id,x,y,label"

    def test_separation_study_without_positives(self, tmp_path, capsys):
        write_matrix_csv(tmp_path / "emb.csv", ["a", "b"], np.eye(2), prefix="e")
        _write(tmp_path / "lab.tsv", "a\t0\nb\t0\n")
        assert main(["separation-study", "--embeddings", str(tmp_path / "emb.csv"),
                     "--labels", str(tmp_path / "lab.tsv"), "--out", str(tmp_path)]) == 1
        assert "positive" in capsys.readouterr().err

    def test_separation_study_from_heldout_window(self, tmp_path):
        cfg = _write(tmp_path / "c.cfg", TINY + "heldout_window = true\nheldout_edge_rate = 12\n"
                     "active_threshold = 3\nvulnerable_threshold = 1\n")
        assert main(["generate", "--config", str(cfg), "--out", str(tmp_path)]) == 0
        assert main(["separation-study", "--config", str(cfg),
                     "--embeddings", str(tmp_path / "user_features.csv"),
                     "--heldout-edges", str(tmp_path / "heldout_edges.tsv"),
                     "--domain-classes", str(tmp_path / "domain_classes.tsv"), "--out", str(tmp_path)]) == 0
        score = json.loads((tmp_path / "separation.json").read_text())["score"]
        assert 0.0 <= score <= 1.0 and (tmp_path / "user_labels.tsv").is_file()

    def test_separation_study_needs_a_label_source(self, tmp_path):
        write_matrix_csv(tmp_path / "emb.csv", ["a", "b"], np.eye(2), prefix="e")
        assert main(["separation-study", "--embeddings", str(tmp_path / "emb.csv"), "--out", str(tmp_path)]) == 1
