import json
from pathlib import Path

import pytest

from nff.cli import main
from nff.corpus import parse_json_spans, write_json_spans
from nff.spans import AnnotatedSentence, Entity, Span


def write_jsonl(path, sentences):
    Path(path).write_text(write_json_spans(sentences), encoding="utf-8")


@pytest.fixture
def nested_file(tmp_path):
    sent = AnnotatedSentence(
        tokens=tuple("Mr. John Smith graduated from New York University last year".split()),
        entities=frozenset({
            Entity(Span(1, 2), "PER"),
            Entity(Span(5, 7), "ORG"),
            Entity(Span(5, 6), "LOC"),
        }),
        sent_id="fig1",
    )
    path = tmp_path / "nested.jsonl"
    write_jsonl(path, [sent])
    return path


@pytest.fixture(scope="module")
def synth_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("corpus")
    rc = main([
        "synth", str(out), "--seed", "3", "--train-sentences", "80",
        "--dev-sentences", "20", "--test-sentences", "20",
        "--nesting-prob", "0.5",
    ])
    assert rc == 0
    return out


class TestFlatten:
    def test_removes_nested(self, nested_file, tmp_path, capsys):
        out = tmp_path / "flat.jsonl"
        assert main(["flatten", str(nested_file), str(out)]) == 0
        assert "removed 1 nested entities" in capsys.readouterr().out
        (sent,) = parse_json_spans(out.read_text())
        assert len(sent.entities) == 2
        assert sent.flat

    def test_flat_input_zero_removed(self, tmp_path, capsys):
        src = tmp_path / "in.jsonl"
        write_jsonl(src, [AnnotatedSentence(("a",), frozenset(), sent_id="0")])
        assert main(["flatten", str(src), str(tmp_path / "out.jsonl")]) == 0
        assert "removed 0" in capsys.readouterr().out

    def test_missing_file(self, tmp_path):
        assert main(["flatten", str(tmp_path / "none.jsonl"), str(tmp_path / "o")]) == 1


class TestStats:
    def test_nested_fixture(self, nested_file, capsys):
        assert main(["stats", str(nested_file)]) == 0
        out = capsys.readouterr().out
        stats = json.loads(out.strip().splitlines()[-1])
        assert stats["sentences"] == 1
        assert stats["nested_sentence_pct"] == 100.0
        assert stats["entities"] == 3

    def test_bio_format(self, tmp_path, capsys):
        src = tmp_path / "data.bio"
        src.write_text("EU B-ORG\nrejects O\n")
        assert main(["stats", str(src)]) == 0
        stats = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
        assert stats["entities"] == 1


class TestSynth:
    def test_writes_all_files(self, synth_dir):
        for name in ("train.jsonl", "dev.jsonl", "test.jsonl",
                     "train.flat.jsonl", "dev.flat.jsonl"):
            assert (synth_dir / name).exists()

    def test_deterministic(self, synth_dir, tmp_path):
        rc = main([
            "synth", str(tmp_path / "again"), "--seed", "3",
            "--train-sentences", "80", "--dev-sentences", "20",
            "--test-sentences", "20", "--nesting-prob", "0.5",
        ])
        assert rc == 0
        assert (tmp_path / "again" / "train.jsonl").read_text() == (
            synth_dir / "train.jsonl"
        ).read_text()


TRAIN_FLAGS = ["--epochs", "3", "--learning-rate", "3.0", "--dim", str(1 << 14)]


class TestTrainPredictEval:
    def test_pipeline(self, synth_dir, tmp_path, capsys):
        ckpt = tmp_path / "model.npz"
        rc = main(["train", str(synth_dir / "train.flat.jsonl"),
                   str(synth_dir / "dev.flat.jsonl"), "-o", str(ckpt),
                   "--seed", "1", *TRAIN_FLAGS])
        assert rc == 0
        pred = tmp_path / "pred.jsonl"
        assert main(["predict", str(ckpt), str(synth_dir / "test.jsonl"),
                     str(pred)]) == 0
        assert main(["eval", str(synth_dir / "test.jsonl"), str(pred)]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["overall"]["tp"] == (
            report["within"]["tp"] + report["out"]["tp"]
        )

    def test_same_seed_byte_identical_checkpoints(self, synth_dir, tmp_path):
        paths = []
        for name in ("a.npz", "b.npz"):
            ckpt = tmp_path / name
            rc = main(["train", str(synth_dir / "train.flat.jsonl"),
                       str(synth_dir / "dev.flat.jsonl"), "-o", str(ckpt),
                       "--seed", "5", *TRAIN_FLAGS])
            assert rc == 0
            paths.append(ckpt)
        assert paths[0].read_bytes() == paths[1].read_bytes()

    def test_nested_train_data_refused(self, synth_dir, tmp_path):
        rc = main(["train", str(synth_dir / "train.jsonl"),
                   str(synth_dir / "dev.flat.jsonl"),
                   "-o", str(tmp_path / "m.npz"), *TRAIN_FLAGS])
        assert rc == 1

    def test_gold_supervision_flag(self, synth_dir, tmp_path):
        rc = main(["train", str(synth_dir / "train.jsonl"),
                   str(synth_dir / "dev.jsonl"),
                   "-o", str(tmp_path / "m.npz"), "--gold-supervision",
                   *TRAIN_FLAGS])
        assert rc == 0

    def test_gamma_recorded_in_checkpoint(self, synth_dir, tmp_path):
        from nff.trainer import load_checkpoint

        ckpt = tmp_path / "m.npz"
        rc = main(["train", str(synth_dir / "train.flat.jsonl"),
                   str(synth_dir / "dev.flat.jsonl"), "-o", str(ckpt),
                   "--gamma", "0", *TRAIN_FLAGS])
        assert rc == 0
        _, config = load_checkpoint(ckpt)
        assert config.gamma == 0.0

    def test_config_file_with_flag_override(self, synth_dir, tmp_path):
        from nff.trainer import load_checkpoint

        cfg = tmp_path / "train.cfg"
        cfg.write_text("gamma = 0.5\nepochs = 2\nlearning-rate = 3.0\n"
                       f"dim = {1 << 14}\n# comment\n")
        ckpt = tmp_path / "m.npz"
        rc = main(["train", str(synth_dir / "train.flat.jsonl"),
                   str(synth_dir / "dev.flat.jsonl"), "-o", str(ckpt),
                   "--config", str(cfg), "--gamma", "0.25"])
        assert rc == 0
        _, config = load_checkpoint(ckpt)
        assert config.gamma == 0.25  # flag wins
        assert config.epochs == 2  # file value kept


class TestPredictPostProcess:
    def test_per_in_per_removed(self, tmp_path, capsys):
        # Build a checkpoint whose bias forces PER everywhere, then check the
        # post-processing flag strips nested PER predictions.
        import numpy as np
        from nff.trainer import SpanClassifier, TrainConfig, save_checkpoint

        model = SpanClassifier.zeros(["PER", "ORG"], 1 << 10)
        model.bias[model.labels.index("PER")] = 10.0
        ckpt = tmp_path / "m.npz"
        save_checkpoint(model, TrainConfig(dim=1 << 10, max_span_len=2), ckpt)

        src = tmp_path / "in.jsonl"
        write_jsonl(src, [AnnotatedSentence(("Tan", "Kong", "Yam"),
                                            frozenset(), sent_id="0")])
        out = tmp_path / "out.jsonl"
        assert main(["predict", str(ckpt), str(src), str(out),
                     "--post-process"]) == 0
        (sent,) = parse_json_spans(out.read_text())
        spans = {(e.span.start, e.span.end) for e in sent.entities}
        # no single-token PER survives inside a longer PER
        assert (0, 1) in spans or (1, 2) in spans
        for ent in sent.entities:
            assert not any(
                o != ent and o.label == "PER" and ent.label == "PER"
                and o.span.start <= ent.span.start and ent.span.end <= o.span.end
                and o.span != ent.span
                for o in sent.entities
            )

    def test_empty_bias_model_empty_predictions(self, tmp_path):
        from nff.trainer import SpanClassifier, TrainConfig, save_checkpoint

        model = SpanClassifier.zeros(["PER"], 1 << 10)
        model.bias[0] = 10.0  # non-entity dominates
        ckpt = tmp_path / "m.npz"
        save_checkpoint(model, TrainConfig(dim=1 << 10), ckpt)
        src = tmp_path / "in.jsonl"
        write_jsonl(src, [AnnotatedSentence(("a", "b"), frozenset(), sent_id="0")])
        out = tmp_path / "out.jsonl"
        assert main(["predict", str(ckpt), str(src), str(out)]) == 0
        (sent,) = parse_json_spans(out.read_text())
        assert sent.entities == frozenset()


class TestSweepCommand:
    def test_sweep_runs_and_is_deterministic(self, synth_dir, tmp_path):
        args = ["sweep", str(synth_dir), "--gammas", "0,1", "--seeds", "2",
                *TRAIN_FLAGS]
        out_a = tmp_path / "a.csv"
        out_b = tmp_path / "b.csv"
        assert main([*args, "-o", str(out_a)]) == 0
        assert main([*args, "-o", str(out_b)]) == 0
        assert out_a.read_text() == out_b.read_text()
        lines = out_a.read_text().strip().splitlines()
        assert lines[0].startswith("gamma,seed_count,within_p")
        assert len(lines) == 3


class TestEvalScopes:
    def test_scope_flag_accepted_and_identity_holds(self, tmp_path, capsys):
        gold = AnnotatedSentence(
            ("a", "b", "c", "d"),
            frozenset({Entity(Span(0, 3), "ORG"), Entity(Span(1, 2), "LOC")}),
            sent_id="0",
        )
        pred = AnnotatedSentence(
            ("a", "b", "c", "d"),
            frozenset({Entity(Span(1, 1), "LOC")}),
            sent_id="0",
        )
        gold_path, pred_path = tmp_path / "g.jsonl", tmp_path / "p.jsonl"
        write_jsonl(gold_path, [gold])
        write_jsonl(pred_path, [pred])
        for scope in ("outermost", "full"):
            assert main(["eval", str(gold_path), str(pred_path),
                         "--scope", scope]) == 0
            rep = json.loads(capsys.readouterr().out)
            assert rep["overall"]["fn"] == rep["within"]["fn"] + rep["out"]["fn"]
            assert rep["within"]["fp"] == 1  # predicted LOC(1,1) is in-scope

    def test_pearson_against_reference_report(self, tmp_path, capsys):
        gold = AnnotatedSentence(
            ("a", "b", "c", "d", "e"),
            frozenset({Entity(Span(0, 3), "ORG"), Entity(Span(1, 2), "LOC"),
                       Entity(Span(2, 2), "PER")}),
            sent_id="0",
        )
        gold_path = tmp_path / "g.jsonl"
        write_jsonl(gold_path, [gold])
        ref_path = tmp_path / "ref.json"
        assert main(["eval", str(gold_path), str(gold_path),
                     "-o", str(ref_path)]) == 0
        capsys.readouterr()
        assert main(["eval", str(gold_path), str(gold_path),
                     "--pearson-against", str(ref_path)]) == 0
        rep = json.loads(capsys.readouterr().out)
        assert rep["pearson"] is None  # both LOC and PER F1 are 1.0: no variance
        # is reported as a skip, not an error

