"""Command-line entry point.

Subcommands: flatten, stats, synth, train, predict, eval, sweep. Data files
use the corpus module's formats (BIO columns or JSON-lines spans); logs go
to stderr, data to files or stdout. Every subcommand is deterministic under
fixed seed flags.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, replace
from pathlib import Path

from .corpus import (
    CorpusFormatError,
    Corpus,
    compute_stats,
    parse_bio,
    parse_json_spans,
    write_json_spans,
)
from .evaluation import partitioned_eval, pearson, post_process
from .spans import flatten_dataset
from .sweep import gamma_sweep, sweep_csv
from .synth import SynthConfig, generate_synth
from .trainer import (
    FeatureCache,
    TrainConfig,
    decode,
    load_checkpoint,
    save_checkpoint,
    train,
)


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


def _read_sentences(path: str, fmt: str = "auto"):
    text = Path(path).read_text(encoding="utf-8")
    if fmt == "auto":
        fmt = "jsonl" if path.endswith((".jsonl", ".json")) else "bio"
    if fmt == "bio":
        return parse_bio(text)
    return parse_json_spans(text)


def _load_config_file(path: str) -> dict:
    """Parse a flat key = value config document; '#' starts a comment."""
    values = {}
    for line_no, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{line_no}: expected key = value")
        key, _, raw = line.partition("=")
        values[key.strip().replace("-", "_")] = raw.strip().strip('"')
    return values


_TRAIN_FIELD_TYPES = {
    "gamma": float,
    "epochs": int,
    "batch_size": int,
    "learning_rate": float,
    "l2": float,
    "seed": int,
    "max_span_len": int,
    "dim": int,
}


def _add_train_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat key = value config file; flags override it")
    parser.add_argument("--gamma", type=float, default=None,
                        help="within-entity negative sampling rate (default 0.01)")
    parser.add_argument("--epochs", type=int, default=None)
    parser.add_argument("--batch-size", type=int, default=None)
    parser.add_argument("--learning-rate", type=float, default=None)
    parser.add_argument("--l2", type=float, default=None)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--max-span-len", type=int, default=None)
    parser.add_argument("--dim", type=int, default=None)


def _build_train_config(args) -> TrainConfig:
    values = {}
    if args.config:
        file_values = _load_config_file(args.config)
        for key, raw in file_values.items():
            if key in _TRAIN_FIELD_TYPES:
                values[key] = _TRAIN_FIELD_TYPES[key](raw)
    for key in _TRAIN_FIELD_TYPES:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    config = TrainConfig(**values)
    _log(f"effective config: {asdict(config)}")
    return config


def _cmd_flatten(args) -> int:
    sentences = _read_sentences(args.input, args.format)
    flattened = flatten_dataset(sentences)
    removed = sum(len(s.entities) for s in sentences) - sum(
        len(s.entities) for s in flattened
    )
    Path(args.output).write_text(write_json_spans(flattened), encoding="utf-8")
    print(f"removed {removed} nested entities across {len(sentences)} sentences")
    return 0


def _cmd_stats(args) -> int:
    sentences = _read_sentences(args.input, args.format)
    stats = compute_stats(sentences)
    print(f"sentences            {stats.sentences}")
    print(f"  nested (%)         {stats.nested_sentence_pct:.1f}")
    print(f"entities             {stats.entities}")
    print(f"  nested (%)         {stats.nested_entity_pct:.1f}")
    print(f"  avg length         {stats.avg_entity_len:.1f}")
    print(f"  max length         {stats.max_entity_len}")
    print(json.dumps(stats.to_dict()))
    return 0


def _cmd_synth(args) -> int:
    config = SynthConfig(
        seed=args.seed,
        train_sentences=args.train_sentences,
        dev_sentences=args.dev_sentences,
        test_sentences=args.test_sentences,
        nesting_prob=args.nesting_prob,
    )
    corpus = generate_synth(config)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, sentences in corpus.splits.items():
        (out / f"{name}.jsonl").write_text(write_json_spans(sentences), encoding="utf-8")
    for name in ("train", "dev"):
        flat = flatten_dataset(corpus.splits[name])
        (out / f"{name}.flat.jsonl").write_text(write_json_spans(flat), encoding="utf-8")
    _log(f"seed {args.seed}; planted nested entities: {corpus.meta['nested_entities']}")
    print(json.dumps({"out_dir": str(out), **corpus.meta}))
    return 0


def _cmd_train(args) -> int:
    config = _build_train_config(args)
    train_sentences = _read_sentences(args.train, args.format)
    dev_sentences = _read_sentences(args.dev, args.format)
    result = train(
        train_sentences,
        dev_sentences,
        config,
        gold_supervision=args.gold_supervision,
    )
    save_checkpoint(result.classifier, config, args.output)
    _log(
        f"best epoch {result.best_epoch} "
        f"(dev F1 {result.dev_f1_history[result.best_epoch]:.4f}); "
        f"checkpoint written to {args.output}"
    )
    return 0


def _cmd_predict(args) -> int:
    model, config = load_checkpoint(args.model)
    sentences = _read_sentences(args.input, args.format)
    predicted = []
    for sent in sentences:
        entities = decode(model, sent, config.max_span_len)
        if args.post_process:
            entities = post_process(entities)
        predicted.append(replace(sent, entities=frozenset(entities), flat=False))
    Path(args.output).write_text(write_json_spans(predicted), encoding="utf-8")
    _log(f"predicted {sum(len(s.entities) for s in predicted)} entities "
         f"over {len(predicted)} sentences")
    return 0


def _cmd_eval(args) -> int:
    gold = _read_sentences(args.gold, args.format)
    pred = _read_sentences(args.pred, args.format)
    report = partitioned_eval(gold, pred, scope=args.scope)
    # Decomposition identity is asserted on every run as a self-check.
    assert report.overall.tp == report.within.tp + report.out.tp
    assert report.overall.fp == report.within.fp + report.out.fp
    assert report.overall.fn == report.within.fn + report.out.fn
    if args.pearson_against:
        other = json.loads(Path(args.pearson_against).read_text())
        other_f1 = {
            label: prf["f1"]
            for label, prf in other.get("per_category_within", {}).items()
        }
        shared = sorted(set(other_f1) & set(report.per_category))
        if len(shared) >= 2:
            try:
                report.pearson = pearson(
                    [report.per_category[label].f1 for label in shared],
                    [other_f1[label] for label in shared],
                )
            except ValueError as exc:
                _log(f"pearson skipped: {exc}")
        else:
            _log("pearson skipped: fewer than two shared categories")
    output = json.dumps(report.to_dict(), indent=2)
    if args.output:
        Path(args.output).write_text(output + "\n", encoding="utf-8")
    print(output)
    return 0


def _cmd_sweep(args) -> int:
    args.gamma = None  # sweep supplies gamma per cell
    template = _build_train_config(args)
    corpus_dir = Path(args.corpus_dir)
    corpus = Corpus(
        splits={
            "train": parse_json_spans((corpus_dir / "train.flat.jsonl").read_text()),
            "dev": parse_json_spans((corpus_dir / "dev.flat.jsonl").read_text()),
            "test": parse_json_spans((corpus_dir / "test.jsonl").read_text()),
        },
        labels=sorted(
            {
                ent.label
                for name in ("train.flat.jsonl", "dev.flat.jsonl", "test.jsonl")
                for sent in parse_json_spans((corpus_dir / name).read_text())
                for ent in sent.entities
            }
        ),
    )
    gammas = [float(g) for g in args.gammas.split(",")]
    rows = gamma_sweep(corpus, gammas, args.seeds, template, jobs=args.jobs)
    csv_text = sweep_csv(rows)
    Path(args.output).write_text(csv_text, encoding="utf-8")
    print(csv_text, end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nff",
        description="Nested-from-flat NER toolkit: span partitioning, "
        "negative-sampling training and partitioned evaluation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("flatten", help="keep only outermost entities")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--format", choices=["auto", "bio", "jsonl"], default="auto")
    p.set_defaults(func=_cmd_flatten)

    p = sub.add_parser("stats", help="descriptive corpus statistics")
    p.add_argument("input")
    p.add_argument("--format", choices=["auto", "bio", "jsonl"], default="auto")
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("synth", help="generate the synthetic nested corpus")
    p.add_argument("out_dir")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--train-sentences", type=int, default=2000)
    p.add_argument("--dev-sentences", type=int, default=300)
    p.add_argument("--test-sentences", type=int, default=300)
    p.add_argument("--nesting-prob", type=float, default=0.5)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("train", help="train a span classifier")
    p.add_argument("train")
    p.add_argument("dev")
    p.add_argument("-o", "--output", required=True, help="checkpoint path")
    p.add_argument("--format", choices=["auto", "bio", "jsonl"], default="auto")
    p.add_argument("--gold-supervision", action="store_true",
                   help="train on nested gold labels (upper-bound condition)")
    _add_train_flags(p)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("predict", help="decode entities with a trained model")
    p.add_argument("model")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--format", choices=["auto", "bio", "jsonl"], default="auto")
    p.add_argument("--post-process", action="store_true",
                   help="apply the nested-PER / nested-ORG cleanup rules")
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("eval", help="partitioned exact-match evaluation")
    p.add_argument("gold")
    p.add_argument("pred")
    p.add_argument("--format", choices=["auto", "bio", "jsonl"], default="auto")
    p.add_argument("--scope", choices=["outermost", "full"], default="outermost")
    p.add_argument("--pearson-against",
                   help="eval-report JSON to correlate per-category within F1 against")
    p.add_argument("-o", "--output", help="also write the report JSON here")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("sweep", help="gamma sweep over the sampling rate")
    p.add_argument("corpus_dir",
                   help="directory with train.flat.jsonl, dev.flat.jsonl, test.jsonl")
    p.add_argument("-o", "--output", required=True, help="CSV output path")
    p.add_argument("--gammas", default="0,0.01,1")
    p.add_argument("--seeds", type=int, default=10,
                   help="runs per gamma, seeded seed..seed+N-1")
    p.add_argument("--jobs", type=int, default=1)
    _add_train_flags(p)
    p.set_defaults(func=_cmd_sweep)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError, CorpusFormatError) as exc:
        _log(f"error: {exc}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
