from dataclasses import replace

import pytest

from nff.corpus import Corpus
from nff.spans import flatten_dataset
from nff.sweep import CSV_HEADER, gamma_sweep, run_cell, sweep_csv
from nff.synth import SynthConfig, generate_synth
from nff.trainer import FeatureCache, TrainConfig


@pytest.fixture(scope="module")
def flat_corpus():
    corpus = generate_synth(
        SynthConfig(seed=3, train_sentences=60, dev_sentences=20,
                    test_sentences=20, nesting_prob=0.5)
    )
    return Corpus(
        splits={
            "train": flatten_dataset(corpus.splits["train"]),
            "dev": flatten_dataset(corpus.splits["dev"]),
            "test": corpus.splits["test"],
        },
        labels=corpus.labels,
    )


def template():
    return TrainConfig(epochs=3, batch_size=256, learning_rate=3.0,
                       seed=0, dim=1 << 14)


def test_single_cell_equals_direct_run(flat_corpus):
    rows = gamma_sweep(flat_corpus, [0.0], 1, template())
    cell = run_cell(flat_corpus, replace(template(), gamma=0.0))
    assert len(rows) == 1
    row = rows[0]
    assert row.within_f1 == cell.within_f1
    assert row.out_f1 == cell.out_f1
    assert row.overall_f1 == cell.overall_f1
    assert row.within_f1_sd == 0.0


def test_deterministic(flat_corpus):
    a = sweep_csv(gamma_sweep(flat_corpus, [0.0, 1.0], 2, template()))
    b = sweep_csv(gamma_sweep(flat_corpus, [0.0, 1.0], 2, template()))
    assert a == b


def test_csv_format(flat_corpus):
    csv_text = sweep_csv(gamma_sweep(flat_corpus, [0.0], 1, template()))
    lines = csv_text.strip().split("\n")
    assert lines[0] == CSV_HEADER
    fields = lines[1].split(",")
    assert len(fields) == 12
    assert fields[0] == "0"
    assert fields[1] == "1"
    for value in fields[2:]:
        assert len(value.split(".")[1]) == 4


def test_parallel_matches_serial(flat_corpus):
    serial = sweep_csv(gamma_sweep(flat_corpus, [0.0, 1.0], 2, template()))
    parallel = sweep_csv(gamma_sweep(flat_corpus, [0.0, 1.0], 2, template(), jobs=2))
    assert serial == parallel


def test_bad_seed_count(flat_corpus):
    with pytest.raises(ValueError):
        gamma_sweep(flat_corpus, [0.0], 0, template())
