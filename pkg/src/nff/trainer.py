"""Span classifier over hashed sparse features, with the three
within-entity training schemes (full negative / sampling / full ignoring).

The model is a linear softmax classifier: probs = softmax(W @ z + b) where z
is a sparse hashed feature vector for one span. Training is plain mini-batch
gradient descent with L2 regularization; all randomness flows from the
configured seed so runs are bit-reproducible.
"""

from __future__ import annotations

import json
import zlib
from dataclasses import dataclass, asdict

import numpy as np

from .spans import (
    NON_ENTITY,
    AnnotatedSentence,
    Entity,
    Span,
    SpanPartition,
    enumerate_spans,
    is_flat,
    partition_spans,
)

DEFAULT_DIM = 1 << 18

_BOS = "<s>"
_EOS = "</s>"

CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class SpanFeatures:
    """Sparse feature vector: strictly increasing indices with their values."""

    indices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if len(self.indices) != len(self.values):
            raise ValueError("indices and values length mismatch")


@dataclass
class SpanClassifier:
    """Softmax span classifier; label index 0 is the non-entity class."""

    weights: np.ndarray  # (c, d)
    bias: np.ndarray  # (c,)
    labels: list[str]  # includes NON_ENTITY at position 0

    @classmethod
    def zeros(cls, labels: list[str], dim: int = DEFAULT_DIM) -> "SpanClassifier":
        if NON_ENTITY in labels:
            raise ValueError(f"label set must not contain the reserved {NON_ENTITY!r}")
        full = [NON_ENTITY] + sorted(labels)
        return cls(
            weights=np.zeros((len(full), dim)),
            bias=np.zeros(len(full)),
            labels=full,
        )

    @property
    def dim(self) -> int:
        return self.weights.shape[1]

    def label_index(self, label: str) -> int:
        return self.labels.index(label)

    def copy(self) -> "SpanClassifier":
        return SpanClassifier(self.weights.copy(), self.bias.copy(), list(self.labels))


@dataclass
class TrainConfig:
    gamma: float = 0.01  # within-entity negative sampling rate
    epochs: int = 20
    batch_size: int = 256
    learning_rate: float = 0.5
    l2: float = 1e-6
    seed: int = 0
    max_span_len: int | None = None
    dim: int = DEFAULT_DIM

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must be in [0, 1], got {self.gamma}")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")


@dataclass(frozen=True)
class TrainingSample:
    sentence: AnnotatedSentence
    span: Span
    label: str


@dataclass
class TrainResult:
    """Trained parameters plus per-epoch diagnostics."""

    classifier: SpanClassifier
    loss_history: list[float]
    dev_f1_history: list[float]
    best_epoch: int


def _hash(feature: str, dim: int) -> int:
    return zlib.crc32(feature.encode("utf-8")) & (dim - 1)


def _length_bucket(n: int) -> str:
    if n <= 3:
        return str(n)
    if n <= 5:
        return "4-5"
    return "6+"


def _cap_pattern(token: str) -> str:
    if token.isupper():
        return "AA"
    if token[:1].isupper():
        return "Aa"
    if token.islower():
        return "aa"
    return "mixed"


def featurize_span(
    sentence: AnnotatedSentence, span: Span, dim: int = DEFAULT_DIM
) -> SpanFeatures:
    """Hash a span's surface features into a fixed-size sparse vector.

    Features: boundary tokens (surface and lowercased), adjacent context
    tokens with boundary sentinels, bag of inner tokens, length bucket,
    boundary capitalization patterns, boundary 3-char prefixes/suffixes,
    and a bias. Duplicate hash slots are merged by summing.
    """
    tokens = sentence.tokens
    first = tokens[span.start]
    last = tokens[span.end]
    left = tokens[span.start - 1] if span.start > 0 else _BOS
    right = tokens[span.end + 1] if span.end + 1 < len(tokens) else _EOS

    feats = [
        f"first={first}",
        f"first_lc={first.lower()}",
        f"last={last}",
        f"last_lc={last.lower()}",
        f"left={left}",
        f"right={right}",
        f"len={_length_bucket(len(span))}",
        f"first_cap={_cap_pattern(first)}",
        f"last_cap={_cap_pattern(last)}",
        f"first_pre3={first[:3]}",
        f"first_suf3={first[-3:]}",
        f"last_pre3={last[:3]}",
        f"last_suf3={last[-3:]}",
        "bias",
    ]
    for pos in range(span.start, span.end + 1):
        feats.append(f"inner={tokens[pos].lower()}")

    counts: dict[int, float] = {}
    for feat in feats:
        idx = _hash(feat, dim)
        counts[idx] = counts.get(idx, 0.0) + 1.0
    indices = np.array(sorted(counts), dtype=np.int64)
    values = np.array([counts[i] for i in indices], dtype=np.float64)
    return SpanFeatures(indices=indices, values=values)


def predict_probs(model: SpanClassifier, features: SpanFeatures) -> np.ndarray:
    """Posterior probabilities over the model's labels for one span."""
    logits = model.weights[:, features.indices] @ features.values + model.bias
    logits -= logits.max()
    exp = np.exp(logits)
    return exp / exp.sum()


def select_training_spans(
    partition: SpanPartition,
    gold_entities,
    gamma: float,
    rng: np.random.Generator,
    sentence: AnnotatedSentence,
) -> list[TrainingSample]:
    """Build the training samples for one flat-annotated sentence.

    Every out-of-entity span is included exactly once: entity spans with
    their gold label, the rest as non-entity. Each within-entity span is
    included as a non-entity sample independently with probability
    ``gamma``, so gamma=1 reproduces the standard full-negative protocol
    and gamma=0 ignores the within-entity region entirely.
    """
    label_by_span: dict[Span, str] = {}
    for ent in sorted(gold_entities):
        label_by_span.setdefault(ent.span, ent.label)

    samples = [
        TrainingSample(sentence, span, label_by_span.get(span, NON_ENTITY))
        for span in sorted(partition.out)
    ]
    for span in sorted(partition.within):
        if rng.random() < gamma:
            samples.append(TrainingSample(sentence, span, NON_ENTITY))
    return samples


def _batch_probs(
    model: SpanClassifier, batch: list[tuple[SpanFeatures, int]]
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized softmax over a batch of sparse rows.

    Returns (probs, flat indices, flat values, sample id per flat entry).
    """
    idx = np.concatenate([f.indices for f, _ in batch])
    val = np.concatenate([f.values for f, _ in batch])
    lengths = np.array([len(f.indices) for f, _ in batch])
    sample_ids = np.repeat(np.arange(len(batch)), lengths)
    offsets = np.concatenate([[0], np.cumsum(lengths)[:-1]])

    contrib = model.weights[:, idx] * val  # (c, nnz)
    logits = np.add.reduceat(contrib, offsets, axis=1).T + model.bias  # (B, c)
    # reduceat misbehaves on zero-length segments; feature rows always carry
    # at least the bias feature, so lengths are >= 1.
    logits -= logits.max(axis=1, keepdims=True)
    exp = np.exp(logits)
    probs = exp / exp.sum(axis=1, keepdims=True)
    return probs, idx, val, sample_ids


def loss_and_grad(
    model: SpanClassifier,
    batch: list[tuple[SpanFeatures, int]],
    l2: float = 0.0,
) -> tuple[float, tuple[np.ndarray, np.ndarray]]:
    """Mean cross-entropy over the batch plus 0.5*l2*||theta||^2.

    ``batch`` pairs each feature row with its target label index. Returns
    the scalar loss and the full-dimension gradient (dW, db).
    """
    if not batch:
        raise ValueError("batch must be non-empty")
    targets = np.array([t for _, t in batch])
    probs, idx, val, sample_ids = _batch_probs(model, batch)
    n = len(batch)

    ce = -np.mean(np.log(np.maximum(probs[np.arange(n), targets], 1e-300)))
    loss = ce + 0.5 * l2 * (np.sum(model.weights**2) + np.sum(model.bias**2))

    grad_logits = probs.copy()
    grad_logits[np.arange(n), targets] -= 1.0
    grad_logits /= n

    d_weights = l2 * model.weights
    # Scatter-add each sparse row's contribution into its feature columns.
    np.add.at(d_weights.T, idx, grad_logits[sample_ids] * val[:, None])
    d_bias = grad_logits.sum(axis=0) + l2 * model.bias
    return float(loss), (d_weights, d_bias)


def _sgd_step(
    model: SpanClassifier,
    batch: list[tuple[SpanFeatures, int]],
    lr: float,
    l2: float,
) -> float:
    """One in-place gradient-descent update; returns the batch cross-entropy."""
    targets = np.array([t for _, t in batch])
    probs, idx, val, sample_ids = _batch_probs(model, batch)
    n = len(batch)
    ce = -np.mean(np.log(np.maximum(probs[np.arange(n), targets], 1e-300)))

    grad_logits = probs
    grad_logits[np.arange(n), targets] -= 1.0
    grad_logits /= n

    if l2:
        model.weights *= 1.0 - lr * l2
        model.bias *= 1.0 - lr * l2
    np.add.at(model.weights.T, idx, -lr * grad_logits[sample_ids] * val[:, None])
    model.bias -= lr * grad_logits.sum(axis=0)
    return float(ce)


class FeatureCache:
    """Memoizes featurization per (sentence id, span); sentence ids must
    uniquely identify token sequences within one experiment."""

    def __init__(self, dim: int = DEFAULT_DIM):
        self.dim = dim
        self._store: dict[tuple[str, Span], SpanFeatures] = {}

    def get(self, sentence: AnnotatedSentence, span: Span) -> SpanFeatures:
        key = (sentence.sent_id, span)
        feats = self._store.get(key)
        if feats is None:
            feats = featurize_span(sentence, span, self.dim)
            self._store[key] = feats
        return feats


def _gold_samples(sentence: AnnotatedSentence, max_len: int | None) -> list[TrainingSample]:
    """Gold-supervision labeling: every span labeled per the nested gold."""
    label_by_span: dict[Span, str] = {}
    for ent in sorted(sentence.entities):
        label_by_span.setdefault(ent.span, ent.label)
    return [
        TrainingSample(sentence, span, label_by_span.get(span, NON_ENTITY))
        for span in sorted(enumerate_spans(len(sentence), max_len))
    ]


def _micro_f1(gold_sets: list[frozenset], pred_sets: list[set]) -> float:
    tp = fp = fn = 0
    for gold, pred in zip(gold_sets, pred_sets):
        tp += len(gold & pred)
        fp += len(pred - gold)
        fn += len(gold - pred)
    return 2 * tp / (2 * tp + fp + fn) if (2 * tp + fp + fn) else 0.0


def train(
    train_sentences: list[AnnotatedSentence],
    dev_sentences: list[AnnotatedSentence],
    config: TrainConfig,
    gold_supervision: bool = False,
    feature_cache: FeatureCache | None = None,
) -> TrainResult:
    """Train a span classifier; returns the parameters from the epoch with
    the best dev overall F1.

    In nested-from-flat mode (default) the training split must be flat and
    within-entity spans are re-sampled as negatives each epoch at rate
    ``config.gamma``. With ``gold_supervision=True`` nested gold labels are
    used for all spans and gamma is irrelevant.
    """
    if not gold_supervision:
        for sent in train_sentences:
            if not is_flat(sent.entities):
                raise ValueError(
                    f"training sentence {sent.sent_id!r} contains nested entities; "
                    "run flatten_dataset first, or enable gold supervision to "
                    "train on nested annotations"
                )

    label_set = sorted(
        {
            ent.label
            for sent in list(train_sentences) + list(dev_sentences)
            for ent in sent.entities
        }
    )
    model = SpanClassifier.zeros(label_set, config.dim)
    label_index = {label: i for i, label in enumerate(model.labels)}
    rng = np.random.default_rng(config.seed)
    cache = feature_cache or FeatureCache(config.dim)
    if cache.dim != config.dim:
        raise ValueError("feature cache dimension does not match config.dim")

    partitions = None
    if not gold_supervision:
        partitions = [
            partition_spans(sent, config.max_span_len) for sent in train_sentences
        ]

    dev_gold = [frozenset(sent.entities) for sent in dev_sentences]

    loss_history: list[float] = []
    dev_f1_history: list[float] = []
    best = model.copy()
    best_f1 = -1.0
    best_epoch = 0

    for epoch in range(config.epochs):
        samples: list[TrainingSample] = []
        if gold_supervision:
            for sent in train_sentences:
                samples.extend(_gold_samples(sent, config.max_span_len))
        else:
            for sent, part in zip(train_sentences, partitions):
                samples.extend(
                    select_training_spans(part, sent.entities, config.gamma, rng, sent)
                )
        order = rng.permutation(len(samples))

        epoch_loss = 0.0
        n_batches = 0
        for lo in range(0, len(order), config.batch_size):
            chunk = order[lo : lo + config.batch_size]
            batch = [
                (
                    cache.get(samples[k].sentence, samples[k].span),
                    label_index[samples[k].label],
                )
                for k in chunk
            ]
            epoch_loss += _sgd_step(
                model, batch, config.learning_rate, config.l2
            )
            n_batches += 1
        loss_history.append(epoch_loss / max(n_batches, 1))

        preds = [
            decode(model, sent, config.max_span_len, cache) for sent in dev_sentences
        ]
        f1 = _micro_f1(dev_gold, preds)
        dev_f1_history.append(f1)
        if f1 > best_f1:
            best_f1 = f1
            best = model.copy()
            best_epoch = epoch

    return TrainResult(
        classifier=best,
        loss_history=loss_history,
        dev_f1_history=dev_f1_history,
        best_epoch=best_epoch,
    )


def decode(
    model: SpanClassifier,
    sentence: AnnotatedSentence,
    max_span_len: int | None = None,
    feature_cache: FeatureCache | None = None,
) -> set[Entity]:
    """Predict entities: argmax label per enumerated span, non-entity dropped.

    Nested and overlapping predictions are permitted.
    """
    spans = sorted(enumerate_spans(len(sentence), max_span_len))
    if not spans:
        return set()
    if feature_cache is not None:
        rows = [(feature_cache.get(sentence, span), 0) for span in spans]
    else:
        rows = [(featurize_span(sentence, span, model.dim), 0) for span in spans]
    probs, _, _, _ = _batch_probs(model, rows)
    picks = probs.argmax(axis=1)
    return {
        Entity(span, model.labels[k])
        for span, k in zip(spans, picks)
        if model.labels[k] != NON_ENTITY
    }


def save_checkpoint(model: SpanClassifier, config: TrainConfig, path) -> None:
    """Write a versioned npz checkpoint with parameters, label set and the
    training configuration used."""
    meta = {
        "version": CHECKPOINT_VERSION,
        "labels": model.labels,
        "dim": model.dim,
        "config": asdict(config),
    }
    with open(path, "wb") as fh:
        np.savez(
            fh,
            weights=model.weights,
            bias=model.bias,
            meta=np.frombuffer(json.dumps(meta, sort_keys=True).encode(), dtype=np.uint8),
        )


def load_checkpoint(path) -> tuple[SpanClassifier, TrainConfig]:
    """Load a checkpoint, validating version and parameter dimensions."""
    with np.load(path) as data:
        weights = data["weights"]
        bias = data["bias"]
        meta = json.loads(bytes(data["meta"]).decode())
    if meta.get("version") != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {meta.get('version')!r}")
    labels = meta["labels"]
    if weights.shape != (len(labels), meta["dim"]) or bias.shape != (len(labels),):
        raise ValueError(
            f"checkpoint dimension mismatch: weights {weights.shape}, "
            f"bias {bias.shape}, {len(labels)} labels, dim {meta['dim']}"
        )
    config = TrainConfig(**meta["config"])
    return SpanClassifier(weights=weights, bias=bias, labels=labels), config
