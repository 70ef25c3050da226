"""Nested-from-flat NER toolkit."""

from .spans import (
    NON_ENTITY,
    AnnotatedSentence,
    Entity,
    Span,
    SpanPartition,
    enumerate_spans,
    flatten_dataset,
    is_strictly_within,
    outermost,
    partition_spans,
)
from .corpus import (
    Corpus,
    CorpusStats,
    compute_stats,
    parse_bio,
    parse_json_spans,
    write_json_spans,
)
from .synth import SynthConfig, generate_synth
from .trainer import (
    SpanClassifier,
    TrainConfig,
    decode,
    featurize_span,
    loss_and_grad,
    predict_probs,
    select_training_spans,
    train,
)
from .evaluation import (
    EvalReport,
    PRF,
    categorical_within_f1,
    micro_prf,
    partitioned_eval,
    pearson,
    post_process,
)
from .sweep import gamma_sweep, sweep_csv

__version__ = "0.1.0"
