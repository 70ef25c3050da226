"""Sampling-rate sweep: train one model per (gamma, seed) cell, evaluate
with the partitioned metrics, and aggregate mean/sd across seeds."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

from .corpus import Corpus
from .evaluation import partitioned_eval
from .trainer import FeatureCache, TrainConfig, decode, train

CSV_HEADER = (
    "gamma,seed_count,within_p,within_p_sd,within_r,within_r_sd,"
    "within_f1,within_f1_sd,out_f1,out_f1_sd,overall_f1,overall_f1_sd"
)


@dataclass
class CellResult:
    """Evaluation of one trained model."""

    gamma: float
    seed: int
    within_p: float
    within_r: float
    within_f1: float
    out_f1: float
    overall_f1: float


@dataclass
class SweepRow:
    """Per-gamma aggregate over seeds."""

    gamma: float
    seed_count: int
    within_p: float
    within_p_sd: float
    within_r: float
    within_r_sd: float
    within_f1: float
    within_f1_sd: float
    out_f1: float
    out_f1_sd: float
    overall_f1: float
    overall_f1_sd: float


def _mean_sd(values) -> tuple[float, float]:
    n = len(values)
    mean = sum(values) / n
    var = sum((v - mean) ** 2 for v in values) / n
    return mean, math.sqrt(var)


def run_cell(
    corpus: Corpus,
    config: TrainConfig,
    gold_supervision: bool = False,
    feature_cache: FeatureCache | None = None,
    scope: str = "outermost",
) -> CellResult:
    """Train on the corpus' train/dev splits and evaluate on the nested test
    split."""
    cache = feature_cache or FeatureCache(config.dim)
    result = train(
        corpus.splits["train"],
        corpus.splits["dev"],
        config,
        gold_supervision=gold_supervision,
        feature_cache=cache,
    )
    test = corpus.splits["test"]
    pred = [
        replace(sent, entities=frozenset(
            decode(result.classifier, sent, config.max_span_len, cache)
        ), flat=False)
        for sent in test
    ]
    report = partitioned_eval(test, pred, scope)
    return CellResult(
        gamma=config.gamma,
        seed=config.seed,
        within_p=report.within.precision,
        within_r=report.within.recall,
        within_f1=report.within.f1,
        out_f1=report.out.f1,
        overall_f1=report.overall.f1,
    )


def _cell_worker(args) -> CellResult:
    corpus, config = args
    return run_cell(corpus, config)


def gamma_sweep(
    corpus: Corpus,
    gammas,
    n_seeds: int,
    template: TrainConfig,
    jobs: int = 1,
) -> list[SweepRow]:
    """Train ``n_seeds`` models per gamma and aggregate the partitioned
    metrics; seeds are ``template.seed + 0 .. n_seeds - 1``.

    Expects flat train/dev splits and a nested test split. With ``jobs > 1``
    cells run in separate processes; results are assembled in (gamma, seed)
    order either way.
    """
    if n_seeds < 1:
        raise ValueError("n_seeds must be >= 1")
    tasks = [
        (gamma, replace(template, gamma=gamma, seed=template.seed + k))
        for gamma in gammas
        for k in range(n_seeds)
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            cells = list(pool.map(_cell_worker, [(corpus, cfg) for _, cfg in tasks]))
    else:
        cache = FeatureCache(template.dim)
        cells = [run_cell(corpus, cfg, feature_cache=cache) for _, cfg in tasks]

    rows = []
    for gamma in gammas:
        group = [c for c in cells if c.gamma == gamma]
        wp, wp_sd = _mean_sd([c.within_p for c in group])
        wr, wr_sd = _mean_sd([c.within_r for c in group])
        wf, wf_sd = _mean_sd([c.within_f1 for c in group])
        of, of_sd = _mean_sd([c.out_f1 for c in group])
        af, af_sd = _mean_sd([c.overall_f1 for c in group])
        rows.append(
            SweepRow(
                gamma=gamma,
                seed_count=n_seeds,
                within_p=wp, within_p_sd=wp_sd,
                within_r=wr, within_r_sd=wr_sd,
                within_f1=wf, within_f1_sd=wf_sd,
                out_f1=of, out_f1_sd=of_sd,
                overall_f1=af, overall_f1_sd=af_sd,
            )
        )
    return rows


def sweep_csv(rows: list[SweepRow]) -> str:
    """Render sweep rows as CSV with 4-decimal metric columns."""
    lines = [CSV_HEADER]
    for r in rows:
        lines.append(
            f"{r.gamma:g},{r.seed_count},"
            f"{r.within_p:.4f},{r.within_p_sd:.4f},"
            f"{r.within_r:.4f},{r.within_r_sd:.4f},"
            f"{r.within_f1:.4f},{r.within_f1_sd:.4f},"
            f"{r.out_f1:.4f},{r.out_f1_sd:.4f},"
            f"{r.overall_f1:.4f},{r.overall_f1_sd:.4f}"
        )
    return "\n".join(lines) + "\n"
