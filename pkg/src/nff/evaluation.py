"""Exact-match micro metrics with the within/out/overall decomposition,
per-category breakdown, Pearson correlation, and prediction post-processing.

An entity counts as correct only if both its span and its label match a gold
entity of the same sentence. The within/out scopes are defined by strict
containment in the outermost projection of the gold entities (by default),
so "within" measures nested-entity recognition specifically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .spans import AnnotatedSentence, Entity, is_strictly_within, outermost


@dataclass
class PRF:
    """Precision/recall/F1 with their counts; 0/0 is reported as 0."""

    tp: int = 0
    fp: int = 0
    fn: int = 0

    @property
    def precision(self) -> float:
        return self.tp / (self.tp + self.fp) if self.tp + self.fp else 0.0

    @property
    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0

    def add(self, tp: int, fp: int, fn: int) -> None:
        self.tp += tp
        self.fp += fp
        self.fn += fn

    def to_dict(self) -> dict:
        return {
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
        }


@dataclass
class EvalReport:
    """Partitioned evaluation results; overall counts equal within + out."""

    within: PRF
    out: PRF
    overall: PRF
    per_category: dict[str, PRF] = field(default_factory=dict)
    pearson: float | None = None

    def to_dict(self) -> dict:
        return {
            "within": self.within.to_dict(),
            "out": self.out.to_dict(),
            "overall": self.overall.to_dict(),
            "per_category_within": {
                label: prf.to_dict() for label, prf in sorted(self.per_category.items())
            },
            "pearson": self.pearson,
        }


def _check_aligned(gold, pred):
    if len(gold) != len(pred):
        raise ValueError(f"gold has {len(gold)} sentences, pred has {len(pred)}")
    for g, p in zip(gold, pred):
        if g.sent_id != p.sent_id:
            raise ValueError(
                f"sentence id mismatch: gold {g.sent_id!r} vs pred {p.sent_id!r}"
            )


def micro_prf(
    gold: list[AnnotatedSentence], pred: list[AnnotatedSentence]
) -> PRF:
    """Micro precision/recall/F1 with counts pooled over all sentences."""
    _check_aligned(gold, pred)
    prf = PRF()
    for g, p in zip(gold, pred):
        matched = g.entities & p.entities
        prf.add(len(matched), len(p.entities - matched), len(g.entities - matched))
    return prf


def partitioned_eval(
    gold: list[AnnotatedSentence],
    pred: list[AnnotatedSentence],
    scope: str = "outermost",
) -> EvalReport:
    """Micro PRF split into within-entity and out-of-entity scopes.

    The scope of an entity is determined by its span alone: it is "within"
    iff the span is strictly contained in some reference gold entity span.
    ``scope="outermost"`` (default) takes the outermost projection of the
    gold entities as the reference, so nested gold entities fall in the
    within scope; ``scope="full"`` uses the full gold set.
    """
    if scope not in ("outermost", "full"):
        raise ValueError(f"unknown scope definition {scope!r}")
    _check_aligned(gold, pred)

    within = PRF()
    out = PRF()
    overall = PRF()
    per_category: dict[str, PRF] = {}

    for g, p in zip(gold, pred):
        reference = outermost(g.entities) if scope == "outermost" else g.entities
        ref_spans = {ent.span for ent in reference}

        def in_scope(ent: Entity) -> bool:
            return any(is_strictly_within(ent.span, s) for s in ref_spans)

        matched = g.entities & p.entities
        for bucket, members in (("tp", matched),
                                ("fp", p.entities - matched),
                                ("fn", g.entities - matched)):
            for ent in members:
                scoped = within if in_scope(ent) else out
                setattr(scoped, bucket, getattr(scoped, bucket) + 1)
                setattr(overall, bucket, getattr(overall, bucket) + 1)
                if in_scope(ent):
                    cat = per_category.setdefault(ent.label, PRF())
                    setattr(cat, bucket, getattr(cat, bucket) + 1)

    return EvalReport(within=within, out=out, overall=overall, per_category=per_category)


def categorical_within_f1(
    gold: list[AnnotatedSentence],
    pred: list[AnnotatedSentence],
    scope: str = "outermost",
) -> dict[str, PRF]:
    """Within-scope micro PRF per entity category.

    Categories with no gold and no predicted within-scope entities are
    absent from the result.
    """
    return partitioned_eval(gold, pred, scope).per_category


def pearson(xs, ys) -> float:
    """Sample Pearson correlation coefficient."""
    if len(xs) != len(ys):
        raise ValueError("xs and ys must have equal length")
    if len(xs) < 2:
        raise ValueError("pearson requires at least two observations")
    n = len(xs)
    mx = sum(xs) / n
    my = sum(ys) / n
    dx = [x - mx for x in xs]
    dy = [y - my for y in ys]
    sxx = sum(d * d for d in dx)
    syy = sum(d * d for d in dy)
    if sxx == 0.0 or syy == 0.0:
        raise ValueError("pearson undefined: zero variance")
    return sum(a * b for a, b in zip(dx, dy)) / math.sqrt(sxx * syy)


def post_process(pred_entities) -> set[Entity]:
    """Clean a predicted entity set of one sentence.

    Rule 1: delete any PER entity strictly within another PER entity (first
    or last names predicted inside full names). Rule 2: relabel to LOC any
    ORG entity strictly within any other entity (location names used as team
    names elsewhere in the corpus). Rule 1 applies first; idempotent.
    """
    entities = set(pred_entities)

    per_spans = {ent.span for ent in entities if ent.label == "PER"}
    entities = {
        ent
        for ent in entities
        if not (
            ent.label == "PER"
            and any(is_strictly_within(ent.span, s) for s in per_spans)
        )
    }

    spans = {ent.span for ent in entities}
    return {
        Entity(ent.span, "LOC")
        if ent.label == "ORG"
        and any(is_strictly_within(ent.span, s) for s in spans)
        else ent
        for ent in entities
    }
