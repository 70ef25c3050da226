"""Core span types, strict-containment tests, and the within/out partition.

All spans are token-index intervals, inclusive on both ends: (start, end)
covers tokens[start .. end]. External half-open formats must be converted
at the I/O boundary.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

# Reserved non-entity label; never a valid entity category.
NON_ENTITY = "O"


@dataclass(frozen=True, order=True)
class Span:
    """A contiguous token interval, inclusive on both ends."""

    start: int
    end: int

    def __post_init__(self):
        if not (0 <= self.start <= self.end):
            raise ValueError(f"invalid span ({self.start}, {self.end})")

    def __len__(self) -> int:
        return self.end - self.start + 1


@dataclass(frozen=True, order=True)
class Entity:
    """A typed span: an entity mention with its category label."""

    span: Span
    label: str

    def __post_init__(self):
        if not self.label or self.label == NON_ENTITY:
            raise ValueError(f"invalid entity label {self.label!r}")


@dataclass(frozen=True)
class AnnotatedSentence:
    """A tokenized sentence with a set of (gold or predicted) entities.

    ``flat=True`` asserts that no entity is strictly nested inside another;
    this is validated at construction time.
    """

    tokens: tuple[str, ...]
    entities: frozenset[Entity]
    sent_id: str = ""
    doc_id: str = ""
    flat: bool = False

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        object.__setattr__(self, "entities", frozenset(self.entities))
        for ent in self.entities:
            if ent.span.end >= len(self.tokens):
                raise ValueError(
                    f"entity span {ent.span} exceeds sentence length {len(self.tokens)}"
                )
        if self.flat and not is_flat(self.entities):
            raise ValueError("sentence flagged flat but contains nested entities")

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True)
class SpanPartition:
    """The span sets of one sentence: all candidates, entity spans, and the
    within-entity / out-of-entity split.

    ``within`` and ``out`` are mutually exclusive and jointly cover ``all``;
    for flat annotations every entity span lands in ``out``.
    """

    all: frozenset[Span]
    entity: frozenset[Span]
    within: frozenset[Span]
    out: frozenset[Span]


def enumerate_spans(length: int, max_len: int | None = None) -> set[Span]:
    """All spans (i, j) with 0 <= i <= j < length, optionally capped in width.

    Uncapped cardinality is length*(length+1)/2; length 0 gives the empty set.
    """
    if max_len is not None and max_len < 1:
        raise ValueError(f"max_len must be >= 1, got {max_len}")
    spans = set()
    for i in range(length):
        top = length if max_len is None else min(length, i + max_len)
        for j in range(i, top):
            spans.add(Span(i, j))
    return spans


def is_strictly_within(inner: Span, outer: Span) -> bool:
    """True iff ``inner`` is strictly contained in ``outer``.

    Containment here means nested on at least one side: equal spans and
    partial overlaps both fail.
    """
    s, e = inner.start, inner.end
    s2, e2 = outer.start, outer.end
    return (s2 <= s and e < e2) or (s2 < s and e <= e2)


def partition_spans(
    sentence: AnnotatedSentence, max_len: int | None = None
) -> SpanPartition:
    """Split all candidate spans of ``sentence`` into within-entity and
    out-of-entity sets, using the sentence's entity spans as the reference.

    A span is within-entity iff it is strictly contained in some entity span.
    """
    all_spans = enumerate_spans(len(sentence), max_len)
    entity_spans = {ent.span for ent in sentence.entities}
    within = {
        s for s in all_spans if any(is_strictly_within(s, e) for e in entity_spans)
    }
    return SpanPartition(
        all=frozenset(all_spans),
        entity=frozenset(entity_spans),
        within=frozenset(within),
        out=frozenset(all_spans - within),
    )


def is_flat(entities) -> bool:
    """True iff no entity span is strictly contained in another's."""
    spans = [ent.span for ent in entities]
    return not any(
        is_strictly_within(a, b) for a in spans for b in spans if a != b
    )


def outermost(entities) -> set[Entity]:
    """Keep only entities whose spans are not strictly inside another entity's.

    Identical spans with different labels are not nested in each other, so
    both survive. Idempotent; the result satisfies the flat invariant.
    """
    entities = set(entities)
    spans = {ent.span for ent in entities}
    return {
        ent
        for ent in entities
        if not any(is_strictly_within(ent.span, other) for other in spans)
    }


def flatten_dataset(dataset: list[AnnotatedSentence]) -> list[AnnotatedSentence]:
    """Project every sentence onto its outermost entities and flag it flat."""
    return [
        replace(sent, entities=frozenset(outermost(sent.entities)), flat=True)
        for sent in dataset
    ]
