"""Corpus I/O and descriptive statistics.

Two file formats are supported:

* BIO/IOB1 column files (flat annotations only): one token per line, tag in
  the last whitespace-separated column, blank line between sentences,
  ``-DOCSTART-`` lines skipped.
* JSON-lines span files (flat or nested): one record per line with keys
  ``id``, ``doc_id``, ``tokens``, ``entities``, ``flat``. Entity ``start``
  and ``end`` are token indices, inclusive on both ends.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .spans import AnnotatedSentence, Entity, Span, is_strictly_within


@dataclass
class Corpus:
    """Named splits plus the ordered label set they draw from."""

    splits: dict[str, list[AnnotatedSentence]]
    labels: list[str]
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        known = set(self.labels)
        for name, sentences in self.splits.items():
            for sent in sentences:
                for ent in sent.entities:
                    if ent.label not in known:
                        raise ValueError(
                            f"label {ent.label!r} in split {name!r} missing from label set"
                        )


@dataclass
class CorpusStats:
    """Descriptive statistics: sentence/entity counts, nesting rates, lengths."""

    sentences: int
    nested_sentence_pct: float
    entities: int
    nested_entity_pct: float
    avg_entity_len: float
    max_entity_len: int

    def to_dict(self) -> dict:
        return {
            "sentences": self.sentences,
            "nested_sentence_pct": self.nested_sentence_pct,
            "entities": self.entities,
            "nested_entity_pct": self.nested_entity_pct,
            "avg_entity_len": self.avg_entity_len,
            "max_entity_len": self.max_entity_len,
        }


class CorpusFormatError(ValueError):
    """Malformed corpus input; the message names the offending line or record."""


def _detect_scheme(sentences_tags: list[list[str]]) -> str:
    # A B- tag opening a chunk (not preceded by a same-type chunk tag)
    # cannot occur in IOB1, where B- only separates adjacent chunks.
    for tags in sentences_tags:
        prev = "O"
        for tag in tags:
            if tag.startswith("B-"):
                kind = tag[2:]
                if prev == "O" or prev[2:] != kind:
                    return "bio2"
            prev = tag
    return "iob1"


def parse_bio(text: str, scheme: str = "auto") -> list[AnnotatedSentence]:
    """Parse a BIO2 or IOB1 column file into flat annotated sentences.

    ``scheme`` is ``"auto"`` (default), ``"bio2"`` or ``"iob1"``. Under bio2
    an I- tag that does not continue a same-type chunk is an error naming the
    line number.
    """
    if scheme not in ("auto", "bio2", "iob1"):
        raise ValueError(f"unknown tag scheme {scheme!r}")

    # First pass: split into sentences of (line_no, token, tag).
    sentences: list[list[tuple[int, str, str]]] = []
    current: list[tuple[int, str, str]] = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped:
            if current:
                sentences.append(current)
                current = []
            continue
        cols = stripped.split()
        if cols[0] == "-DOCSTART-":
            continue
        token, tag = cols[0], cols[-1]
        if tag != "O" and not (tag.startswith("B-") or tag.startswith("I-")):
            raise CorpusFormatError(f"line {line_no}: unrecognized tag {tag!r}")
        current.append((line_no, token, tag))
    if current:
        sentences.append(current)

    if scheme == "auto":
        scheme = _detect_scheme([[tag for _, _, tag in sent] for sent in sentences])

    out = []
    for idx, sent in enumerate(sentences):
        tokens = tuple(token for _, token, _ in sent)
        entities = set()
        start = None
        kind = None
        for pos, (line_no, _, tag) in enumerate(sent):
            prev_tag = sent[pos - 1][2] if pos > 0 else "O"
            if tag == "O":
                opens = False
            elif tag.startswith("B-"):
                if scheme == "iob1" and (prev_tag == "O" or prev_tag[2:] != tag[2:]):
                    raise CorpusFormatError(
                        f"line {line_no}: B-{tag[2:]} does not follow a "
                        f"same-type chunk (invalid under IOB1)"
                    )
                opens = True
            else:  # I-
                continues = kind == tag[2:]
                if scheme == "bio2" and not continues:
                    raise CorpusFormatError(
                        f"line {line_no}: I-{tag[2:]} does not continue a "
                        f"B-{tag[2:]} chunk (invalid under strict BIO2)"
                    )
                opens = not continues
            if start is not None and (tag == "O" or opens or tag[2:] != kind):
                entities.add(Entity(Span(start, pos - 1), kind))
                start, kind = None, None
            if tag != "O" and (opens or start is None):
                start, kind = pos, tag[2:]
        if start is not None:
            entities.add(Entity(Span(start, len(sent) - 1), kind))
        out.append(
            AnnotatedSentence(
                tokens=tokens,
                entities=frozenset(entities),
                sent_id=str(idx),
                flat=True,
            )
        )
    return out


def parse_json_spans(text: str) -> list[AnnotatedSentence]:
    """Parse JSON-lines span records; inverse of :func:`write_json_spans`.

    Errors name the zero-based record index.
    """
    sentences = []
    for idx, line in enumerate(text.splitlines()):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorpusFormatError(f"record {idx}: invalid JSON ({exc})") from exc
        try:
            tokens = record["tokens"]
            if not isinstance(tokens, list) or not all(
                isinstance(t, str) for t in tokens
            ):
                raise CorpusFormatError(f"record {idx}: tokens must be a string list")
            entities = set()
            for ent in record.get("entities", []):
                start, end, label = ent["start"], ent["end"], ent["label"]
                if not isinstance(start, int) or not isinstance(end, int):
                    raise CorpusFormatError(
                        f"record {idx}: entity start/end must be integers"
                    )
                if end < start or start < 0:
                    raise CorpusFormatError(
                        f"record {idx}: invalid entity span ({start}, {end})"
                    )
                if end >= len(tokens):
                    raise CorpusFormatError(
                        f"record {idx}: entity span ({start}, {end}) exceeds "
                        f"sentence length {len(tokens)}"
                    )
                if not isinstance(label, str):
                    raise CorpusFormatError(f"record {idx}: entity label must be a string")
                entities.add(Entity(Span(start, end), label))
            sentence = AnnotatedSentence(
                tokens=tuple(tokens),
                entities=frozenset(entities),
                sent_id=str(record.get("id", idx)),
                doc_id=str(record.get("doc_id", "")),
                flat=bool(record.get("flat", False)),
            )
        except CorpusFormatError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise CorpusFormatError(f"record {idx}: {exc}") from exc
        sentences.append(sentence)
    return sentences


def write_json_spans(sentences: list[AnnotatedSentence]) -> str:
    """Serialize sentences as deterministic JSON-lines (stable field order,
    entities sorted by position then label)."""
    lines = []
    for sent in sentences:
        record = {
            "id": sent.sent_id,
            "doc_id": sent.doc_id,
            "tokens": list(sent.tokens),
            "entities": [
                {"start": ent.span.start, "end": ent.span.end, "label": ent.label}
                for ent in sorted(sent.entities)
            ],
            "flat": sent.flat,
        }
        lines.append(json.dumps(record, ensure_ascii=False))
    return "\n".join(lines) + ("\n" if lines else "")


def compute_stats(sentences: list[AnnotatedSentence]) -> CorpusStats:
    """Descriptive statistics over a list of sentences.

    An entity is nested iff its span is strictly contained in another
    entity's span of the same sentence; identical spans with different
    labels do not count.
    """
    n_sentences = len(sentences)
    n_entities = 0
    n_nested_entities = 0
    n_nested_sentences = 0
    total_len = 0
    max_len = 0
    for sent in sentences:
        spans = [ent.span for ent in sent.entities]
        nested_here = 0
        for ent in sent.entities:
            n_entities += 1
            total_len += len(ent.span)
            max_len = max(max_len, len(ent.span))
            if any(is_strictly_within(ent.span, other) for other in spans):
                nested_here += 1
        n_nested_entities += nested_here
        if nested_here:
            n_nested_sentences += 1
    return CorpusStats(
        sentences=n_sentences,
        nested_sentence_pct=100.0 * n_nested_sentences / n_sentences if n_sentences else 0.0,
        entities=n_entities,
        nested_entity_pct=100.0 * n_nested_entities / n_entities if n_entities else 0.0,
        avg_entity_len=total_len / n_entities if n_entities else 0.0,
        max_entity_len=max_len,
    )
