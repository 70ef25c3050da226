import numpy as np
import pytest

from nff.spans import AnnotatedSentence, Entity, Span

LABELS = ["PER", "ORG", "LOC", "MISC"]


def random_sentence(rng, max_len=12, max_entities=4, sent_id=""):
    """Random sentence with up to ``max_entities`` random (possibly nested or
    overlapping) entities."""
    n = int(rng.integers(1, max_len + 1))
    tokens = tuple(f"w{int(rng.integers(50))}" for _ in range(n))
    entities = set()
    for _ in range(int(rng.integers(0, max_entities + 1))):
        start = int(rng.integers(0, n))
        end = int(rng.integers(start, n))
        label = LABELS[int(rng.integers(len(LABELS)))]
        entities.add(Entity(Span(start, end), label))
    return AnnotatedSentence(
        tokens=tokens, entities=frozenset(entities), sent_id=sent_id or f"s{int(rng.integers(1 << 30))}"
    )


@pytest.fixture
def figure1_sentence():
    tokens = tuple("Mr. John Smith graduated from New York University last year".split())
    return AnnotatedSentence(
        tokens=tokens,
        entities=frozenset({Entity(Span(1, 2), "PER"), Entity(Span(5, 7), "ORG")}),
        sent_id="fig1",
    )


@pytest.fixture
def figure1_nested(figure1_sentence):
    return AnnotatedSentence(
        tokens=figure1_sentence.tokens,
        entities=frozenset(figure1_sentence.entities | {Entity(Span(5, 6), "LOC")}),
        sent_id="fig1",
    )
