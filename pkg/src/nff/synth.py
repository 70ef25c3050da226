"""Deterministic synthetic nested-NER corpus.

Sentences are built from three mention templates over bundled word pools:

* ``<City> <OrgSuffix>`` labeled ORG with the city labeled LOC nested inside
  (the only source of nesting, planted with the configured probability);
* ``<First> <Last>`` labeled PER, whose name parts are never entities;
* standalone ``<City>`` labeled LOC, so the city -> LOC pattern is learnable
  from flat supervision alone.

All splits are emitted with full nested gold; flatten with
:func:`nff.spans.flatten_dataset` to obtain the flat-supervision condition.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .corpus import Corpus
from .spans import AnnotatedSentence, Entity, Span

FIRST_NAMES = [
    "John", "Mary", "James", "Linda", "Robert", "Susan", "Michael", "Karen",
    "David", "Nancy", "Richard", "Betty", "Thomas", "Helen", "Charles",
    "Sandra", "Daniel", "Donna", "Matthew", "Carol", "Anthony", "Ruth",
    "Mark", "Sharon", "Paul", "Laura", "Steven", "Sarah", "Andrew", "Deborah",
    "Kenneth", "Jessica", "George", "Shirley", "Joshua", "Cynthia", "Kevin",
    "Angela", "Brian", "Melissa", "Edward", "Brenda", "Ronald", "Amy",
    "Timothy", "Anna", "Jason", "Rebecca",
]

LAST_NAMES = [
    "Smith", "Johnson", "Williams", "Brown", "Jones", "Garcia", "Miller",
    "Davis", "Rodriguez", "Martinez", "Hernandez", "Lopez", "Gonzalez",
    "Wilson", "Anderson", "Taylor", "Moore", "Jackson", "Martin", "Lee",
    "Perez", "Thompson", "White", "Harris", "Sanchez", "Clark", "Ramirez",
    "Lewis", "Robinson", "Walker", "Young", "Allen", "King", "Wright",
    "Scott", "Torres", "Nguyen", "Hill", "Flores", "Green", "Adams",
    "Nelson", "Baker", "Hall", "Rivera", "Campbell", "Mitchell", "Carter",
]

CITIES = [
    "Boston", "Chicago", "Denver", "Houston", "Seattle", "Atlanta", "Dallas",
    "Portland", "Phoenix", "Detroit", "Memphis", "Nashville", "Baltimore",
    "Milwaukee", "Albuquerque", "Tucson", "Fresno", "Sacramento", "Omaha",
    "Raleigh", "Miami", "Oakland", "Minneapolis", "Tulsa", "Cleveland",
    "Wichita", "Arlington", "Tampa", "Honolulu", "Anaheim", "Pittsburgh",
    "Cincinnati", "Toledo", "Orlando", "Durham", "Lubbock", "Irvine",
    "Glendale", "Reno", "Richmond", "Spokane", "Fremont", "Tacoma",
    "Columbus", "Lincoln", "Madison", "Norfolk", "Laredo",
]

ORG_SUFFIXES = [
    "University", "Corporation", "Bank", "Airlines", "Institute", "Museum",
    "Hospital", "Tribune",
]

FILLERS = [
    "the", "a", "an", "of", "in", "on", "at", "to", "from", "with", "by",
    "for", "and", "but", "or", "after", "before", "during", "while", "said",
    "told", "visited", "joined", "left", "met", "saw", "reported", "opened",
    "closed", "moved", "arrived", "returned", "spoke", "wrote", "announced",
    "yesterday", "today", "tomorrow", "recently", "quietly", "again",
    "near", "around", "inside", "outside", "toward", "against", "about",
    "new", "old", "former", "local", "early", "late", "last", "next",
    "week", "year", "month", "morning", "evening",
]

LABELS = ["PER", "ORG", "LOC"]


@dataclass
class SynthConfig:
    """Generator configuration; all randomness flows from ``seed``."""

    seed: int = 0
    train_sentences: int = 2000
    dev_sentences: int = 300
    test_sentences: int = 300
    nesting_prob: float = 0.5
    first_names: int = len(FIRST_NAMES)
    last_names: int = len(LAST_NAMES)
    cities: int = len(CITIES)
    org_suffixes: int = len(ORG_SUFFIXES)
    fillers: int = len(FILLERS)

    def __post_init__(self):
        if not 0.0 <= self.nesting_prob <= 1.0:
            raise ValueError(f"nesting_prob must be in [0, 1], got {self.nesting_prob}")
        for name, count, pool in [
            ("train_sentences", self.train_sentences, None),
            ("dev_sentences", self.dev_sentences, None),
            ("test_sentences", self.test_sentences, None),
            ("first_names", self.first_names, FIRST_NAMES),
            ("last_names", self.last_names, LAST_NAMES),
            ("cities", self.cities, CITIES),
            ("org_suffixes", self.org_suffixes, ORG_SUFFIXES),
            ("fillers", self.fillers, FILLERS),
        ]:
            if count < 1:
                raise ValueError(f"{name} must be >= 1, got {count}")
            if pool is not None and count > len(pool):
                raise ValueError(
                    f"{name}={count} exceeds the bundled vocabulary of {len(pool)} words"
                )


def _pick(rng: np.random.Generator, pool: list[str]) -> str:
    return pool[int(rng.integers(len(pool)))]


def _make_sentence(
    rng: np.random.Generator, pools: dict[str, list[str]], nesting_prob: float,
    sent_id: str,
) -> tuple[AnnotatedSentence, int]:
    """Build one sentence; returns it plus its planted nested-entity count."""
    segments: list[tuple[list[str], list[tuple[int, int, str]]]] = []

    nested = rng.random() < nesting_prob
    if nested:
        city = _pick(rng, pools["cities"])
        suffix = _pick(rng, pools["org_suffixes"])
        segments.append(([city, suffix], [(0, 1, "ORG"), (0, 0, "LOC")]))
    if rng.random() < 0.7:
        first = _pick(rng, pools["first_names"])
        last = _pick(rng, pools["last_names"])
        segments.append(([first, last], [(0, 1, "PER")]))
    if rng.random() < 0.6 or not segments:
        segments.append(([_pick(rng, pools["cities"])], [(0, 0, "LOC")]))
    order = rng.permutation(len(segments))

    tokens: list[str] = []
    entities: set[Entity] = set()
    fillers = pools["fillers"]

    def emit_fillers(low, high):
        for _ in range(int(rng.integers(low, high + 1))):
            tokens.append(_pick(rng, fillers))

    emit_fillers(0, 2)
    for k in order:
        seg_tokens, seg_entities = segments[int(k)]
        offset = len(tokens)
        tokens.extend(seg_tokens)
        for start, end, label in seg_entities:
            entities.add(Entity(Span(offset + start, offset + end), label))
        emit_fillers(1, 2)

    sentence = AnnotatedSentence(
        tokens=tuple(tokens), entities=frozenset(entities), sent_id=sent_id
    )
    return sentence, 1 if nested else 0


def generate_synth(config: SynthConfig) -> Corpus:
    """Generate a deterministic nested corpus with train/dev/test splits.

    The returned corpus carries nested gold in every split; ground-truth
    planted counts are recorded in ``corpus.meta`` under
    ``nested_entities`` and ``nested_sentences`` (per split).
    """
    pools = {
        "first_names": FIRST_NAMES[: config.first_names],
        "last_names": LAST_NAMES[: config.last_names],
        "cities": CITIES[: config.cities],
        "org_suffixes": ORG_SUFFIXES[: config.org_suffixes],
        "fillers": FILLERS[: config.fillers],
    }
    sizes = {
        "train": config.train_sentences,
        "dev": config.dev_sentences,
        "test": config.test_sentences,
    }
    splits: dict[str, list[AnnotatedSentence]] = {}
    nested_entities: dict[str, int] = {}
    nested_sentences: dict[str, int] = {}
    for split_idx, (name, count) in enumerate(sizes.items()):
        # One stream per split so resizing one split leaves the others intact.
        rng = np.random.default_rng([config.seed, split_idx])
        sentences = []
        planted = 0
        for i in range(count):
            sent, n_nested = _make_sentence(
                rng, pools, config.nesting_prob, sent_id=f"{name}-{i}"
            )
            sentences.append(sent)
            planted += n_nested
        splits[name] = sentences
        nested_entities[name] = planted
        nested_sentences[name] = planted  # one nested entity per nested sentence
    return Corpus(
        splits=splits,
        labels=list(LABELS),
        meta={"nested_entities": nested_entities, "nested_sentences": nested_sentences},
    )
