"""Shared fixtures and generators for the test suite."""

from __future__ import annotations

import random
from collections import Counter
from pathlib import Path

import numpy as np
import pytest

from mdd import (
    AttributeId,
    LevelDomain,
    MetricKind,
    Relation,
    StatDistribution,
    ThresholdPattern,
)
from mdd.distribution import array_fingerprint

DATA_DIR = Path(__file__).parent / "data"

CONTACT_COLUMNS = ["SIN", "Name", "CC", "ZIP", "City", "Street"]
CONTACT_ROWS = [
    ("584", "Claire Green", "44", "606", "Chicago", "No.2, Central Rd."),
    ("584", "Claire Greem", "44", "606", "Chicago", "No.2, Central Rd."),
    ("584", "Claire Gree", "44", "606", "Chicago", "#2, Central Rd."),
    ("265", "Jason Smith", "01", "021", "Boston", "No.3, Central Rd."),
    ("265", "J. Smith", "01", "021", "Boston", "#3, Central Rd."),
    ("939", "W. J. Smith", "01", "021", "Chicago", "#3, Central Rd."),
]


@pytest.fixture
def contacts() -> Relation:
    return Relation.from_rows(CONTACT_COLUMNS, CONTACT_ROWS)


@pytest.fixture
def domain10() -> LevelDomain:
    return LevelDomain(10)


@pytest.fixture
def cosine_word() -> MetricKind:
    return MetricKind.cosine_word_tokens()


def make_distribution(
    vectors_counts: dict[tuple[int, ...], int],
    d: int,
    names: list[str] | None = None,
    pair_total: int | None = None,
) -> StatDistribution:
    """Assemble a distribution straight from level-vector counts."""
    m = len(next(iter(vectors_counts)))
    attrs = tuple(
        AttributeId(i, names[i] if names else f"A{i}") for i in range(m)
    )
    vecs = sorted(vectors_counts)
    levels = np.array(vecs, dtype=np.int16).reshape(len(vecs), m)
    counts = np.array([vectors_counts[v] for v in vecs], dtype=np.int64)
    total = int(counts.sum())
    domain = LevelDomain(d)
    return StatDistribution(
        attrs,
        domain,
        levels,
        counts,
        total if pair_total is None else pair_total,
        array_fingerprint(levels, counts, domain),
        metric_specs=("synthetic",) * m,
    )


def random_distribution(
    rng: random.Random,
    *,
    m_x: int,
    m_y: int = 1,
    d: int = 4,
    max_samples: int = 400,
    max_count: int = 20,
    skew: bool = True,
) -> tuple[StatDistribution, tuple[AttributeId, ...], tuple[AttributeId, ...]]:
    """A random aggregated distribution plus its lhs/rhs attribute split.

    Level vectors are biased toward low levels when ``skew`` is set, which is
    the shape real pairwise similarity data takes (most pairs dissimilar).
    """
    m = m_x + m_y
    counter: Counter = Counter()
    for _ in range(rng.randint(max(10, m), max_samples)):
        if skew:
            vec = tuple(min(rng.randint(0, d - 1), rng.randint(0, d - 1)) for _ in range(m))
        else:
            vec = tuple(rng.randint(0, d - 1) for _ in range(m))
        counter[vec] += rng.randint(1, max_count)
    dist = make_distribution(dict(counter), d)
    attrs = dist.attribute_set
    return dist, attrs[:m_x], attrs[m_x:]


def random_relation(
    rng: random.Random,
    *,
    n_rows: int,
    n_attrs: int,
) -> Relation:
    """Small random string relation with repeated and perturbed values so the
    similarity structure is nontrivial."""
    if vocab is None:
        vocab = ["alpha", "beta", "gamma", "delta", "omega", "route 9", "route 66"]
    rows = []
    for _ in range(n_rows):
        row = []
        for _ in range(n_attrs):
            base = rng.choice(vocab)
            if rng.random() < 0.4:
                # small perturbations: drop a char, duplicate a char, add a suffix
                edit = rng.randrange(3)
                if edit == 0 and len(base) > 1:
                    pos = rng.randrange(len(base))
                    base = base[:pos] + base[pos + 1 :]
                elif edit == 1:
                    pos = rng.randrange(len(base))
                    base = base[:pos] + base[pos] + base[pos:]
                else:
                    base = base + rng.choice([" x", "s", " jr"])
            row.append(base)
        rows.append(row)
    return Relation.from_rows([f"A{i}" for i in range(n_attrs)], rows)


def pattern_over(attrs, levels) -> ThresholdPattern:
    return ThresholdPattern.over(tuple(attrs), list(levels))
