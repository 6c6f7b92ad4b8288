"""Core domain types: relations, level domains, statistical distributions,
threshold patterns, and discovery requests/results.

All types are immutable after construction and safe to share across workers.
Probabilities are kept as exact integer counts over a pair-total denominator;
real-valued probabilities are derived on demand, so aggregate arithmetic stays
bit-stable.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

from .errors import (
    SchemaMismatchError,
    ValidationError,
)

RationalLike = Union[int, float, str, Fraction]


def to_fraction(value: RationalLike, name: str = "value") -> Fraction:
    """Canonical exact rational for a threshold-like quantity.

    Floats are read through their shortest repr, so ``0.15`` means 3/20 and
    not the binary expansion of the double. Strings accept both decimal
    ("0.15") and ratio ("3/20") forms.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ValidationError(f"{name} must be a number, got a bool")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if value != value or value in (float("inf"), float("-inf")):
            raise ValidationError(f"{name} must be finite, got {value!r}")
        return Fraction(str(value))
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError(f"{name} is not a valid rational: {value!r}") from exc
    raise ValidationError(f"{name} must be a number, got {type(value).__name__}")


# ---------------------------------------------------------------------------
# Schema and relation
# ---------------------------------------------------------------------------


@dataclass(frozen=True, order=True)
class AttributeId:
    """A named attribute at a fixed ordinal position within a schema."""

    index: int
    name: str

    def __post_init__(self) -> None:
        if self.index < 0:
            raise ValidationError(f"attribute index must be >= 0, got {self.index}")
        if not self.name:
            raise ValidationError("attribute name must be nonempty")


@dataclass(frozen=True)
class Relation:
    """An in-memory table of string values over a fixed schema."""

    schema: tuple[AttributeId, ...]
    rows: tuple[tuple[str, ...], ...]

    def __post_init__(self) -> None:
        if not self.schema:
            raise ValidationError("relation schema must be nonempty")
        indices = [a.index for a in self.schema]
        if indices != list(range(len(self.schema))):
            raise ValidationError("schema indices must be 0..M-1 in order")
        names = [a.name for a in self.schema]
        if len(set(names)) != len(names):
            raise ValidationError("schema attribute names must be unique")
        width = len(self.schema)
        for i, row in enumerate(self.rows):
            if len(row) != width:
                raise ValidationError(
                    f"row {i} has {len(row)} values, schema has {width} attributes"
                )

    @classmethod
    def from_rows(cls, names: Sequence[str], rows: Iterable[Sequence[str]]) -> "Relation":
        schema = tuple(AttributeId(i, n) for i, n in enumerate(names))
        return cls(schema, tuple(tuple(str(v) for v in row) for row in rows))

    @property
    def tuple_count(self) -> int:
        return len(self.rows)

    def attribute(self, name: str) -> AttributeId:
        for a in self.schema:
            if a.name == name:
                return a
        raise SchemaMismatchError(f"unknown attribute {name!r}")

    def column(self, attr: AttributeId) -> tuple[str, ...]:
        if attr.index >= len(self.schema) or self.schema[attr.index] != attr:
            raise SchemaMismatchError(f"attribute {attr} not in schema")
        return tuple(row[attr.index] for row in self.rows)


@dataclass(frozen=True)
class LevelDomain:
    """Discrete similarity levels 0..d-1 shared by every attribute."""

    d: int

    def __post_init__(self) -> None:
        if self.d < 2:
            raise ValidationError(f"level domain needs d >= 2, got {self.d}")

    @property
    def max_level(self) -> int:
        return self.d - 1

    def levels(self) -> range:
        return range(self.d)

    def check_level(self, level: int, name: str = "level") -> int:
        if not isinstance(level, (int, np.integer)) or isinstance(level, bool):
            raise ValidationError(f"{name} must be an integer, got {level!r}")
        if not 0 <= level <= self.d - 1:
            raise ValidationError(f"{name} must be in 0..{self.d - 1}, got {level}")
        return int(level)


# ---------------------------------------------------------------------------
# Threshold patterns
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ThresholdPattern:
    """Per-attribute minimum similarity levels.

    Entries are kept sorted by attribute index, so equal patterns compare and
    hash equal regardless of construction order.
    """

    entries: tuple[tuple[AttributeId, int], ...]

    def __post_init__(self) -> None:
        seen = set()
        for attr, level in self.entries:
            if not isinstance(attr, AttributeId):
                raise ValidationError("pattern keys must be AttributeId")
            if not isinstance(level, (int, np.integer)) or isinstance(level, bool):
                raise ValidationError(f"threshold for {attr.name} must be an integer")
            if level < 0:
                raise ValidationError(f"threshold for {attr.name} must be >= 0")
            if attr in seen:
                raise ValidationError(f"duplicate attribute {attr.name} in pattern")
            seen.add(attr)
        object.__setattr__(
            self,
            "entries",
            tuple(sorted(((a, int(l)) for a, l in self.entries), key=lambda e: e[0].index)),
        )

    @classmethod
    def of(cls, thresholds: Mapping[AttributeId, int]) -> "ThresholdPattern":
        return cls(tuple(thresholds.items()))

    @classmethod
    def over(cls, attrs: Sequence[AttributeId], levels: Sequence[int]) -> "ThresholdPattern":
        if len(attrs) != len(levels):
            raise ValidationError("attribute and level sequences differ in length")
        return cls(tuple(zip(attrs, levels)))

    @property
    def attributes(self) -> tuple[AttributeId, ...]:
        return tuple(a for a, _ in self.entries)

    def level_of(self, attr: AttributeId) -> int:
        for a, l in self.entries:
            if a == attr:
                return l
        raise SchemaMismatchError(f"attribute {attr.name} not in pattern")

    def get(self, attr: AttributeId, default: int = 0) -> int:
        for a, l in self.entries:
            if a == attr:
                return l
        return default

    def items(self) -> tuple[tuple[AttributeId, int], ...]:
        return self.entries

    def as_dict(self) -> dict[AttributeId, int]:
        return dict(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, attr: AttributeId) -> bool:
        return any(a == attr for a, _ in self.entries)


def strip_zero_levels(pattern: ThresholdPattern) -> ThresholdPattern:
    """Drop zero thresholds; a zero level is satisfied by every record, so the
    satisfaction semantics are unchanged."""
    return ThresholdPattern(tuple((a, l) for a, l in pattern.entries if l > 0))


# ---------------------------------------------------------------------------
# Statistical tuples and distributions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StatTuple:
    """One aggregated record of a statistical distribution: a level vector
    plus how many tuple pairs landed on it."""

    attributes: tuple[AttributeId, ...]
    levels: tuple[int, ...]
    count: int
    pair_total: int

    def __post_init__(self) -> None:
        if len(self.levels) != len(self.attributes):
            raise ValidationError("level vector length differs from attribute set")
        if self.count < 0 or self.pair_total <= 0 or self.count > self.pair_total:
            raise ValidationError("need 0 <= count <= pair_total and pair_total > 0")

    @property
    def probability(self) -> Fraction:
        return Fraction(self.count, self.pair_total)

    def level_of(self, attr: AttributeId) -> int:
        try:
            pos = self.attributes.index(attr)
        except ValueError:
            raise SchemaMismatchError(
                f"attribute {attr.name} not in this distribution's attribute set"
            ) from None
        return self.levels[pos]


def satisfies(record: StatTuple, pattern: ThresholdPattern) -> bool:
    """True iff the record's level meets or exceeds the pattern's threshold on
    every pattern attribute."""
    return all(record.level_of(attr) >= level for attr, level in pattern.items())


class StatDistribution:
    """Aggregated pairwise similarity levels with exact counts.

    Rows of ``levels`` are unique level vectors over ``attribute_set``;
    ``counts`` gives how many of the ``pair_total`` tuple pairs fell on each.
    Record order is meaningful: algorithms consume grouped or sorted variants
    produced by the reordering operations, which tag the instance via
    ``rhs_group`` / ``probability_sorted``.
    """

    __slots__ = (
        "attribute_set",
        "domain",
        "levels",
        "counts",
        "pair_total",
        "fingerprint",
        "metric_specs",
        "rhs_group",
        "probability_sorted",
        "__dict__",
    )

    def __init__(
        self,
        attribute_set: Sequence[AttributeId],
        domain: LevelDomain,
        levels: np.ndarray,
        counts: np.ndarray,
        pair_total: int,
        fingerprint: str,
        metric_specs: Sequence[str] = (),
        rhs_group: tuple[ThresholdPattern, int] | None = None,
        probability_sorted: bool = False,
    ) -> None:
        attribute_set = tuple(attribute_set)
        if not attribute_set:
            raise ValidationError("distribution needs a nonempty attribute set")
        if len(set(attribute_set)) != len(attribute_set):
            raise ValidationError("duplicate attributes in attribute set")
        # own private copies: the write-protection below must not leak onto
        # caller-held arrays
        levels = np.array(levels, dtype=np.int16, order="C", copy=True)
        counts = np.array(counts, dtype=np.int64, order="C", copy=True)
        if levels.ndim != 2 or levels.shape[1] != len(attribute_set):
            raise ValidationError("levels must be an (n, m) array over the attribute set")
        if counts.shape != (levels.shape[0],):
            raise ValidationError("counts must align with levels rows")
        if levels.size and (levels.min() < 0 or levels.max() > domain.max_level):
            raise ValidationError(f"levels must lie in 0..{domain.max_level}")
        if counts.size and counts.min() <= 0:
            raise ValidationError("record counts must be positive")
        if pair_total <= 0:
            raise ValidationError("pair_total must be positive")
        if int(counts.sum()) != pair_total:
            raise ValidationError("record counts must sum to pair_total")
        if np.unique(levels, axis=0).shape[0] != levels.shape[0]:
            raise ValidationError("level vectors must be unique across records")
        if metric_specs and len(metric_specs) != len(attribute_set):
            raise ValidationError("metric_specs must align with the attribute set")

        levels.setflags(write=False)
        counts.setflags(write=False)
        self.attribute_set = attribute_set
        self.domain = domain
        self.levels = levels
        self.counts = counts
        self.pair_total = int(pair_total)
        self.fingerprint = fingerprint
        self.metric_specs = tuple(metric_specs)
        self.rhs_group = rhs_group
        self.probability_sorted = bool(probability_sorted)

    @property
    def n(self) -> int:
        return self.levels.shape[0]

    @cached_property
    def _column_of(self) -> dict[AttributeId, int]:
        return {a: i for i, a in enumerate(self.attribute_set)}

    def column_index(self, attr: AttributeId) -> int:
        try:
            return self._column_of[attr]
        except KeyError:
            raise SchemaMismatchError(
                f"attribute {attr.name} not in this distribution's attribute set"
            ) from None

    def record_at(self, i: int) -> StatTuple:
        return StatTuple(
            self.attribute_set,
            tuple(int(v) for v in self.levels[i]),
            int(self.counts[i]),
            self.pair_total,
        )

    @cached_property
    def records(self) -> tuple[StatTuple, ...]:
        return tuple(self.record_at(i) for i in range(self.n))

    def total_probability(self) -> Fraction:
        return Fraction(int(self.counts.sum()), self.pair_total)

    def replace_order(
        self,
        order: np.ndarray,
        rhs_group: tuple[ThresholdPattern, int] | None = None,
        probability_sorted: bool = False,
    ) -> "StatDistribution":
        """New distribution with permuted records; markers are reset to the
        ones describing the new order."""
        return StatDistribution(
            self.attribute_set,
            self.domain,
            self.levels[order],
            self.counts[order],
            self.pair_total,
            self.fingerprint,
            self.metric_specs,
            rhs_group=rhs_group,
            probability_sorted=probability_sorted,
        )

    def __eq__(self, other: object) -> bool:
        # Reordering markers are transient provenance and excluded on purpose.
        if not isinstance(other, StatDistribution):
            return NotImplemented
        return (
            self.attribute_set == other.attribute_set
            and self.domain == other.domain
            and self.pair_total == other.pair_total
            and self.fingerprint == other.fingerprint
            and self.metric_specs == other.metric_specs
            and np.array_equal(self.levels, other.levels)
            and np.array_equal(self.counts, other.counts)
        )

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        names = ",".join(a.name for a in self.attribute_set)
        return (
            f"StatDistribution(n={self.n}, attrs=[{names}], d={self.domain.d}, "
            f"pairs={self.pair_total})"
        )


# ---------------------------------------------------------------------------
# Discovery requests and results
# ---------------------------------------------------------------------------


class Algorithm(str, Enum):
    EA = "ea"
    EPS = "eps"
    EPSC = "epsc"
    AP = "ap"
    API = "api"
    APS = "aps"
    APSI = "apsi"

    @classmethod
    def parse(cls, name: str) -> "Algorithm":
        try:
            return cls(name.strip().lower())
        except ValueError:
            valid = ", ".join(a.value for a in cls)
            raise ValidationError(f"unknown algorithm {name!r}; expected one of {valid}") from None

    @property
    def is_approximate(self) -> bool:
        return self in (Algorithm.AP, Algorithm.API, Algorithm.APS, Algorithm.APSI)


@dataclass(frozen=True)
class EvaluationMode:
    """Whether reported measures are exact or prefix approximations."""

    kind: str
    prefix_k: int | None = None
    epsilon: Fraction | None = None

    @classmethod
    def exact(cls) -> "EvaluationMode":
        return cls("exact")

    @classmethod
    def approximate(cls, prefix_k: int, epsilon: Fraction) -> "EvaluationMode":
        return cls("approximate", prefix_k, epsilon)

    @property
    def is_exact(self) -> bool:
        return self.kind == "exact"


@dataclass
class EvalCounters:
    """Work counters for one discovery run.

    ``records_evaluated`` counts statistical-tuple evaluations as performed by
    the sequential formulation of each algorithm (the vectorized engine
    reproduces those numbers, not its own op counts).
    ``candidates_pruned_support`` counts candidates skipped via dominance,
    ``candidates_pruned_confidence`` counts candidates rejected by an early
    confidence drop (those were partially evaluated).
    """

    records_evaluated: int = 0
    candidates_evaluated: int = 0
    candidates_pruned_support: int = 0
    candidates_pruned_confidence: int = 0
    candidates_total: int = 0


@dataclass(frozen=True)
class DiscoveredMd:
    """A validated rule: LHS pattern (zero levels removed), the fixed RHS
    pattern, and the measures under which it qualified."""

    lhs_pattern: ThresholdPattern
    rhs_pattern: ThresholdPattern
    support: Fraction
    confidence: Fraction
    mode: EvaluationMode
    counters: EvalCounters

    def __post_init__(self) -> None:
        if any(l == 0 for _, l in self.lhs_pattern.items()):
            raise ValidationError("lhs_pattern must not carry zero thresholds")


@dataclass(frozen=True)
class DiscoveryRequest:
    """Inputs of one discovery run over a fixed lhs -> rhs attribute split."""

    lhs: tuple[AttributeId, ...]
    rhs: tuple[AttributeId, ...]
    rhs_pattern: ThresholdPattern
    min_support: Fraction
    min_confidence: Fraction
    algorithm: Algorithm
    epsilon: Fraction | None = None

    @classmethod
    def build(
        cls,
        lhs: Sequence[AttributeId],
        rhs: Sequence[AttributeId],
        rhs_pattern: ThresholdPattern,
        min_support: RationalLike,
        min_confidence: RationalLike,
        algorithm: Algorithm | str,
        epsilon: RationalLike | None = None,
    ) -> "DiscoveryRequest":
        algo = algorithm if isinstance(algorithm, Algorithm) else Algorithm.parse(str(algorithm))
        req = cls(
            tuple(lhs),
            tuple(rhs),
            rhs_pattern,
            to_fraction(min_support, "min_support"),
            to_fraction(min_confidence, "min_confidence"),
            algo,
            None if epsilon is None else to_fraction(epsilon, "epsilon"),
        )
        req.validate()
        return req

    def validate(self) -> None:
        if not self.lhs:
            raise ValidationError("lhs attribute set must be nonempty")
        if not self.rhs:
            raise ValidationError("rhs attribute set must be nonempty")
        if len(set(self.lhs)) != len(self.lhs) or len(set(self.rhs)) != len(self.rhs):
            raise ValidationError("duplicate attributes in lhs or rhs")
        if set(self.lhs) & set(self.rhs):
            raise ValidationError("lhs and rhs attribute sets must be disjoint")
        if set(self.rhs_pattern.attributes) != set(self.rhs):
            raise SchemaMismatchError("rhs_pattern must cover exactly the rhs attributes")
        # Confidence is undefined with zero support mass, and the approximation
        # bound divides by min_support, so zero is rejected outright.
        if not 0 < self.min_support <= 1:
            raise ValidationError("min_support must lie in (0, 1]")
        if not 0 < self.min_confidence <= 1:
            raise ValidationError("min_confidence must lie in (0, 1]")
        if self.algorithm.is_approximate:
            if self.epsilon is None:
                raise ValidationError(
                    f"algorithm {self.algorithm.value} requires an epsilon error bound"
                )
        if self.epsilon is not None:
            if not 0 < self.epsilon < 1 - self.min_confidence:
                raise ValidationError(
                    "epsilon must satisfy 0 < epsilon < 1 - min_confidence "
                    f"(got {self.epsilon} with min_confidence {self.min_confidence})"
                )
