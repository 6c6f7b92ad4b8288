"""Candidate threshold patterns in dominance-respecting order.

A pattern dominates another when it is componentwise lower or equal; lower
patterns are satisfied by at least the records of higher ones, so they are
enumerated first (layers of nondecreasing level sum, lexicographic within a
layer). The dominance graph is never materialized: pruning keeps a minimal
antichain of failed patterns and checks each upcoming candidate against it.
"""

from __future__ import annotations

import itertools
from typing import Iterator, Sequence

from .errors import CandidateBudgetError, ContractViolationError, SchemaMismatchError, ValidationError
from .model import AttributeId, LevelDomain, ThresholdPattern

DEFAULT_CANDIDATE_BUDGET = 10_000_000


def dominates(first: ThresholdPattern, second: ThresholdPattern) -> bool:
    """Componentwise <= over the shared attribute set."""
    if first.attributes != second.attributes:
        raise SchemaMismatchError("dominance needs patterns over the same attribute set")
    return all(l1 <= second.level_of(a) for a, l1 in first.items())


def _layer(m: int, max_level: int, total: int) -> Iterator[tuple[int, ...]]:
    """All m-tuples with entries in 0..max_level summing to total, lexicographic."""
    if m == 1:
        if 0 <= total <= max_level:
            yield (total,)
        return
    lo = max(0, total - (m - 1) * max_level)
    hi = min(max_level, total)
    for first in range(lo, hi + 1):
        for rest in _layer(m - 1, max_level, total - first):
            yield (first,) + rest


def _level_tuples(m: int, max_level: int) -> Iterator[tuple[int, ...]]:
    for total in range(m * max_level + 1):
        yield from _layer(m, max_level, total)


class CandidateLattice:
    """The candidate set dom(X) for one discovery run.

    Iteration yields every one of the d^m patterns unless dominance pruning
    removed it first. Instances are single-use: pruning state accumulates, so
    a second scan would silently skip candidates. Create a fresh lattice per
    run.
    """

    def __init__(
        self,
        attributes: Sequence[AttributeId],
        domain: LevelDomain,
        candidate_budget: int = DEFAULT_CANDIDATE_BUDGET,
    ) -> None:
        attributes = tuple(attributes)
        if not attributes:
            raise ValidationError("candidate lattice needs at least one attribute")
        if len(set(attributes)) != len(attributes):
            raise ValidationError("duplicate attributes in lattice")
        count = domain.d ** len(attributes)
        if count > candidate_budget:
            raise CandidateBudgetError(
                f"candidate space d^m = {domain.d}^{len(attributes)} = {count} exceeds "
                f"the budget of {candidate_budget}; reduce the level count d or the "
                "number of lhs attributes, or raise --candidate-budget"
            )
        self.attributes = attributes
        self.domain = domain
        self.candidate_count = count
        self._failed: list[tuple[int, ...]] = []
        self._scanning = False

    def pattern(self, levels: Sequence[int]) -> ThresholdPattern:
        return ThresholdPattern.over(self.attributes, tuple(levels))

    def is_pruned(self, levels: tuple[int, ...]) -> bool:
        for failed in self._failed:
            if all(f <= l for f, l in zip(failed, levels)):
                return True
        return False

    def record_failure(self, levels: tuple[int, ...]) -> None:
        """Register a fully evaluated pattern that missed the support minimum.

        Patterns already dominated by a recorded failure are redundant and are
        not stored, keeping the comparison list an antichain.
        """
        levels = tuple(int(v) for v in levels)
        if not self.is_pruned(levels):
            self._failed.append(levels)

    def iter_levels(self, *, skip_pruned: bool = False) -> Iterator[tuple[int, ...]]:
        """Raw level tuples in dominance order (the fast path for algorithms)."""
        if self._scanning:
            raise ContractViolationError(
                "lattice already scanned once; create a fresh CandidateLattice per run"
            )
        self._scanning = True
        for levels in _level_tuples(len(self.attributes), self.domain.max_level):
            if skip_pruned and self.is_pruned(levels):
                continue
            yield levels

    def __iter__(self) -> Iterator[ThresholdPattern]:
        return (self.pattern(levels) for levels in self.iter_levels())

    def prune_dominated_by(self, pattern: ThresholdPattern) -> int:
        """Mark every candidate strictly dominated by ``pattern`` as pruned and
        return how many were newly marked.

        Strict dominatees have a larger level sum, so none of them can have
        been yielded yet. Counting enumerates the upper set of the pattern,
        which is fine at desk scale; the discovery algorithms use
        ``record_failure`` and derive pruned totals arithmetically instead.
        """
        if pattern.attributes != self.attributes:
            raise SchemaMismatchError("pattern is not over this lattice's attributes")
        levels = tuple(pattern.level_of(a) for a in self.attributes)
        for level in levels:
            self.domain.check_level(level)
        newly = 0
        for candidate in itertools.product(
            *(range(l, self.domain.d) for l in levels)
        ):
            if candidate == levels:
                continue
            if not self.is_pruned(candidate):
                newly += 1
        self.record_failure(levels)
        return newly


def enumerate_in_dominance_order(
    attributes: Sequence[AttributeId],
    domain: LevelDomain,
    candidate_budget: int = DEFAULT_CANDIDATE_BUDGET,
) -> Iterator[ThresholdPattern]:
    """All of dom(X) in the lattice's dominance-respecting order."""
    lattice = CandidateLattice(attributes, domain, candidate_budget)
    return iter(lattice)
