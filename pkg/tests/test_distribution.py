"""Distribution construction, reorderings, projection, and the cache format."""

import random
from fractions import Fraction

import numpy as np
import pytest

from mdd import (
    DistributionIOError,
    InsufficientDataError,
    LevelDomain,
    MetricKind,
    Relation,
    StatDistribution,
    ThresholdPattern,
    ValidationError,
    build_distribution,
    group_by_rhs,
    load_distribution,
    pattern_mask,
    project,
    satisfies,
    save_distribution,
    sort_by_probability_desc,
)
from mdd.errors import SchemaMismatchError

from conftest import make_distribution, random_distribution


class TestBuild:
    def test_contacts_pair_total(self, contacts, domain10, cosine_word):
        attrs = (contacts.attribute("ZIP"), contacts.attribute("City"))
        dist = build_distribution(contacts, attrs, cosine_word, domain10)
        assert dist.pair_total == 15
        assert int(dist.counts.sum()) == 15
        assert dist.total_probability() == 1

    def test_two_identical_tuples(self, domain10, cosine_word):
        rel = Relation.from_rows(["v"], [("same",), ("same",)])
        dist = build_distribution(rel, rel.schema, cosine_word, domain10)
        assert dist.n == 1
        assert tuple(dist.levels[0]) == (9,)
        assert dist.record_at(0).probability == 1

    def test_matches_brute_force_pair_walk(self, contacts, domain10, cosine_word):
        # independent enumeration of the 15 pairs, no engine code
        from collections import Counter
        from mdd.simkit import discretize, similarity

        attrs = (contacts.attribute("ZIP"), contacts.attribute("City"))
        expected = Counter()
        rows = contacts.rows
        for i in range(6):
            for j in range(i + 1, 6):
                expected[
                    tuple(
                        discretize(
                            similarity(rows[i][a.index], rows[j][a.index], cosine_word),
                            domain10,
                        )
                        for a in attrs
                    )
                ] += 1
        dist = build_distribution(contacts, attrs, cosine_word, domain10)
        actual = {tuple(int(v) for v in row): int(c) for row, c in zip(dist.levels, dist.counts)}
        assert actual == dict(expected)

    def test_single_row_rejected(self, domain10, cosine_word):
        rel = Relation.from_rows(["v"], [("solo",)])
        with pytest.raises(InsufficientDataError):
            build_distribution(rel, rel.schema, cosine_word, domain10)

    def test_unknown_attribute_rejected(self, contacts, domain10, cosine_word):
        from mdd import AttributeId

        with pytest.raises(SchemaMismatchError):
            build_distribution(contacts, (AttributeId(0, "Nope"),), cosine_word, domain10)

    def test_parallel_build_matches_serial(self, contacts, domain10, cosine_word):
        attrs = (contacts.attribute("Name"), contacts.attribute("City"))
        serial = build_distribution(contacts, attrs, cosine_word, domain10, workers=1)
        parallel = build_distribution(contacts, attrs, cosine_word, domain10, workers=4)
        assert serial == parallel

    def test_per_attribute_metrics(self, contacts, domain10):
        attrs = (contacts.attribute("Name"), contacts.attribute("City"))
        metrics = {
            attrs[0]: MetricKind.normalized_edit_distance(),
            attrs[1]: MetricKind.cosine_word_tokens(),
        }
        dist = build_distribution(contacts, attrs, metrics, domain10)
        assert dist.metric_specs == ("edit", "cosine-word")


class TestGroupByRhs:
    def _dist(self):
        return make_distribution(
            {(0, 9): 3, (1, 2): 2, (5, 8): 4, (2, 0): 5, (7, 7): 1},
            d=10,
        )

    def test_pivot_splits_satisfaction(self):
        dist = self._dist()
        lam_y = ThresholdPattern.of({dist.attribute_set[1]: 7})
        grouped, pivot = group_by_rhs(dist, lam_y)
        assert pivot == 3
        for i, rec in enumerate(grouped.records):
            assert satisfies(rec, lam_y) == (i < pivot)
        assert grouped.rhs_group == (lam_y, pivot)

    def test_all_satisfying_keeps_order(self):
        dist = self._dist()
        lam_y = ThresholdPattern.of({dist.attribute_set[1]: 0})
        grouped, pivot = group_by_rhs(dist, lam_y)
        assert pivot == dist.n
        assert np.array_equal(grouped.levels, dist.levels)

    def test_multiset_preserved(self):
        dist = self._dist()
        lam_y = ThresholdPattern.of({dist.attribute_set[1]: 5})
        grouped, _ = group_by_rhs(dist, lam_y)
        assert sorted(map(tuple, grouped.levels.tolist())) == sorted(
            map(tuple, dist.levels.tolist())
        )
        assert int(grouped.counts.sum()) == int(dist.counts.sum())


class TestSortByProbability:
    def test_counts_descend(self):
        dist = make_distribution({(0,): 3, (1,): 9, (2,): 1}, d=3)
        ordered = sort_by_probability_desc(dist)
        assert [int(c) for c in ordered.counts] == [9, 3, 1]
        assert ordered.probability_sorted

    def test_ties_break_lexicographically(self):
        dist = make_distribution({(2, 0): 5, (0, 1): 5, (1, 1): 5}, d=3)
        ordered = sort_by_probability_desc(dist)
        assert [tuple(map(int, r)) for r in ordered.levels] == [(0, 1), (1, 1), (2, 0)]

    def test_fraction_fragment(self):
        # probabilities 0.065, 0.043, 0.124 (plus filler) over 1000 pairs
        dist = make_distribution({(1,): 65, (7,): 43, (0,): 124, (3,): 768}, d=10)
        ordered = sort_by_probability_desc(dist)
        probs = [float(r.probability) for r in ordered.records]
        assert probs == [0.768, 0.124, 0.065, 0.043]


class TestPatternMask:
    def test_mask_agrees_with_satisfies(self):
        rng = random.Random(5)
        dist, X, Y = random_distribution(rng, m_x=2, m_y=1, d=5)
        lam = ThresholdPattern.of({X[0]: 2, Y[0]: 3})
        mask = pattern_mask(dist, lam)
        for i, rec in enumerate(dist.records):
            assert mask[i] == satisfies(rec, lam)

    def test_level_above_domain_rejected(self):
        dist = make_distribution({(0,): 1}, d=4)
        with pytest.raises(ValidationError):
            pattern_mask(dist, ThresholdPattern.of({dist.attribute_set[0]: 4}))


class TestProjection:
    def test_marginalizes_counts(self):
        dist = make_distribution({(0, 1): 3, (0, 2): 4, (1, 1): 5}, d=3)
        kept = project(dist, dist.attribute_set[:1])
        assert kept.pair_total == dist.pair_total
        by_level = {int(r.levels[0]): r.count for r in kept.records}
        assert by_level == {0: 7, 1: 5}


class TestCacheFile:
    def test_round_trip_structural_and_byte_identical(self, tmp_path, contacts, domain10, cosine_word):
        attrs = (contacts.attribute("Name"), contacts.attribute("City"))
        dist = build_distribution(contacts, attrs, cosine_word, domain10)
        p1, p2 = tmp_path / "a.dist", tmp_path / "b.dist"
        save_distribution(dist, p1)
        loaded = load_distribution(p1)
        assert loaded == dist
        assert [tuple(map(int, r)) for r in loaded.levels] == [
            tuple(map(int, r)) for r in dist.levels
        ]
        save_distribution(loaded, p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_round_trip_preserves_reordered_records(self, tmp_path):
        dist = sort_by_probability_desc(
            make_distribution({(0, 1): 3, (2, 2): 9, (1, 0): 5}, d=3)
        )
        path = tmp_path / "sorted.dist"
        save_distribution(dist, path)
        loaded = load_distribution(path)
        assert [tuple(map(int, r)) for r in loaded.levels] == [
            tuple(map(int, r)) for r in dist.levels
        ]

    def test_attr_names_with_commas_survive(self, tmp_path):
        dist = make_distribution({(0, 1): 2, (1, 1): 3}, d=3, names=["a,b c", "plain"])
        path = tmp_path / "odd.dist"
        save_distribution(dist, path)
        loaded = load_distribution(path)
        assert [a.name for a in loaded.attribute_set] == ["a,b c", "plain"]

    def test_missing_file(self, tmp_path):
        with pytest.raises(DistributionIOError):
            load_distribution(tmp_path / "nope.dist")

    def test_version_mismatch(self, tmp_path):
        path = tmp_path / "v9.dist"
        path.write_text("#mdd-dist v9 d=3 pairs=1 attrs=a metric=edit fingerprint=00\n0,1\n")
        with pytest.raises(DistributionIOError, match="version"):
            load_distribution(path)

    def test_checksum_mismatch(self, tmp_path, contacts, domain10, cosine_word):
        attrs = (contacts.attribute("Name"),)
        dist = build_distribution(contacts, attrs, cosine_word, domain10)
        path = tmp_path / "c.dist"
        save_distribution(dist, path)
        text = path.read_text()
        lines = text.splitlines()
        cells = lines[1].split(",")
        cells[-1] = str(int(cells[-1]) + 1)
        lines[1] = ",".join(cells)
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(DistributionIOError, match="checksum"):
            load_distribution(path)

    def test_malformed_row(self, tmp_path, contacts, domain10, cosine_word):
        attrs = (contacts.attribute("Name"),)
        dist = build_distribution(contacts, attrs, cosine_word, domain10)
        path = tmp_path / "m.dist"
        save_distribution(dist, path)
        lines = path.read_text().splitlines()
        lines.insert(1, "not,numbers")
        body = "\n".join(lines[:-1]) + "\n"
        import hashlib

        path.write_text(body + f"#checksum={hashlib.sha256(body.encode()).hexdigest()}\n")
        with pytest.raises(DistributionIOError):
            load_distribution(path)


class TestStatDistributionInvariants:
    def test_duplicate_vectors_rejected(self):
        with pytest.raises(ValidationError):
            StatDistribution(
                (make_distribution({(0,): 1}, d=3).attribute_set),
                LevelDomain(3),
                np.array([[1], [1]], dtype=np.int16),
                np.array([1, 2], dtype=np.int64),
                3,
                "f",
            )

    def test_counts_must_sum_to_pair_total(self):
        with pytest.raises(ValidationError):
            make_distribution({(0,): 1, (1,): 1}, d=3, pair_total=5)

    def test_probabilities_sum_to_one(self):
        rng = random.Random(11)
        dist, _, _ = random_distribution(rng, m_x=2, m_y=1)
        assert dist.total_probability() == Fraction(1)

    def test_arrays_read_only(self):
        dist = make_distribution({(0,): 1}, d=3)
        with pytest.raises(ValueError):
            dist.counts[0] = 5
