"""Build the pairwise-similarity statistical distribution from a relation,
reorder it for the discovery algorithms, and persist it to a cache file.

Construction makes a full pass over all N*(N-1)/2 unordered tuple pairs; no
blocking or sampling is applied, so the resulting counts are exact. Pair
enumeration may be spread over worker processes; the merged record set is
canonicalized by sorting level vectors, so the result is independent of
scheduling.
"""

from __future__ import annotations

import hashlib
import urllib.parse
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from typing import Mapping, Sequence, Union

import numpy as np

from .errors import (
    DistributionIOError,
    InsufficientDataError,
    SchemaMismatchError,
    ValidationError,
)
from .model import (
    AttributeId,
    LevelDomain,
    Relation,
    StatDistribution,
    ThresholdPattern,
)
from .simkit import MetricKind, discretize, similarity

MetricMap = Union[MetricKind, Mapping[AttributeId, MetricKind]]

_FORMAT_TAG = "#mdd-dist"
_FORMAT_VERSION = "v1"


def _metrics_for(attrs: Sequence[AttributeId], metrics: MetricMap) -> tuple[MetricKind, ...]:
    if isinstance(metrics, MetricKind):
        return tuple(metrics for _ in attrs)
    resolved = []
    for a in attrs:
        try:
            resolved.append(metrics[a])
        except KeyError:
            raise SchemaMismatchError(f"no metric configured for attribute {a.name}") from None
    return tuple(resolved)


def relation_fingerprint(
    relation: Relation,
    attrs: Sequence[AttributeId],
    metrics: Sequence[MetricKind],
    domain: LevelDomain,
) -> str:
    """Hash of the source rows and build parameters, kept in the cache header
    so a stale cache can be told apart from a rebuilt one."""
    h = hashlib.sha256()
    h.update(f"{_FORMAT_VERSION}|d={domain.d}|n={relation.tuple_count}".encode())
    for a, m in zip(attrs, metrics):
        h.update(f"|{a.index}:{urllib.parse.quote(a.name)}:{m.spec()}".encode())
    for row in relation.rows:
        for a in attrs:
            value = row[a.index]
            h.update(len(value).to_bytes(8, "little"))
            h.update(value.encode("utf-8"))
    return h.hexdigest()


def array_fingerprint(levels: np.ndarray, counts: np.ndarray, domain: LevelDomain) -> str:
    """Fingerprint for distributions assembled directly from arrays."""
    h = hashlib.sha256()
    h.update(f"arrays|d={domain.d}|".encode())
    h.update(np.ascontiguousarray(levels, dtype=np.int16).tobytes())
    h.update(np.ascontiguousarray(counts, dtype=np.int64).tobytes())
    return h.hexdigest()


def _pair_ranges(n: int, workers: int) -> list[tuple[int, int]]:
    """Split first-index ranges so each chunk covers roughly equal pair counts."""
    total = n * (n - 1) // 2
    target = total / workers
    ranges = []
    start = 0
    covered = 0
    for w in range(workers - 1):
        goal = (w + 1) * target
        end = start
        while end < n - 1 and covered < goal:
            covered += n - 1 - end
            end += 1
        ranges.append((start, end))
        start = end
    ranges.append((start, n - 1))
    return [(a, b) for a, b in ranges if a < b]


def _count_chunk(
    columns: tuple[tuple[str, ...], ...],
    metric_specs: tuple[str, ...],
    d: int,
    row_range: tuple[int, int],
) -> Counter:
    metrics = tuple(MetricKind.parse(s) for s in metric_specs)
    domain = LevelDomain(d)
    n = len(columns[0])
    memo: list[dict[tuple[str, str], int]] = [{} for _ in columns]
    out: Counter = Counter()
    lo, hi = row_range
    for i in range(lo, hi):
        for j in range(i + 1, n):
            vec = []
            for c, (col, metric) in enumerate(zip(columns, metrics)):
                key = (col[i], col[j]) if col[i] <= col[j] else (col[j], col[i])
                level = memo[c].get(key)
                if level is None:
                    level = discretize(similarity(key[0], key[1], metric), domain)
                    memo[c][key] = level
                vec.append(level)
            out[tuple(vec)] += 1
    return out


def build_distribution(
    relation: Relation,
    attrs: Sequence[AttributeId],
    metrics: MetricMap,
    domain: LevelDomain,
    *,
    workers: int = 1,
) -> StatDistribution:
    """Aggregate the discretized similarity vector of every unordered tuple
    pair into a statistical distribution over ``attrs``.

    Attributes outside ``attrs`` never enter the records, which is equivalent
    to marginalizing them away up front.
    """
    attrs = tuple(dict.fromkeys(attrs))
    if not attrs:
        raise ValidationError("need at least one attribute to build a distribution")
    for a in attrs:
        relation.column(a)  # raises SchemaMismatchError on unknown attributes
    n = relation.tuple_count
    if n < 2:
        raise InsufficientDataError(f"need at least 2 tuples to form pairs, got {n}")
    if workers < 1:
        raise ValidationError("workers must be >= 1")

    per_attr = _metrics_for(attrs, metrics)
    columns = tuple(relation.column(a) for a in attrs)
    specs = tuple(m.spec() for m in per_attr)

    workers = min(workers, n - 1)
    if workers == 1:
        total = _count_chunk(columns, specs, domain.d, (0, n - 1))
    else:
        total = Counter()
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = pool.map(
                _count_chunk,
                *zip(*[(columns, specs, domain.d, r) for r in _pair_ranges(n, workers)]),
            )
            for chunk in chunks:
                total.update(chunk)

    pair_total = n * (n - 1) // 2
    vectors = sorted(total)
    levels = np.array(vectors, dtype=np.int16).reshape(len(vectors), len(attrs))
    counts = np.array([total[v] for v in vectors], dtype=np.int64)
    return StatDistribution(
        attrs,
        domain,
        levels,
        counts,
        pair_total,
        relation_fingerprint(relation, attrs, per_attr, domain),
        metric_specs=specs,
    )


def pattern_mask(dist: StatDistribution, pattern: ThresholdPattern) -> np.ndarray:
    """Boolean vector over records: which satisfy every pattern threshold."""
    mask = np.ones(dist.n, dtype=bool)
    for attr, level in pattern.items():
        dist.domain.check_level(level, f"threshold for {attr.name}")
        if level > 0:
            mask &= dist.levels[:, dist.column_index(attr)] >= level
    return mask


def group_by_rhs(
    dist: StatDistribution, rhs_pattern: ThresholdPattern
) -> tuple[StatDistribution, int]:
    """Stable two-bucket partition: records satisfying the rhs pattern first,
    the rest after, pivot = size of the first bucket. Linear time."""
    mask = pattern_mask(dist, rhs_pattern)
    pivot = int(mask.sum())
    idx = np.arange(dist.n)
    order = np.concatenate([idx[mask], idx[~mask]])
    return dist.replace_order(order, rhs_group=(rhs_pattern, pivot)), pivot


def sort_by_probability_desc(dist: StatDistribution) -> StatDistribution:
    """Records in nonincreasing count order; ties broken by ascending level
    vector for run-to-run determinism."""
    keys = [dist.levels[:, c] for c in range(len(dist.attribute_set) - 1, -1, -1)]
    keys.append(-dist.counts)
    order = np.lexsort(keys)
    return dist.replace_order(order, probability_sorted=True)


def project(dist: StatDistribution, attrs: Sequence[AttributeId]) -> StatDistribution:
    """Marginalize the distribution onto a subset of its attributes, merging
    records that collide on the kept columns."""
    attrs = tuple(dict.fromkeys(attrs))
    cols = [dist.column_index(a) for a in attrs]
    sub = dist.levels[:, cols]
    uniq, inverse = np.unique(sub, axis=0, return_inverse=True)
    counts = np.zeros(uniq.shape[0], dtype=np.int64)
    np.add.at(counts, inverse, dist.counts)
    specs = tuple(dist.metric_specs[c] for c in cols) if dist.metric_specs else ()
    h = hashlib.sha256()
    h.update(f"project|{dist.fingerprint}".encode())
    for a in attrs:
        h.update(f"|{a.index}:{urllib.parse.quote(a.name)}".encode())
    return StatDistribution(
        attrs,
        dist.domain,
        uniq,
        counts,
        dist.pair_total,
        h.hexdigest(),
        metric_specs=specs,
    )


# ---------------------------------------------------------------------------
# Cache file format
# ---------------------------------------------------------------------------
#
#   #mdd-dist v1 d=<d> pairs=<pair_total> attrs=<comma-list> metric=<spec> fingerprint=<hex>
#   <level_1>,...,<level_m>,<count>
#   ...
#   #checksum=<sha256 of header+rows>
#
# Attribute names and metric specs are percent-encoded so commas and spaces in
# names cannot break the header. A uniform metric is written once; otherwise
# one spec per attribute, comma separated. The trailing checksum line guards
# the payload against truncation or edits.


def _header_line(dist: StatDistribution) -> str:
    # Source schema positions ride along so a reloaded distribution carries
    # the very same attribute identities it was built with.
    attrs = ",".join(
        f"{a.index}:{urllib.parse.quote(a.name, safe='')}" for a in dist.attribute_set
    )
    specs = dist.metric_specs or ("unspecified",) * len(dist.attribute_set)
    if len(set(specs)) == 1:
        metric = urllib.parse.quote(specs[0], safe=":")
    else:
        metric = ",".join(urllib.parse.quote(s, safe=":") for s in specs)
    return (
        f"{_FORMAT_TAG} {_FORMAT_VERSION} d={dist.domain.d} pairs={dist.pair_total} "
        f"attrs={attrs} metric={metric} fingerprint={dist.fingerprint}"
    )


def save_distribution(dist: StatDistribution, path) -> None:
    lines = [_header_line(dist)]
    for row, count in zip(dist.levels, dist.counts):
        lines.append(",".join(str(int(v)) for v in row) + f",{int(count)}")
    body = "\n".join(lines) + "\n"
    checksum = hashlib.sha256(body.encode("utf-8")).hexdigest()
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(body)
        fh.write(f"#checksum={checksum}\n")


def load_distribution(path) -> StatDistribution:
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            text = fh.read()
    except OSError as exc:
        raise DistributionIOError(f"cannot read distribution cache {path}: {exc}") from exc

    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise DistributionIOError(f"{path}: empty distribution cache")

    header = lines[0]
    parts = header.split(" ")
    if len(parts) < 2 or parts[0] != _FORMAT_TAG:
        raise DistributionIOError(f"{path}: not a distribution cache (bad magic)")
    if parts[1] != _FORMAT_VERSION:
        raise DistributionIOError(
            f"{path}: unsupported cache version {parts[1]!r}, expected {_FORMAT_VERSION}"
        )
    fields = {}
    for token in parts[2:]:
        if "=" not in token:
            raise DistributionIOError(f"{path}: malformed header token {token!r}")
        key, _, value = token.partition("=")
        fields[key] = value
    for required in ("d", "pairs", "attrs", "metric", "fingerprint"):
        if required not in fields:
            raise DistributionIOError(f"{path}: header missing {required}=")

    if not lines[-1].startswith("#checksum="):
        raise DistributionIOError(f"{path}: missing trailing checksum line")
    stated = lines[-1][len("#checksum="):]
    body = "\n".join(lines[:-1]) + "\n"
    actual = hashlib.sha256(body.encode("utf-8")).hexdigest()
    if stated != actual:
        raise DistributionIOError(f"{path}: checksum mismatch (file corrupted?)")

    try:
        d = int(fields["d"])
        pair_total = int(fields["pairs"])
    except ValueError:
        raise DistributionIOError(f"{path}: non-integer d= or pairs= in header") from None
    attrs = []
    for tok in fields["attrs"].split(","):
        if not tok:
            continue
        idx, sep, name = tok.partition(":")
        if not sep or not idx.isdigit():
            raise DistributionIOError(f"{path}: malformed attrs= entry {tok!r}")
        attrs.append(AttributeId(int(idx), urllib.parse.unquote(name)))
    if not attrs:
        raise DistributionIOError(f"{path}: empty attrs= list")
    attrs = tuple(attrs)
    raw_specs = [urllib.parse.unquote(tok) for tok in fields["metric"].split(",")]
    if len(raw_specs) == 1:
        specs = tuple(raw_specs * len(attrs))
    elif len(raw_specs) == len(attrs):
        specs = tuple(raw_specs)
    else:
        raise DistributionIOError(f"{path}: metric= list does not align with attrs=")

    width = len(attrs) + 1
    rows = []
    for lineno, line in enumerate(lines[1:-1], start=2):
        cells = line.split(",")
        if len(cells) != width:
            raise DistributionIOError(
                f"{path}:{lineno}: expected {width} comma-separated integers"
            )
        try:
            rows.append([int(c) for c in cells])
        except ValueError:
            raise DistributionIOError(f"{path}:{lineno}: non-integer cell") from None
    if not rows:
        raise DistributionIOError(f"{path}: no records")

    data = np.array(rows, dtype=np.int64)
    try:
        return StatDistribution(
            attrs,
            LevelDomain(d),
            data[:, :-1],
            data[:, -1],
            pair_total,
            fields["fingerprint"],
            metric_specs=specs,
        )
    except ValidationError as exc:
        raise DistributionIOError(f"{path}: invalid distribution payload: {exc}") from exc
