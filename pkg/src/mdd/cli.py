"""Command line front end.

Commands:
    mdd distribution   build and cache the pairwise statistical distribution
    mdd discover       run a discovery algorithm, emit a JSON result document
    mdd verify         cross-check an algorithm against the brute-force oracle

Exit codes: 0 success (an empty, "infeasible" result is still success),
2 validation error, 3 I/O error, 4 candidate budget exceeded.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path
from typing import Sequence

from .discovery import run_request
from .errors import (
    CandidateBudgetError,
    DistributionIOError,
    MddError,
    SchemaMismatchError,
    ValidationError,
)
from .lattice import DEFAULT_CANDIDATE_BUDGET
from .model import (
    Algorithm,
    AttributeId,
    DiscoveryRequest,
    EvalCounters,
    LevelDomain,
    Relation,
    StatDistribution,
    ThresholdPattern,
    to_fraction,
)
from .oracle import oracle_discover, oracle_measures
from .simkit import MetricKind, discretize
from . import distribution as dist_ops

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_IO = 3
EXIT_BUDGET = 4

RESULT_SCHEMA = "mdd-result-v1"

VERIFY_MAX_ROWS = 200
VERIFY_MAX_CANDIDATES = 10_000


def _read_csv(path: str) -> Relation:
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise ValidationError(f"{path}: CSV file has no header row") from None
            rows = [tuple(row) for row in reader]
    except OSError as exc:
        raise DistributionIOError(f"cannot read {path}: {exc}") from exc
    width = len(header)
    for i, row in enumerate(rows, start=2):
        if len(row) != width:
            raise ValidationError(f"{path}:{i}: row has {len(row)} cells, header has {width}")
    return Relation.from_rows(header, rows)


def _split_names(raw: str, flag: str) -> list[str]:
    names = [part.strip() for part in raw.split(",")]
    if any(not n for n in names):
        raise ValidationError(f"{flag} has an empty attribute name in {raw!r}")
    return names


def _resolve_attrs(relation_like, names: Sequence[str]) -> list[AttributeId]:
    return [relation_like.attribute(n) for n in names]


class _AttrView:
    """Name lookup over a distribution's attribute set, matching Relation's."""

    def __init__(self, dist: StatDistribution) -> None:
        self._dist = dist

    def attribute(self, name: str) -> AttributeId:
        for a in self._dist.attribute_set:
            if a.name == name:
                return a
        raise SchemaMismatchError(
            f"attribute {name!r} not in distribution cache "
            f"({', '.join(a.name for a in self._dist.attribute_set)})"
        )


def _parse_metric(args) -> MetricKind:
    spec = args.metric.strip().lower()
    if spec == "cosine-qgram":
        if args.qgram is None:
            raise ValidationError("cosine-qgram needs --qgram <q> or an inline size like cosine-qgram:3")
        return MetricKind.cosine_qgrams(args.qgram)
    metric = MetricKind.parse(spec)
    if args.qgram is not None and metric.kind != "cosine-qgram":
        raise ValidationError(f"--qgram does not apply to metric {metric.kind}")
    return metric


def _rhs_pattern_from_args(args, rhs_attrs, domain: LevelDomain) -> ThresholdPattern:
    if (args.rhs_thresholds is None) == (args.rhs_levels is None):
        raise ValidationError("give exactly one of --rhs-thresholds or --rhs-levels")
    if args.rhs_levels is not None:
        parts = args.rhs_levels.split(",")
        if len(parts) != len(rhs_attrs):
            raise ValidationError("--rhs-levels must list one level per rhs attribute")
        try:
            levels = [int(p) for p in parts]
        except ValueError:
            raise ValidationError(f"--rhs-levels must be integers, got {args.rhs_levels!r}") from None
        for level in levels:
            domain.check_level(level, "--rhs-levels entry")
    else:
        parts = args.rhs_thresholds.split(",")
        if len(parts) != len(rhs_attrs):
            raise ValidationError("--rhs-thresholds must list one similarity per rhs attribute")
        levels = []
        for p in parts:
            sim = to_fraction(p.strip(), "--rhs-thresholds entry")
            if not 0 <= sim <= 1:
                raise ValidationError(f"rhs similarity {p.strip()} outside [0, 1]")
            levels.append(discretize(float(sim), domain))
    return ThresholdPattern.over(tuple(rhs_attrs), levels)


def _load_inputs(args) -> tuple[StatDistribution, LevelDomain]:
    """Distribution either from a cache file or built in-process from CSV."""
    if (args.input is None) == (args.dist is None):
        raise ValidationError("give exactly one of --input (CSV) or --dist (cache file)")
    if args.dist is not None:
        dist = dist_ops.load_distribution(args.dist)
        view = _AttrView(dist)
        lhs = _resolve_attrs(view, _split_names(args.lhs, "--lhs"))
        rhs = _resolve_attrs(view, _split_names(args.rhs, "--rhs"))
        wanted = tuple(dict.fromkeys(lhs + rhs))
        if wanted != dist.attribute_set:
            dist = dist_ops.project(dist, wanted)
        return dist, dist.domain
    relation = _read_csv(args.input)
    domain = LevelDomain(args.levels)
    lhs = _resolve_attrs(relation, _split_names(args.lhs, "--lhs"))
    rhs = _resolve_attrs(relation, _split_names(args.rhs, "--rhs"))
    metric = _parse_metric(args)
    dist = dist_ops.build_distribution(
        relation, tuple(lhs + rhs), metric, domain, workers=args.threads
    )
    return dist, domain


def _levels_doc(pattern: ThresholdPattern) -> dict:
    return {a.name: level for a, level in pattern.items()}


def _similarity_doc(pattern: ThresholdPattern, domain: LevelDomain) -> dict:
    return {a.name: level / domain.max_level for a, level in pattern.items()}


def _emit(doc: dict, out: str | None) -> None:
    text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if out:
        try:
            Path(out).write_text(text, encoding="utf-8")
        except OSError as exc:
            raise DistributionIOError(f"cannot write {out}: {exc}") from exc
    else:
        sys.stdout.write(text)


def cmd_distribution(args) -> int:
    relation = _read_csv(args.input)
    domain = LevelDomain(args.levels)
    attrs = _resolve_attrs(relation, _split_names(args.attrs, "--attrs"))
    metric = _parse_metric(args)
    dist = dist_ops.build_distribution(
        relation, tuple(attrs), metric, domain, workers=args.threads
    )
    dist_ops.save_distribution(dist, args.out)
    print(f"n={dist.n} pair_total={dist.pair_total} d={domain.d} out={args.out}")
    return EXIT_OK


def _build_request(args, dist: StatDistribution, domain: LevelDomain) -> DiscoveryRequest:
    view = _AttrView(dist)
    lhs = _resolve_attrs(view, _split_names(args.lhs, "--lhs"))
    rhs = _resolve_attrs(view, _split_names(args.rhs, "--rhs"))
    rhs_pattern = _rhs_pattern_from_args(args, rhs, domain)
    return DiscoveryRequest.build(
        lhs,
        rhs,
        rhs_pattern,
        to_fraction(args.min_support, "--min-support"),
        to_fraction(args.min_confidence, "--min-confidence"),
        Algorithm.parse(args.algorithm),
        None if args.epsilon is None else to_fraction(args.epsilon, "--epsilon"),
    )


def _result_document(
    request: DiscoveryRequest,
    dist: StatDistribution,
    domain: LevelDomain,
    mds,
    counters: EvalCounters,
) -> dict:
    return {
        "schema": RESULT_SCHEMA,
        "status": "ok" if mds else "infeasible",
        "request": {
            "lhs": [a.name for a in request.lhs],
            "rhs": [a.name for a in request.rhs],
            "rhs_levels": _levels_doc(request.rhs_pattern),
            "rhs_similarities": _similarity_doc(request.rhs_pattern, domain),
            "min_support": str(request.min_support),
            "min_confidence": str(request.min_confidence),
            "epsilon": None if request.epsilon is None else str(request.epsilon),
            "algorithm": request.algorithm.value,
            "levels": domain.d,
        },
        "distribution": {
            "n": dist.n,
            "pair_total": dist.pair_total,
            "d": domain.d,
            "fingerprint": dist.fingerprint,
        },
        "mode": "approximate" if request.algorithm.is_approximate else "exact",
        "mds": [
            {
                "lhs_levels": _levels_doc(md.lhs_pattern),
                "lhs_similarities": _similarity_doc(md.lhs_pattern, domain),
                "rhs_levels": _levels_doc(md.rhs_pattern),
                "rhs_similarities": _similarity_doc(md.rhs_pattern, domain),
                "support": float(md.support),
                "support_exact": str(md.support),
                "confidence": float(md.confidence),
                "confidence_exact": str(md.confidence),
                "mode": {
                    "kind": md.mode.kind,
                    "prefix_k": md.mode.prefix_k,
                    "epsilon": None if md.mode.epsilon is None else str(md.mode.epsilon),
                },
            }
            for md in mds
        ],
        "counters": {
            "records_evaluated": counters.records_evaluated,
            "candidates_evaluated": counters.candidates_evaluated,
            "candidates_pruned_support": counters.candidates_pruned_support,
            "candidates_pruned_confidence": counters.candidates_pruned_confidence,
            "candidates_total": counters.candidates_total,
        },
    }


def cmd_discover(args) -> int:
    dist, domain = _load_inputs(args)
    request = _build_request(args, dist, domain)
    counters = EvalCounters()
    mds = run_request(
        dist, request, candidate_budget=args.candidate_budget, counters=counters
    )
    _emit(_result_document(request, dist, domain, mds, counters), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    relation = _read_csv(args.input)
    if relation.tuple_count > VERIFY_MAX_ROWS:
        raise ValidationError(
            f"verify is capped at {VERIFY_MAX_ROWS} rows (got {relation.tuple_count}); "
            "it recomputes every pair from scratch"
        )
    domain = LevelDomain(args.levels)
    lhs = _resolve_attrs(relation, _split_names(args.lhs, "--lhs"))
    rhs = _resolve_attrs(relation, _split_names(args.rhs, "--rhs"))
    if domain.d ** len(lhs) > VERIFY_MAX_CANDIDATES:
        raise CandidateBudgetError(
            f"verify is capped at {VERIFY_MAX_CANDIDATES} candidates; reduce --levels or --lhs"
        )
    rhs_pattern = _rhs_pattern_from_args(args, rhs, domain)
    metric = _parse_metric(args)
    request = DiscoveryRequest.build(
        lhs, rhs, rhs_pattern,
        to_fraction(args.min_support, "--min-support"),
        to_fraction(args.min_confidence, "--min-confidence"),
        Algorithm.parse(args.algorithm),
        None if args.epsilon is None else to_fraction(args.epsilon, "--epsilon"),
    )
    if request.algorithm.is_approximate:
        raise ValidationError(
            "verify compares exact measures; use an exact algorithm (ea, eps, epsc)"
        )

    dist = dist_ops.build_distribution(
        relation, tuple(lhs + rhs), metric, domain, workers=args.threads
    )
    engine = run_request(dist, request, candidate_budget=args.candidate_budget)
    truth = oracle_discover(
        relation, lhs, rhs, rhs_pattern,
        request.min_support, request.min_confidence, metric, domain,
        candidate_cap=VERIFY_MAX_CANDIDATES,
    )
    engine_patterns = [md.lhs_pattern for md in engine]
    if engine_patterns != truth:
        only_engine = [p for p in engine_patterns if p not in truth]
        only_oracle = [p for p in truth if p not in engine_patterns]
        sample = (only_engine + only_oracle)[0]
        sup, conf = oracle_measures(relation, lhs, rhs, sample, rhs_pattern, metric, domain)
        print("DISAGREEMENT")
        print(f"  pattern: {{{', '.join(f'{a.name}>={l}' for a, l in sample.items())}}}")
        print(f"  oracle: support={float(sup):.12g} confidence={float(conf):.12g}")
        engine_md = next((m for m in engine if m.lhs_pattern == sample), None)
        if engine_md:
            print(
                f"  engine: support={float(engine_md.support):.12g} "
                f"confidence={float(engine_md.confidence):.12g}"
            )
        else:
            print("  engine: pattern not returned")
        return 1

    mismatched = []
    for md in engine:
        sup, conf = oracle_measures(
            relation, lhs, rhs, md.lhs_pattern, rhs_pattern, metric, domain
        )
        if sup != md.support or conf != md.confidence:
            mismatched.append((md, sup, conf))
    if mismatched:
        md, sup, conf = mismatched[0]
        print("DISAGREEMENT on measures")
        print(f"  pattern: {{{', '.join(f'{a.name}>={l}' for a, l in md.lhs_pattern.items())}}}")
        print(f"  oracle: support={float(sup):.12g} confidence={float(conf):.12g}")
        print(f"  engine: support={float(md.support):.12g} confidence={float(md.confidence):.12g}")
        return 1

    print(f"AGREEMENT: {len(engine)} rule(s), measures identical")
    return EXIT_OK


def _add_common_discovery_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--lhs", required=True, help="comma-separated lhs attribute names")
    p.add_argument("--rhs", required=True, help="comma-separated rhs attribute names")
    p.add_argument("--rhs-thresholds", help="rhs similarities in [0,1], comma-separated")
    p.add_argument("--rhs-levels", help="rhs levels in 0..d-1, comma-separated")
    p.add_argument("--min-support", required=True, help="minimum support in (0,1]")
    p.add_argument("--min-confidence", required=True, help="minimum confidence in (0,1]")
    p.add_argument("--epsilon", help="relative error bound for approximate algorithms")
    p.add_argument(
        "--algorithm",
        default="epsc",
        help="ea | eps | epsc | ap | api | aps | apsi (default epsc)",
    )
    p.add_argument(
        "--candidate-budget",
        type=int,
        default=DEFAULT_CANDIDATE_BUDGET,
        help=f"cap on d^|lhs| candidates (default {DEFAULT_CANDIDATE_BUDGET})",
    )


def _add_metric_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--metric",
        default="cosine-word",
        help="cosine-word | cosine-qgram:<q> | edit (default cosine-word)",
    )
    p.add_argument("--qgram", type=int, help="gram size when --metric cosine-qgram")
    p.add_argument("--levels", type=int, default=10, help="level domain size d (default 10)")
    p.add_argument("--threads", type=int, default=1, help="worker processes for the pairwise pass")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mdd",
        description="Discover similarity-threshold matching rules with support and confidence minimums.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_dist = sub.add_parser("distribution", help="build and cache the statistical distribution")
    p_dist.add_argument("--input", required=True, help="CSV file with a header row")
    p_dist.add_argument("--attrs", required=True, help="comma-separated attribute names")
    p_dist.add_argument("--out", required=True, help="cache file to write")
    _add_metric_flags(p_dist)
    p_dist.set_defaults(func=cmd_distribution)

    p_disc = sub.add_parser("discover", help="run a discovery algorithm")
    p_disc.add_argument("--input", help="CSV file (distribution built in-process)")
    p_disc.add_argument("--dist", help="distribution cache file from 'mdd distribution'")
    p_disc.add_argument("--out", help="write the JSON document here instead of stdout")
    _add_metric_flags(p_disc)
    _add_common_discovery_flags(p_disc)
    p_disc.set_defaults(func=cmd_discover)

    p_ver = sub.add_parser("verify", help="cross-check an algorithm against the brute-force oracle")
    p_ver.add_argument("--input", required=True, help="CSV file (desk scale)")
    _add_metric_flags(p_ver)
    _add_common_discovery_flags(p_ver)
    p_ver.set_defaults(func=cmd_verify)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CandidateBudgetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except DistributionIOError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except MddError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
