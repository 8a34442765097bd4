"""Voting-based noise detection over a corpus (prompt, collect, aggregate)."""

from __future__ import annotations

from typing import Callable, List, Optional, Sequence, Tuple

from .aggregate import aggregate_union, detect_label_noise
from .dataset import Corpus, EvalSample
from .errors import AllVotersFailed
from .harness import MatcherSpec, build_matchers, DEFAULT_MATCHERS
from .matching import execution_match
from .scanners import NoiseFlag
from .schema import serialize_schema
from .semantic import semantic_match_sql
from .voters import collect_variants


def sample_match_fns(sample: EvalSample, corpus: Corpus,
                     matchers: Sequence[MatcherSpec],
                     timeout: float = 30.0) -> List[Tuple[str, Callable]]:
    """Bind the configured matchers to one sample's schema and instance."""
    schema = corpus.schemas.get(sample.db_id)
    db_path = corpus.db_path_for(sample)
    fns: List[Tuple[str, Callable]] = []
    for matcher in matchers:
        if matcher.kind == 'semantic':
            def semantic_fn(gt_sql, variant_sql, _rules=matcher.rules):
                return semantic_match_sql(gt_sql, variant_sql, schema, _rules)
            fns.append((matcher.label, semantic_fn))
        else:
            if db_path is None:
                continue
            def exec_fn(gt_sql, variant_sql, _cfg=matcher.relaxations):
                return execution_match(gt_sql, variant_sql, [db_path], _cfg, timeout)
            fns.append((matcher.label, exec_fn))
    return fns


def run_noise_detection(corpus: Corpus, voters: Sequence,
                        matcher_specs: Optional[Sequence[dict]] = None,
                        per_call_timeout: float = 60.0,
                        exec_timeout: float = 30.0,
                        include_value_samples: bool = False,
                        ) -> Tuple[List[NoiseFlag], List[dict]]:
    """Collect voter variants per sample, take their union, and flag samples
    whose ground truth matches no variant under any configured matcher.

    Returns (flags, failures); voter failures never abort the run.
    """
    matchers = build_matchers(matcher_specs or DEFAULT_MATCHERS)
    flags: List[NoiseFlag] = []
    failures: List[dict] = []
    for sample in corpus.samples:
        schema = corpus.schemas.get(sample.db_id)
        if schema is None:
            failures.append({'sample_id': sample.id, 'error': 'no schema'})
            continue
        schema_text = serialize_schema(
            schema, include_value_samples=include_value_samples,
            db_path=corpus.db_path_for(sample))
        try:
            variant_sets, voter_failures = collect_variants(
                sample, schema_text, voters, per_call_timeout)
        except AllVotersFailed as exc:
            failures.append({'sample_id': sample.id, 'error': str(exc)})
            continue
        for failure in voter_failures:
            failures.append({'sample_id': sample.id, **failure})
        union = aggregate_union(variant_sets)
        match_fns = sample_match_fns(sample, corpus, matchers, exec_timeout)
        flag = detect_label_noise(sample, union, match_fns)
        if flag is not None:
            evidence = dict(flag.evidence)
            evidence['variant_sets'] = [vs.to_json() for vs in variant_sets]
            flag = NoiseFlag(flag.sample_id, flag.detector, flag.taxonomy_hint,
                             evidence)
            flags.append(flag)
    return flags, failures


def spider_execution_equiv(corpus: Corpus, sample: EvalSample,
                           timeout: float = 30.0) -> Callable[[str, str], bool]:
    """Pairwise variant equivalence for majority voting: execution match
    under the spider preset on the sample's instance."""
    db_path = corpus.db_path_for(sample)
    from .matching import preset

    def equiv(a: str, b: str) -> bool:
        if db_path is None:
            return a == b
        return execution_match(a, b, [db_path], preset('spider'), timeout).matched

    return equiv
