"""Benchmark-noise scanners: empty-result proxy, top-k template, corpus stats."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional

from . import ast as A
from .dataset import Corpus
from .errors import ParseError
from .matching import RelaxationConfig, compare_relations, topk_template
from .parser import parse_statement
from .relations import empty_instance, execute_query
from .taxonomy import LABEL_ACCURACY, WRONG_PRESUPPOSITIONS, TaxonomyCategory

DETECTOR_EMPTY_RESULT = 'empty_result'
DETECTOR_TOPK_TEMPLATE = 'topk_template'
DETECTOR_VOTING = 'voting_disagreement'

DETECTORS = (DETECTOR_EMPTY_RESULT, DETECTOR_TOPK_TEMPLATE, DETECTOR_VOTING)

# Evidence keys at least one of which each detector must provide.
_EVIDENCE_KEYS = {
    DETECTOR_EMPTY_RESULT: ('gt_row_count', 'gt_unexecutable'),
    DETECTOR_TOPK_TEMPLATE: ('k',),
    DETECTOR_VOTING: ('match_matrix', 'no_variants'),
}


@dataclass(frozen=True)
class NoiseFlag:
    sample_id: str
    detector: str
    taxonomy_hint: TaxonomyCategory
    evidence: dict

    def __post_init__(self):
        if self.detector not in DETECTORS:
            raise ValueError(f'unknown detector {self.detector!r}')
        if not self.evidence:
            raise ValueError('evidence must be non-empty')
        required = _EVIDENCE_KEYS[self.detector]
        if not any(key in self.evidence for key in required):
            raise ValueError(
                f'{self.detector} evidence needs one of {required}')

    def to_json(self) -> dict:
        return {'sample_id': self.sample_id, 'detector': self.detector,
                'taxonomy_hint': self.taxonomy_hint.to_json(),
                'evidence': self.evidence}

    @classmethod
    def from_json(cls, data: dict) -> 'NoiseFlag':
        return cls(data['sample_id'], data['detector'],
                   TaxonomyCategory.from_json(data['taxonomy_hint']),
                   data['evidence'])


_STRICT = RelaxationConfig()


def scan_empty_results(corpus: Corpus, db_paths: Optional[Dict] = None,
                       timeout: float = 30.0) -> List[NoiseFlag]:
    """Flag samples whose ground truth yields the same result as on an empty
    instance of the schema (catches COUNT()=0 style results, not only zero
    rows).  Unexecutable ground truths are flagged with the error instead."""
    db_paths = db_paths if db_paths is not None else corpus.db_paths
    flags: List[NoiseFlag] = []
    empty_cache: Dict[str, object] = {}
    try:
        for sample in corpus:
            path = db_paths.get(sample.db_id)
            if path is None:
                continue
            gt_result = execute_query(path, sample.gt_sql, timeout)
            if not gt_result.ok:
                flags.append(NoiseFlag(sample.id, DETECTOR_EMPTY_RESULT, LABEL_ACCURACY, {
                    'gt_unexecutable': True,
                    'error_kind': gt_result.error.kind,
                    'error_message': gt_result.error.message,
                }))
                continue
            if sample.db_id not in empty_cache:
                empty_cache[sample.db_id] = empty_instance(path)
            empty_result = execute_query(empty_cache[sample.db_id], sample.gt_sql, timeout)
            if not empty_result.ok:
                continue
            outcome = compare_relations(gt_result.relation, empty_result.relation, _STRICT)
            if outcome.matched:
                flags.append(NoiseFlag(sample.id, DETECTOR_EMPTY_RESULT, LABEL_ACCURACY, {
                    'gt_row_count': gt_result.relation.n_rows,
                    'equals_empty_instance_result': True,
                }))
    finally:
        for conn in empty_cache.values():
            conn.close()
    return flags


def scan_topk_template(corpus: Corpus) -> List[NoiseFlag]:
    """Flag samples whose ground truth ends with ORDER BY ... LIMIT k and no
    OFFSET; such questions presuppose the cut does not fall into a tie."""
    flags: List[NoiseFlag] = []
    for sample in corpus:
        try:
            stmt = parse_statement(sample.gt_sql)
        except ParseError:
            continue
        info = topk_template(stmt)
        if info is None:
            continue
        k, order_items = info
        flags.append(NoiseFlag(sample.id, DETECTOR_TOPK_TEMPLATE, WRONG_PRESUPPOSITIONS, {
            'k': k,
            'order_by': [A.expr_sql(t.expr) + (' DESC' if t.desc else '')
                         for t in order_items],
        }))
    return flags


@dataclass
class StatsReport:
    total_samples: int = 0
    unparseable: int = 0
    order_by_without_limit: int = 0
    topk_template: int = 0
    unique_queries: int = 0
    distinct_queries: int = 0
    non_distinct_queries: int = 0
    empty_result_flags: Optional[int] = None
    per_sample_distinct: int = 0
    fractions: Dict[str, float] = field(default_factory=dict)

    def finalize(self) -> 'StatsReport':
        total = self.total_samples or 1
        self.fractions = {
            'order_by_without_limit': self.order_by_without_limit / total,
            'topk_template': self.topk_template / total,
            'distinct_queries': self.distinct_queries / total,
            'non_distinct_queries': self.non_distinct_queries / total,
        }
        return self

    def to_json(self) -> dict:
        data = dict(self.__dict__)
        data['fractions'] = dict(self.fractions)
        return data


def _has_toplevel_distinct(body: A.QueryExpr) -> bool:
    if isinstance(body, A.SetOp):
        return _has_toplevel_distinct(body.left) or _has_toplevel_distinct(body.right)
    return body.distinct


def corpus_stats(corpus: Corpus, db_paths: Optional[Dict] = None,
                 with_empty_scan: bool = False) -> StatsReport:
    """Corpus-level counts.  Distinct / non-distinct are counted over unique
    query texts (benchmarks repeat the same label for paraphrased questions);
    the other counters are per sample."""
    report = StatsReport(total_samples=len(corpus))
    unique: Dict[str, bool] = {}
    for sample in corpus:
        try:
            stmt = parse_statement(sample.gt_sql)
        except ParseError:
            report.unparseable += 1
            continue
        if stmt.order_by and stmt.limit is None:
            report.order_by_without_limit += 1
        if topk_template(stmt) is not None:
            report.topk_template += 1
        distinct = _has_toplevel_distinct(stmt.body)
        if distinct:
            report.per_sample_distinct += 1
        key = ' '.join(sample.gt_sql.split()).lower()
        unique.setdefault(key, distinct)
    report.unique_queries = len(unique)
    report.distinct_queries = sum(1 for d in unique.values() if d)
    report.non_distinct_queries = report.unique_queries - report.distinct_queries
    if with_empty_scan:
        flags = scan_empty_results(corpus, db_paths)
        report.empty_result_flags = len(flags)
    return report.finalize()
