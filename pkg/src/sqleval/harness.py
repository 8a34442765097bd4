"""End-to-end evaluation: extract, execute, match, classify, aggregate."""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .canon import CanonRuleSet, DEFAULT_RULESET
from .dataset import Corpus, EvalSample
from .errors import ConfigError, OracleMismatch, ParseError, ResolutionError
from .extraction import (POLICY_FIRST_BLOCK, STATUS_OK, PredictionRecord,
                         extract_prediction)
from .matching import (MatchOutcome, RelaxationConfig, execution_match, preset)
from .parser import parse_sql
from .relations import DEFAULT_TIMEOUT, execute_query
from .scanners import corpus_stats
from .semantic import semantic_match
from .taxonomy import MODEL_MISPREDICTION, RESULT_EXTRACTION


@dataclass(frozen=True)
class MatcherSpec:
    label: str
    kind: str  # 'semantic' | 'execution'
    relaxations: Optional[RelaxationConfig] = None
    rules: Optional[CanonRuleSet] = None

    def strictness_rank(self) -> Tuple[int, int]:
        """Lower ranks are stricter; execution matchers order by enabled flags."""
        if self.kind == 'semantic':
            return (1, 0)
        cfg = self.relaxations or RelaxationConfig()
        flags = sum([cfg.r1_ignore_row_order, cfg.r2_ignore_duplicate_rows,
                     cfg.r3_ignore_column_types, cfg.r4_ignore_column_order,
                     cfg.r5_flatten_cells, cfg.r6_column_overlap])
        return (0, flags)


def build_matchers(specs: Sequence[dict]) -> List[MatcherSpec]:
    matchers: List[MatcherSpec] = []
    for spec in specs:
        kind = spec.get('kind')
        if kind == 'semantic':
            rule_names = spec.get('rules')
            try:
                rules = CanonRuleSet(tuple(rule_names)) if rule_names else DEFAULT_RULESET
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
            label = spec.get('name', 'semantic')
            matchers.append(MatcherSpec(label, 'semantic', rules=rules))
        elif kind == 'execution':
            if 'preset' in spec:
                try:
                    cfg = preset(spec['preset'])
                except KeyError as exc:
                    raise ConfigError(str(exc)) from exc
                label = spec.get('name', f"execution:{spec['preset']}")
            else:
                flags = spec.get('flags', {})
                try:
                    cfg = RelaxationConfig(**flags)
                except TypeError as exc:
                    raise ConfigError(f'bad relaxation flags: {exc}') from exc
                label = spec.get('name', f'execution:{cfg.digest()}')
            matchers.append(MatcherSpec(label, 'execution', relaxations=cfg))
        else:
            raise ConfigError(f'unknown matcher kind {kind!r}')
    if len({m.label for m in matchers}) != len(matchers):
        raise ConfigError('matcher labels must be unique')
    return matchers


DEFAULT_MATCHERS = ({'kind': 'semantic'}, {'kind': 'execution', 'preset': 'spider'})


@dataclass
class SampleRow:
    sample_id: str
    extraction_status: str
    exec_status: str
    outcomes: Dict[str, MatchOutcome] = field(default_factory=dict)
    correct: Dict[str, bool] = field(default_factory=dict)
    error: Optional[dict] = None  # {'kind': 'missing'|'wrong', 'taxonomy_hint': ...}

    def to_json(self) -> dict:
        return {
            'sample_id': self.sample_id,
            'extraction_status': self.extraction_status,
            'exec_status': self.exec_status,
            'outcomes': {k: v.to_json() for k, v in self.outcomes.items()},
            'correct': dict(self.correct),
            'error': self.error,
        }


@dataclass
class EvalReport:
    rows: List[SampleRow]
    aggregates: Dict[str, dict]
    config_digest: str
    corpus_stats: dict

    def to_json(self) -> dict:
        return {'rows': [r.to_json() for r in self.rows],
                'aggregates': self.aggregates,
                'config_digest': self.config_digest,
                'corpus_stats': self.corpus_stats}

    def summary_text(self) -> str:
        lines = ['matcher                          accuracy  correct  missing  wrong  total']
        for label, agg in sorted(self.aggregates.items()):
            lines.append(f"{label:<32} {agg['accuracy']:>8.3f}  {agg['correct']:>7}"
                         f"  {agg['missing']:>7}  {agg['wrong']:>5}  {agg['total']:>5}")
        return '\n'.join(lines)


def load_predictions(path: Union[str, Path]) -> Dict[str, str]:
    """JSON Lines of {sample_id, raw_text} -> mapping."""
    predictions: Dict[str, str] = {}
    for line in Path(path).read_text().splitlines():
        if not line.strip():
            continue
        record = json.loads(line)
        predictions[str(record['sample_id'])] = record['raw_text']
    return predictions


def _match_prediction(sample: EvalSample, pred_sql: str, matcher: MatcherSpec,
                      corpus: Corpus, labels: Sequence[str],
                      timeout: float) -> MatchOutcome:
    """Outcome against the first matching label (any-variant rule)."""
    schema = corpus.schemas.get(sample.db_id)
    last: Optional[MatchOutcome] = None
    for label_sql in labels:
        if matcher.kind == 'semantic':
            try:
                gt_ast = parse_sql(label_sql, schema)
                pred_ast = parse_sql(pred_sql, schema)
            except (ParseError, ResolutionError) as exc:
                last = MatchOutcome(False, 'semantic', matcher.rules.digest(),
                                    {'reason': 'unparseable', 'detail': str(exc)})
                continue
            outcome = semantic_match(gt_ast, pred_ast, schema, matcher.rules)
        else:
            db_path = corpus.db_path_for(sample)
            if db_path is None:
                outcome = MatchOutcome(False, 'execution',
                                       matcher.relaxations.digest(),
                                       {'reason': 'no database instance'})
            else:
                outcome = execution_match(label_sql, pred_sql, [db_path],
                                          matcher.relaxations, timeout)
        if outcome.matched:
            return outcome
        last = outcome
    return last if last is not None else MatchOutcome(
        False, matcher.kind, '', {'reason': 'no ground-truth labels'})


def _evaluate_sample(sample: EvalSample, raw_text: Optional[str],
                     matchers: Sequence[MatcherSpec], corpus: Corpus,
                     policy: str, multi_variant: bool, timeout: float) -> SampleRow:
    record = extract_prediction(sample.id, raw_text or '', policy)
    row = SampleRow(sample.id, record.status, 'not_executed')
    if record.status != STATUS_OK:
        for matcher in matchers:
            row.correct[matcher.label] = False
        row.error = {'kind': 'missing', 'taxonomy_hint': str(RESULT_EXTRACTION)}
        return row

    pred_sql = record.extracted[0]
    db_path = corpus.db_path_for(sample)
    if db_path is not None:
        result = execute_query(db_path, pred_sql, timeout)
        row.exec_status = 'ok' if result.ok else result.error.kind
    labels = sample.all_labels() if multi_variant else (sample.gt_sql,)
    for matcher in matchers:
        try:
            outcome = _match_prediction(sample, pred_sql, matcher, corpus,
                                        labels, timeout)
        except Exception as exc:
            # a failing matcher (budget exhaustion, unresolvable schema) is a
            # recorded per-sample failure, never an aborted run
            outcome = MatchOutcome(False, matcher.kind, '', {
                'reason': 'matcher_failure',
                'error': type(exc).__name__,
                'detail': str(exc),
            })
        row.outcomes[matcher.label] = outcome
        executable = row.exec_status in ('ok', 'not_executed')
        row.correct[matcher.label] = bool(outcome.matched) and executable

    strictest = min(matchers, key=lambda m: m.strictness_rank())
    row.error = classify_prediction_error(record, row.exec_status,
                                          row.correct.get(strictest.label, False),
                                          strictest.label)
    return row


def classify_prediction_error(record: PredictionRecord, exec_status: str,
                              strictest_matched: bool,
                              strictest_label: str = '') -> Optional[dict]:
    """Missing when extraction failed or the engine rejected/timed out the
    prediction; wrong when it ran but the strictest matcher disagreed."""
    if record.status != STATUS_OK:
        return {'kind': 'missing', 'taxonomy_hint': str(RESULT_EXTRACTION)}
    if exec_status in ('syntax', 'timeout', 'runtime'):
        return {'kind': 'missing', 'taxonomy_hint': str(MODEL_MISPREDICTION)}
    if not strictest_matched:
        return {'kind': 'wrong', 'taxonomy_hint': None,
                'strictest_matcher': strictest_label}
    return None


def run_evaluation(corpus: Corpus, predictions: Dict[str, str], config: dict,
                   workers: int = 4) -> EvalReport:
    """Evaluate predictions over the corpus under every configured matcher.

    Samples whose prediction is missing or unexecutable count as incorrect
    for every matcher; in multi-variant mode a prediction is correct when it
    matches any provided ground-truth variant.
    """
    unknown = sorted(set(predictions) - {s.id for s in corpus})
    if unknown:
        raise ConfigError(f'predictions reference unknown sample ids: {unknown[:5]}')
    matchers = build_matchers(config.get('matchers', DEFAULT_MATCHERS))
    policy = config.get('policy', POLICY_FIRST_BLOCK)
    multi_variant = bool(config.get('multi_variant', False))
    timeout = float(config.get('timeout', DEFAULT_TIMEOUT))

    def work(sample: EvalSample) -> SampleRow:
        return _evaluate_sample(sample, predictions.get(sample.id), matchers,
                                corpus, policy, multi_variant, timeout)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(work, corpus.samples))
    else:
        rows = [work(s) for s in corpus.samples]

    aggregates: Dict[str, dict] = {}
    for matcher in matchers:
        correct = sum(1 for r in rows if r.correct.get(matcher.label))
        missing = sum(1 for r in rows if r.error and r.error['kind'] == 'missing')
        wrong = sum(1 for r in rows
                    if not r.correct.get(matcher.label)
                    and not (r.error and r.error['kind'] == 'missing'))
        total = len(rows)
        aggregates[matcher.label] = {
            'correct': correct, 'missing': missing, 'wrong': wrong, 'total': total,
            'accuracy': correct / total if total else 0.0,
            'missing_rate': missing / total if total else 0.0,
            'wrong_rate': wrong / total if total else 0.0,
        }
    digest_src = json.dumps({'matchers': [m.label for m in matchers],
                             'policy': policy, 'multi_variant': multi_variant},
                            sort_keys=True)
    import hashlib
    digest = hashlib.sha256(digest_src.encode()).hexdigest()[:12]
    stats = corpus_stats(corpus).to_json()
    return EvalReport(rows, aggregates, digest, stats)


@dataclass
class ErrorRates:
    type1_fp: dict
    type2_fn: dict
    denominator: int

    def to_json(self) -> dict:
        return {'type1_fp': self.type1_fp, 'type2_fn': self.type2_fn,
                'denominator': self.denominator}


def score_metric_errors(report: EvalReport,
                        oracle: Dict[str, str]) -> Dict[str, ErrorRates]:
    """FP/FN rates of each matcher against per-sample oracle labels
    ('correct' / 'incorrect'), over the labeled subset only."""
    by_id = {row.sample_id: row for row in report.rows}
    for sample_id in oracle:
        if sample_id not in by_id:
            raise OracleMismatch(f'oracle labels unknown sample id {sample_id!r}')
    rates: Dict[str, ErrorRates] = {}
    labels = list(report.aggregates)
    n = len(oracle)
    for label in labels:
        fp = fn = 0
        for sample_id, verdict in oracle.items():
            row = by_id[sample_id]
            matched = row.correct.get(label, False)
            if matched and verdict == 'incorrect':
                fp += 1
            elif not matched and verdict == 'correct':
                fn += 1
        rates[label] = ErrorRates(
            type1_fp={'count': fp, 'rate': fp / n if n else None},
            type2_fn={'count': fn, 'rate': fn / n if n else None},
            denominator=n,
        )
    return rates
