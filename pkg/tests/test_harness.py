"""End-to-end evaluation: accuracy accounting, error classes, metric errors."""

from __future__ import annotations

import json

import pytest

from sqleval.dataset import load_dataset
from sqleval.errors import ConfigError, OracleMismatch
from sqleval.extraction import extract_prediction
from sqleval.harness import (build_matchers, classify_prediction_error,
                             load_predictions, run_evaluation,
                             score_metric_errors)

import conftest as fx


def fenced(sql: str) -> str:
    return f'```sql\n{sql}\n```'


def build_corpus(tmp_path, spider_layout, records):
    samples_path = tmp_path / 'samples.json'
    samples_path.write_text(json.dumps(records))
    return load_dataset(samples_path, db_dir=spider_layout)


BASE_CONFIG = {'matchers': [{'kind': 'semantic'},
                            {'kind': 'execution', 'preset': 'spider'},
                            {'kind': 'execution', 'preset': 'strict'}]}


def test_identity_prediction_scores_one_everywhere(tmp_path, spider_layout):
    corpus = build_corpus(tmp_path, spider_layout, [
        {'question': 'List the names of all the people', 'db_id': 'person_db',
         'query': fx.SQL_NAMES_BOTH},
    ])
    report = run_evaluation(corpus, {'0': fenced(fx.SQL_NAMES_BOTH)}, BASE_CONFIG)
    for agg in report.aggregates.values():
        assert agg['accuracy'] == 1.0
        assert agg['missing'] == 0


def test_multi_variant_mode_accepts_any_listed_reading(tmp_path, spider_layout):
    record = {'question': 'List the names of all the people',
              'db_id': 'person_db', 'query': fx.SQL_NAMES_BOTH,
              'variants': [fx.SQL_NAMES_FIRST, fx.SQL_NAMES_CONCAT]}
    corpus = build_corpus(tmp_path, spider_layout, [record])
    prediction = {'0': fenced(fx.SQL_NAMES_FIRST)}
    single = run_evaluation(corpus, prediction, BASE_CONFIG)
    assert all(agg['accuracy'] == 0.0 for agg in single.aggregates.values())
    multi = run_evaluation(corpus, prediction,
                           {**BASE_CONFIG, 'multi_variant': True})
    assert all(agg['accuracy'] == 1.0 for agg in multi.aggregates.values())


def test_missing_prediction_counts_incorrect(tmp_path, spider_layout):
    corpus = build_corpus(tmp_path, spider_layout, [
        {'question': 'q', 'db_id': 'person_db', 'query': fx.SQL_NAMES_BOTH},
    ])
    report = run_evaluation(corpus, {'0': 'no fenced block at all'}, BASE_CONFIG)
    row = report.rows[0]
    assert row.extraction_status == 'missing'
    assert row.error == {'kind': 'missing',
                         'taxonomy_hint': 'Text2SQLSolution/ResultExtraction'}
    for agg in report.aggregates.values():
        assert agg['missing'] == 1 and agg['correct'] == 0


def test_hallucinated_column_is_missing_with_inference_hint(tmp_path, spider_layout):
    corpus = build_corpus(tmp_path, spider_layout, [
        {'question': 'q', 'db_id': 'person_db', 'query': fx.SQL_NAMES_BOTH},
    ])
    report = run_evaluation(corpus, {'0': fenced('SELECT email FROM Person')},
                            BASE_CONFIG)
    row = report.rows[0]
    assert row.exec_status == 'syntax'
    assert row.error['kind'] == 'missing'
    assert row.error['taxonomy_hint'] == \
        'Text2SQLSolution/InferenceStep/ModelMisprediction'


def test_wrong_prediction_classification(tmp_path, spider_layout):
    corpus = build_corpus(tmp_path, spider_layout, [
        {'question': 'q', 'db_id': 'person_db', 'query': fx.SQL_NAMES_BOTH},
    ])
    report = run_evaluation(corpus, {'0': fenced(fx.SQL_AGES_ALL)}, BASE_CONFIG)
    assert report.rows[0].error['kind'] == 'wrong'


def test_conservation_for_every_matcher(tmp_path, spider_layout):
    corpus = build_corpus(tmp_path, spider_layout, [
        {'question': 'q0', 'db_id': 'person_db', 'query': fx.SQL_NAMES_BOTH},
        {'question': 'q1', 'db_id': 'person_db', 'query': fx.SQL_AGES_ALL},
        {'question': 'q2', 'db_id': 'person_db', 'query': fx.SQL_AGES_DISTINCT},
        {'question': 'q3', 'db_id': 'person_db', 'query': fx.SQL_OLDEST_LIMIT},
    ])
    predictions = {
        '0': fenced(fx.SQL_NAMES_BOTH),     # correct
        '1': fenced(fx.SQL_AGES_DISTINCT),  # wrong under strict, bird-correct
        '2': 'no block',                    # missing
        '3': fenced('SELECT ghost FROM Person'),  # unexecutable
    }
    config = {'matchers': BASE_CONFIG['matchers'] +
              [{'kind': 'execution', 'preset': 'bird'}]}
    report = run_evaluation(corpus, predictions, config)
    for label, agg in report.aggregates.items():
        assert agg['correct'] + agg['missing'] + agg['wrong'] == agg['total'], label
    assert report.aggregates['execution:bird']['accuracy'] >= \
        report.aggregates['execution:strict']['accuracy']


def test_relaxation_monotonicity_at_report_level(tmp_path, spider_layout):
    corpus = build_corpus(tmp_path, spider_layout, [
        {'question': 'q0', 'db_id': 'person_db', 'query': fx.SQL_AGES_ALL},
        {'question': 'q1', 'db_id': 'person_db', 'query': fx.SQL_NAMES_BOTH},
        {'question': 'q2', 'db_id': 'person_db', 'query': fx.SQL_OLDEST_WITH_AGE},
    ])
    predictions = {'0': fenced(fx.SQL_AGES_DISTINCT),
                   '1': fenced('SELECT lastname, firstname FROM Person'),
                   '2': fenced(fx.SQL_OLDEST_SUBQUERY)}
    flags_off = {'kind': 'execution', 'flags': {}}
    combos = [
        ('execution:a', {'kind': 'execution', 'name': 'execution:a', 'flags': {
            'r1_ignore_row_order': True}}),
        ('execution:b', {'kind': 'execution', 'name': 'execution:b', 'flags': {
            'r1_ignore_row_order': True, 'r2_ignore_duplicate_rows': True}}),
        ('execution:c', {'kind': 'execution', 'name': 'execution:c', 'flags': {
            'r1_ignore_row_order': True, 'r2_ignore_duplicate_rows': True,
            'r4_ignore_column_order': True, 'r6_column_overlap': True}}),
    ]
    config = {'matchers': [{**flags_off, 'name': 'execution:off'}]
              + [spec for _, spec in combos]}
    report = run_evaluation(corpus, predictions, config)
    accuracy = {label: agg['accuracy'] for label, agg in report.aggregates.items()}
    assert accuracy['execution:off'] <= accuracy['execution:a'] \
        <= accuracy['execution:b'] <= accuracy['execution:c']


def test_report_determinism(tmp_path, spider_layout):
    corpus = build_corpus(tmp_path, spider_layout, [
        {'question': 'q', 'db_id': 'person_db', 'query': fx.SQL_NAMES_BOTH},
        {'question': 'q2', 'db_id': 'person_db', 'query': fx.SQL_AGES_ALL},
    ])
    predictions = {'0': fenced(fx.SQL_NAMES_FIRST), '1': fenced(fx.SQL_AGES_ALL)}
    first = run_evaluation(corpus, predictions, BASE_CONFIG)
    second = run_evaluation(corpus, predictions, BASE_CONFIG)
    assert json.dumps(first.to_json(), sort_keys=True) == \
        json.dumps(second.to_json(), sort_keys=True)


def test_unknown_matcher_and_preset_are_config_errors():
    with pytest.raises(ConfigError):
        build_matchers([{'kind': 'mystery'}])
    with pytest.raises(ConfigError):
        build_matchers([{'kind': 'execution', 'preset': 'nonesuch'}])


def test_unknown_prediction_id_rejected(tmp_path, spider_layout):
    corpus = build_corpus(tmp_path, spider_layout, [
        {'question': 'q', 'db_id': 'person_db', 'query': fx.SQL_NAMES_BOTH},
    ])
    with pytest.raises(ConfigError):
        run_evaluation(corpus, {'999': 'x'}, BASE_CONFIG)


def test_classification_policy_table():
    missing = extract_prediction('s', 'prose only')
    assert classify_prediction_error(missing, 'not_executed', False)['kind'] == 'missing'
    ok = extract_prediction('s', fenced('SELECT 1'))
    assert classify_prediction_error(ok, 'syntax', False)['kind'] == 'missing'
    assert classify_prediction_error(ok, 'timeout', False)['kind'] == 'missing'
    assert classify_prediction_error(ok, 'ok', False)['kind'] == 'wrong'
    assert classify_prediction_error(ok, 'ok', True) is None


def test_score_metric_errors(tmp_path, spider_layout):
    corpus = build_corpus(tmp_path, spider_layout, [
        {'question': 'q0', 'db_id': 'person_db', 'query': fx.SQL_AGES_DISTINCT},
        {'question': 'q1', 'db_id': 'person_db', 'query': fx.SQL_NAMES_BOTH},
    ])
    # sample 0: prediction keeps duplicates; bird ignores that (oracle says
    # the duplicates are wrong here), strict does not
    predictions = {'0': fenced(fx.SQL_AGES_ALL), '1': fenced(fx.SQL_NAMES_BOTH)}
    config = {'matchers': [{'kind': 'execution', 'preset': 'bird'},
                           {'kind': 'execution', 'preset': 'strict'},
                           {'kind': 'semantic'}]}
    report = run_evaluation(corpus, predictions, config)
    oracle = {'0': 'incorrect', '1': 'correct'}
    rates = score_metric_errors(report, oracle)
    assert rates['execution:bird'].type1_fp['count'] == 1
    assert rates['execution:strict'].type1_fp['count'] == 0
    # a semantic matcher miss on a correct sample is a type II error
    oracle_fn = {'1': 'correct'}
    semantic_rates = score_metric_errors(report, oracle_fn)
    assert semantic_rates['semantic'].type2_fn['count'] == 0

    with pytest.raises(OracleMismatch):
        score_metric_errors(report, {'missing_id': 'correct'})

    empty = score_metric_errors(report, {})
    assert empty['semantic'].type1_fp['rate'] is None
    assert empty['semantic'].denominator == 0


def test_semantic_fn_on_unsupported_rewrite(tmp_path, spider_layout):
    # ORDER BY commutation across equivalent keys is beyond the rule set: a
    # correct prediction scores as no-match (documented FN bias)
    corpus = build_corpus(tmp_path, spider_layout, [
        {'question': 'q', 'db_id': 'person_db',
         'query': 'SELECT firstname FROM Person WHERE age >= 18 AND age <= 18'},
    ])
    predictions = {'0': fenced('SELECT firstname FROM Person WHERE age = 18')}
    config = {'matchers': [{'kind': 'semantic'}]}
    report = run_evaluation(corpus, predictions, config)
    rates = score_metric_errors(report, {'0': 'correct'})
    assert rates['semantic'].type2_fn['count'] == 1


def test_report_validates_against_published_schema(tmp_path, spider_layout):
    import jsonschema
    from pathlib import Path
    corpus = build_corpus(tmp_path, spider_layout, [
        {'question': 'q', 'db_id': 'person_db', 'query': fx.SQL_NAMES_BOTH},
    ])
    report = run_evaluation(corpus, {'0': fenced(fx.SQL_AGES_ALL)}, BASE_CONFIG)
    schema = json.loads(
        (Path(__file__).resolve().parents[1] / 'docs' / 'report-schema.json')
        .read_text())
    jsonschema.validate(report.to_json(), schema)


def test_semantic_rule_list_is_selectable():
    matchers = build_matchers([
        {'kind': 'semantic', 'name': 'semantic:minimal',
         'rules': ['fold_case', 'normalize_aliases']},
    ])
    assert matchers[0].rules.rules == ('fold_case', 'normalize_aliases')
    with pytest.raises(ConfigError):
        build_matchers([{'kind': 'semantic', 'rules': ['nonesuch']}])


def test_matcher_failure_is_recorded_not_fatal(tmp_path, spider_layout):
    # 9 identical projected columns blow the column-permutation budget under
    # r4; the run must record it on the row and keep going
    wide = 'SELECT ' + ', '.join(['id'] * 9) + ' FROM Person'
    corpus = build_corpus(tmp_path, spider_layout, [
        {'question': 'q', 'db_id': 'person_db', 'query': wide},
        {'question': 'q2', 'db_id': 'person_db', 'query': fx.SQL_NAMES_BOTH},
    ])
    predictions = {'0': fenced(wide), '1': fenced(fx.SQL_NAMES_BOTH)}
    config = {'matchers': [{'kind': 'execution', 'name': 'x', 'flags': {
        'r4_ignore_column_order': True}}]}
    report = run_evaluation(corpus, predictions, config)
    row = report.rows[0]
    assert row.outcomes['x'].evidence['reason'] == 'matcher_failure'
    assert row.outcomes['x'].evidence['error'] == 'SearchBudgetExceeded'
    assert report.rows[1].correct['x'] is True


def test_load_predictions_jsonl(tmp_path):
    path = tmp_path / 'preds.jsonl'
    path.write_text('\n'.join([
        json.dumps({'sample_id': 0, 'raw_text': 'a'}),
        '',
        json.dumps({'sample_id': '1', 'raw_text': 'b'}),
    ]))
    assert load_predictions(path) == {'0': 'a', '1': 'b'}
