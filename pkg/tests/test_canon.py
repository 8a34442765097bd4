"""Canonicalization rules: pinned rewrites, idempotence, confluence, and
brute-force execution checks of the schema-aware rules."""

from __future__ import annotations

import random

import pytest

from sqleval.ast import to_sql
from sqleval.canon import CanonRuleSet, DEFAULT_RULESET, RULES, canonicalize
from sqleval.errors import PreconditionError, UnsupportedConstruct
from sqleval.matching import RelaxationConfig, compare_relations
from sqleval.parser import parse_sql, parse_statement
from sqleval.relations import execute_query

import conftest as fx
from instances import random_instance


@pytest.fixture(scope='module')
def schema():
    return fx.person_schema()


def canon_sql(sql, schema, rules=DEFAULT_RULESET):
    return to_sql(canonicalize(parse_sql(sql, schema), schema, rules))


def test_predicate_normalization(schema):
    got = canon_sql("SELECT firstname FROM Person WHERE 18 < age AND active = 'T'",
                    schema)
    assert got == ("SELECT t1.firstname FROM person AS t1 "
                   "WHERE t1.active = 'T' AND t1.age > 18")


def test_distinct_dropped_when_pk_projected(schema):
    assert canon_sql('SELECT DISTINCT id FROM Person', schema) == \
        canon_sql('SELECT id FROM Person', schema)
    # without the key in the projection the keyword stays
    assert 'DISTINCT' in canon_sql('SELECT DISTINCT age FROM Person', schema)


def test_inequality_filter_unchanged_by_all_rules(schema):
    got = canon_sql(fx.SQL_INACTIVE_NEQ_T, schema)
    assert got == "SELECT t1.firstname FROM person AS t1 WHERE t1.active != 'T'"


def test_alias_and_case_normalization(schema):
    variants = [
        'SELECT firstname FROM Person',
        'SELECT Person.firstname FROM Person AS Person',
        'select FIRSTNAME from person',
        'SELECT p.firstname FROM Person p',
    ]
    forms = {canon_sql(v, schema) for v in variants}
    assert len(forms) == 1


def test_in_list_normalization(schema):
    single = canon_sql('SELECT id FROM Person WHERE age IN (30)', schema)
    assert single == canon_sql('SELECT id FROM Person WHERE age = 30', schema)
    sorted_list = canon_sql('SELECT id FROM Person WHERE age IN (3, 1, 2, 1)', schema)
    assert sorted_list == canon_sql('SELECT id FROM Person WHERE age IN (1, 2, 3)',
                                    schema)


def test_between_expansion(schema):
    expanded = canon_sql('SELECT id FROM Person WHERE age BETWEEN 18 AND 30', schema)
    explicit = canon_sql('SELECT id FROM Person WHERE age >= 18 AND age <= 30', schema)
    assert expanded == explicit


def test_join_forms_unify(schema):
    comma = canon_sql('SELECT p.firstname FROM Person p, Person q '
                      'WHERE p.id = q.id AND q.age = 30', schema)
    explicit = canon_sql('SELECT a.firstname FROM Person a JOIN Person b '
                         'ON a.id = b.id WHERE b.age = 30', schema)
    assert comma == explicit


def test_order_by_alias_and_ordinal_inlined(schema):
    by_alias = canon_sql('SELECT firstname AS name FROM Person ORDER BY name', schema)
    by_ordinal = canon_sql('SELECT firstname FROM Person ORDER BY 1', schema)
    direct = canon_sql('SELECT firstname FROM Person ORDER BY firstname', schema)
    assert by_alias == by_ordinal == direct


def test_integral_float_literal_folds_in_comparisons_only(schema):
    cmp_fold = canon_sql('SELECT id FROM Person WHERE age > 18.0', schema)
    assert cmp_fold == canon_sql('SELECT id FROM Person WHERE age > 18', schema)
    projected = canon_sql('SELECT 18.0 FROM Person', schema)
    assert '18.0' in projected


def test_idempotence(schema):
    for sql in fx.ALL_FIXTURE_QUERIES:
        once = canonicalize(parse_sql(sql, schema), schema)
        twice = canonicalize(once, schema)
        assert once == twice, sql


def test_confluence_rule_order_smoke(schema):
    orders = [
        DEFAULT_RULESET,
        CanonRuleSet(tuple(reversed(DEFAULT_RULESET.rules))),
    ]
    rng = random.Random(11)
    shuffled = list(DEFAULT_RULESET.rules)
    rng.shuffle(shuffled)
    orders.append(CanonRuleSet(tuple(shuffled)))
    extra = [
        'SELECT DISTINCT p.id FROM Person p WHERE p.age BETWEEN 1 AND 9',
        "SELECT q.firstname FROM Person AS q JOIN Person AS r ON q.id = r.id "
        "WHERE 20 < r.age OR q.active IN ('T')",
        'SELECT firstname AS f FROM Person ORDER BY f DESC LIMIT 2',
    ]
    for sql in fx.ALL_FIXTURE_QUERIES + extra:
        forms = {canon_sql(sql, schema, ruleset) for ruleset in orders}
        assert len(forms) == 1, (sql, forms)


def test_confluence_on_randomized_corpus(schema):
    """Rule orders reach the same canonical form on generator-built queries."""
    from hypothesis import HealthCheck, given, settings
    from test_parser import _statements

    orders = [DEFAULT_RULESET,
              CanonRuleSet(tuple(reversed(DEFAULT_RULESET.rules)))]
    rng = random.Random(5)
    shuffled = list(DEFAULT_RULESET.rules)
    rng.shuffle(shuffled)
    orders.append(CanonRuleSet(tuple(shuffled)))

    collected = []

    @settings(max_examples=150, deadline=None,
              suppress_health_check=list(HealthCheck))
    @given(_statements())
    def collect(stmt):
        collected.append(stmt)

    collect()
    checked = 0
    for stmt in collected:
        try:
            resolved = parse_sql(to_sql(stmt), schema)
        except Exception:
            continue
        forms = {to_sql(canonicalize(resolved, schema, ruleset))
                 for ruleset in orders}
        assert len(forms) == 1, (to_sql(stmt), forms)
        checked += 1
    assert checked >= 60


def test_each_rule_is_execution_preserving(schema):
    """Brute force: every rule applied alone keeps results identical on
    randomized instances (row order included)."""
    rng = random.Random(20260809)
    instances = [random_instance(schema, rng) for _ in range(8)]
    try:
        for sql in fx.ALL_FIXTURE_QUERIES:
            original = parse_sql(sql, schema)
            for name, rule in RULES.items():
                rewritten = rule(original, schema)
                if rewritten == original:
                    continue
                for conn in instances:
                    want = execute_query(conn, sql)
                    got = execute_query(conn, to_sql(rewritten))
                    assert want.ok and got.ok, (sql, name)
                    out = compare_relations(want.relation, got.relation,
                                            RelaxationConfig())
                    assert out.matched, (sql, name, to_sql(rewritten), out.evidence)
    finally:
        for conn in instances:
            conn.close()


def test_distinct_drop_verified_by_execution(schema):
    """The redundant-DISTINCT rule specifically, against brute-force
    execution equality on randomized instances."""
    rng = random.Random(7)
    sql = 'SELECT DISTINCT id FROM Person'
    rewritten = to_sql(canonicalize(parse_sql(sql, schema), schema))
    assert 'DISTINCT' not in rewritten
    for _ in range(10):
        conn = random_instance(schema, rng)
        try:
            want = execute_query(conn, sql).relation
            got = execute_query(conn, rewritten).relation
            assert compare_relations(want, got, RelaxationConfig()).matched
        finally:
            conn.close()


def test_unsupported_construct_raises(schema):
    class Mystery:
        pass

    stmt = parse_sql('SELECT id FROM Person', schema)
    import dataclasses
    core = stmt.body
    bad_item = dataclasses.replace(core.items[0], expr=Mystery())
    bad = dataclasses.replace(
        stmt, body=dataclasses.replace(core, items=(bad_item,)))
    with pytest.raises(UnsupportedConstruct):
        canonicalize(bad, schema)


def test_unresolved_ast_is_rejected(schema):
    stmt = parse_statement('SELECT id FROM Person')
    with pytest.raises(PreconditionError):
        canonicalize(stmt, schema)


def test_ruleset_validation():
    with pytest.raises(ValueError):
        CanonRuleSet(())
    with pytest.raises(ValueError):
        CanonRuleSet(('nonesuch',))
    with pytest.raises(ValueError):
        CanonRuleSet(('fold_case',), max_passes=0)
