"""Taxonomy vocabulary validation."""

from __future__ import annotations

import pytest

from sqleval.taxonomy import TAXONOMY_ROWS, TaxonomyCategory


def test_every_row_constructs():
    for level1, level2, level3 in TAXONOMY_ROWS:
        category = TaxonomyCategory(level1, level2, level3)
        assert TaxonomyCategory.from_json(category.to_json()) == category


def test_level1_values_are_the_three_limitations():
    assert {row[0] for row in TAXONOMY_ROWS} == \
        {'Text2SQLSolution', 'EvaluationData', 'EvaluationMetric'}


def test_six_relaxation_rows_exist():
    relaxations = {row[2] for row in TAXONOMY_ROWS
                   if row[1] == 'AmbiguityRelaxation'}
    assert relaxations == {'IgnoreRowOrder', 'IgnoreDuplicateRows',
                           'IgnoreResultTypes', 'IgnoreColumnOrder',
                           'FlattenRelation', 'TestForOverlapOnly'}


def test_invalid_triples_rejected():
    with pytest.raises(ValueError):
        TaxonomyCategory('EvaluationData', 'LabelAccuracy', 'Bogus')
    with pytest.raises(ValueError):
        TaxonomyCategory('EvaluationData', 'Nonsense')
    with pytest.raises(ValueError):
        TaxonomyCategory('Text2SQLSolution', 'ResultExtraction', 'Anything')


def test_level3_absent_only_where_table_says_so():
    no_level3 = {(r[0], r[1]) for r in TAXONOMY_ROWS if r[2] is None}
    assert no_level3 == {('Text2SQLSolution', 'ResultExtraction'),
                        ('EvaluationData', 'LabelAccuracy'),
                        ('EvaluationData', 'FeatureCompleteness')}
