"""Controlled vocabulary for prediction/evaluation error causes.

Three top-level limitations (the solution itself, the evaluation data, the
evaluation metric) break down into the fixed set of rows below; a category is
only valid if it is one of these rows.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

TEXT2SQL_SOLUTION = 'Text2SQLSolution'
EVALUATION_DATA = 'EvaluationData'
EVALUATION_METRIC = 'EvaluationMetric'

# (level1, level2, level3-or-None)
TAXONOMY_ROWS = frozenset({
    (TEXT2SQL_SOLUTION, 'InputPreparation', 'MissingInformation'),
    (TEXT2SQL_SOLUTION, 'InputPreparation', 'SuboptimalPrompt'),
    (TEXT2SQL_SOLUTION, 'InferenceStep', 'ApiSystemFailures'),
    (TEXT2SQL_SOLUTION, 'InferenceStep', 'ModelMisprediction'),
    (TEXT2SQL_SOLUTION, 'ResultExtraction', None),
    (EVALUATION_DATA, 'LabelAccuracy', None),
    (EVALUATION_DATA, 'LabelCompleteness', 'DistinctVsNotDistinct'),
    (EVALUATION_DATA, 'LabelCompleteness', 'ProjectionClauses'),
    (EVALUATION_DATA, 'LabelCompleteness', 'FilterConditions'),
    (EVALUATION_DATA, 'LabelCompleteness', 'SchemaAmbiguity'),
    (EVALUATION_DATA, 'FeatureAccuracy', 'UnanswerableInputs'),
    (EVALUATION_DATA, 'FeatureAccuracy', 'WrongPresuppositions'),
    (EVALUATION_DATA, 'FeatureCompleteness', None),
    (EVALUATION_METRIC, 'SqlEquivalenceApproximation', 'SemanticMatch'),
    (EVALUATION_METRIC, 'SqlEquivalenceApproximation', 'ExecutionMatch'),
    (EVALUATION_METRIC, 'AmbiguityRelaxation', 'IgnoreRowOrder'),
    (EVALUATION_METRIC, 'AmbiguityRelaxation', 'IgnoreDuplicateRows'),
    (EVALUATION_METRIC, 'AmbiguityRelaxation', 'IgnoreResultTypes'),
    (EVALUATION_METRIC, 'AmbiguityRelaxation', 'IgnoreColumnOrder'),
    (EVALUATION_METRIC, 'AmbiguityRelaxation', 'FlattenRelation'),
    (EVALUATION_METRIC, 'AmbiguityRelaxation', 'TestForOverlapOnly'),
})


@dataclass(frozen=True)
class TaxonomyCategory:
    level1: str
    level2: str
    level3: Optional[str] = None

    def __post_init__(self):
        if (self.level1, self.level2, self.level3) not in TAXONOMY_ROWS:
            raise ValueError(
                f'not a taxonomy row: {self.level1}/{self.level2}/{self.level3}')

    def to_json(self) -> dict:
        return {'level1': self.level1, 'level2': self.level2, 'level3': self.level3}

    @classmethod
    def from_json(cls, data: dict) -> 'TaxonomyCategory':
        return cls(data['level1'], data['level2'], data.get('level3'))

    def __str__(self) -> str:
        parts = [self.level1, self.level2]
        if self.level3:
            parts.append(self.level3)
        return '/'.join(parts)


LABEL_ACCURACY = TaxonomyCategory(EVALUATION_DATA, 'LabelAccuracy')
WRONG_PRESUPPOSITIONS = TaxonomyCategory(EVALUATION_DATA, 'FeatureAccuracy',
                                         'WrongPresuppositions')
RESULT_EXTRACTION = TaxonomyCategory(TEXT2SQL_SOLUTION, 'ResultExtraction')
MODEL_MISPREDICTION = TaxonomyCategory(TEXT2SQL_SOLUTION, 'InferenceStep',
                                       'ModelMisprediction')
