"""Approximate SQL equivalence by canonical-form comparison.

A declared match means both canonical forms are structurally identical (alias
naming is already positional after canonicalization).  Anything the rewriter
cannot handle yields a non-match, never a match, so the matcher's bias is
toward false negatives.
"""

from __future__ import annotations

import dataclasses
from typing import Optional

from . import ast as A
from .canon import DEFAULT_RULESET, CanonRuleSet, canonicalize
from .errors import UnsupportedConstruct
from .matching import MatchOutcome
from .schema import SchemaDef


def ast_diff_path(a, b, path: str = '$') -> Optional[str]:
    """Dotted path of the first structural divergence, or None when equal.

    Fields excluded from dataclass equality (resolution metadata) are
    skipped, mirroring ``==`` on the nodes themselves.
    """
    if a == b:
        return None
    if type(a) is not type(b):
        return path
    if dataclasses.is_dataclass(a) and not isinstance(a, type):
        for f in dataclasses.fields(a):
            if not f.compare:
                continue
            sub = ast_diff_path(getattr(a, f.name), getattr(b, f.name),
                                f'{path}.{f.name}')
            if sub is not None:
                return sub
        return None
    if isinstance(a, tuple):
        if len(a) != len(b):
            return f'{path}.length'
        for i, (x, y) in enumerate(zip(a, b)):
            sub = ast_diff_path(x, y, f'{path}[{i}]')
            if sub is not None:
                return sub
        return None
    return path


def semantic_match(gt: A.SelectStmt, pred: A.SelectStmt, schema: SchemaDef,
                   rules: CanonRuleSet = DEFAULT_RULESET) -> MatchOutcome:
    """matched iff both canonical forms are structurally equal."""
    digest = rules.digest()
    try:
        canon_gt = canonicalize(gt, schema, rules)
        canon_pred = canonicalize(pred, schema, rules)
    except UnsupportedConstruct as exc:
        return MatchOutcome(False, 'semantic', digest,
                            {'reason': 'unsupported', 'detail': str(exc)})
    if canon_gt == canon_pred:
        return MatchOutcome(True, 'semantic', digest,
                            {'canonical': A.to_sql(canon_gt)})
    path = ast_diff_path(canon_gt, canon_pred)
    return MatchOutcome(False, 'semantic', digest, {
        'reason': 'canonical_forms_differ',
        'diverges_at': path or '$',
        'left_canonical': A.to_sql(canon_gt),
        'right_canonical': A.to_sql(canon_pred),
    })


def semantic_match_sql(gt_sql: str, pred_sql: str, schema: SchemaDef,
                       rules: CanonRuleSet = DEFAULT_RULESET) -> MatchOutcome:
    """Convenience wrapper parsing both sides; parse or resolution failures
    on either side are non-matches with the failure as evidence."""
    from .errors import ParseError, ResolutionError
    from .parser import parse_sql
    digest = rules.digest()
    try:
        gt = parse_sql(gt_sql, schema)
        pred = parse_sql(pred_sql, schema)
    except (ParseError, ResolutionError) as exc:
        return MatchOutcome(False, 'semantic', digest,
                            {'reason': 'unparseable', 'detail': str(exc)})
    return semantic_match(gt, pred, schema, rules)
