"""Relation comparison under relaxation profiles and the execution matcher.

The comparison semantics, strictest first:

* all flags off: equal column count, row count, row order, and
  type-sensitive cell values (1 and 1.0 differ, '1' and 1 differ);
* r1 compares row multisets, r2 row sets (r2 subsumes r1);
* r3 coerces text to numbers where possible and compares reals within a
  relative tolerance; NULL only ever equals NULL;
* r4 searches for a column permutation of the right-hand relation, with
  per-column multiset signatures pruning the candidates;
* r5 flattens both relations into one multiset (set under r2) of cells;
* r6 accepts a column-subset projection of the wider relation matching the
  narrower one, both directions, and never matches empty results.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import math
from dataclasses import dataclass, field, fields, replace
from typing import Dict, List, Optional, Sequence, Tuple

from . import ast as A
from .errors import SearchBudgetExceeded
from .parser import parse_statement
from .relations import DEFAULT_TIMEOUT, Relation, execute_query

_PERMUTATION_BUDGET = math.factorial(8)
_TIE_CANDIDATE_CAP = 128


@dataclass(frozen=True)
class RelaxationConfig:
    r1_ignore_row_order: bool = False
    r2_ignore_duplicate_rows: bool = False
    r3_ignore_column_types: bool = False
    r4_ignore_column_order: bool = False
    r5_flatten_cells: bool = False
    r6_column_overlap: bool = False
    mode: str = 'fixed'  # 'fixed' | 'auto' (auto decides r1 per sample)
    float_rel_tolerance: float = 1e-6

    def digest(self) -> str:
        payload = {f.name: getattr(self, f.name) for f in fields(self)}
        blob = json.dumps(payload, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:12]


PRESETS: Dict[str, RelaxationConfig] = {
    # Row order decided per sample, column order ignored via schema mapping.
    'spider': RelaxationConfig(r1_ignore_row_order=True, r4_ignore_column_order=True,
                               mode='auto'),
    # Set comparison over all values: duplicates, column order and column
    # affiliation all ignored.
    'bird': RelaxationConfig(r1_ignore_row_order=True, r2_ignore_duplicate_rows=True,
                             r5_flatten_cells=True),
    'strict': RelaxationConfig(),
}


def preset(name: str) -> RelaxationConfig:
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f'unknown relaxation preset {name!r}') from None


@dataclass(frozen=True)
class MatchOutcome:
    matched: bool
    method: str  # 'semantic' | 'execution'
    config_digest: str
    evidence: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {'matched': self.matched, 'method': self.method,
                'config_digest': self.config_digest, 'evidence': self.evidence}


def resolve_auto_relaxations(gt: A.SelectStmt, base: RelaxationConfig) -> RelaxationConfig:
    """Fix r1 from the ground-truth query: order matters iff it has ORDER BY."""
    return replace(base, r1_ignore_row_order=not gt.order_by, mode='fixed')


# --- cell and row comparison --------------------------------------------------


def _coerce(cell, cfg: RelaxationConfig):
    if not cfg.r3_ignore_column_types or not isinstance(cell, str):
        return cell
    try:
        return int(cell)
    except ValueError:
        pass
    try:
        return float(cell)
    except ValueError:
        return cell


_TYPE_RANK = {int: 1, float: 1, str: 2, bytes: 3}


def _cell_key(cell):
    """Total-order key: rank, value, then int-before-float to keep the
    pairing deterministic for multiset comparison."""
    if cell is None:
        return (0, 0, 0)
    rank = _TYPE_RANK[type(cell)]
    if rank == 1:
        return (1, cell, 0 if isinstance(cell, int) else 1)
    return (rank, cell, 0)


def _row_key(row):
    return tuple(_cell_key(c) for c in row)


def _cell_eq(x, y, cfg: RelaxationConfig) -> bool:
    if x is None or y is None:
        return x is None and y is None
    if cfg.r3_ignore_column_types:
        if isinstance(x, (int, float)) and isinstance(y, (int, float)):
            if isinstance(x, int) and isinstance(y, int):
                return x == y
            return x == y or math.isclose(x, y, rel_tol=cfg.float_rel_tolerance)
        return type(x) is type(y) and x == y
    if type(x) is not type(y):
        return False
    if isinstance(x, float):
        return x == y
    return x == y


def _row_eq(a, b, cfg: RelaxationConfig) -> bool:
    return len(a) == len(b) and all(_cell_eq(x, y, cfg) for x, y in zip(a, b))


def _render_row(row):
    return [c.hex() if isinstance(c, bytes) else c for c in row]


def _dedup_sorted(rows, cfg: RelaxationConfig):
    out = []
    for row in rows:
        if out and _row_eq(out[-1], row, cfg):
            continue
        out.append(row)
    return out


def _compare_row_lists(rows_a, rows_b, cfg: RelaxationConfig):
    """Compare two row sequences under r1/r2/r3; returns (ok, evidence)."""
    rows_a = [tuple(_coerce(c, cfg) for c in r) for r in rows_a]
    rows_b = [tuple(_coerce(c, cfg) for c in r) for r in rows_b]
    unordered = cfg.r1_ignore_row_order or cfg.r2_ignore_duplicate_rows
    if unordered:
        rows_a = sorted(rows_a, key=_row_key)
        rows_b = sorted(rows_b, key=_row_key)
    if cfg.r2_ignore_duplicate_rows:
        rows_a = _dedup_sorted(rows_a, cfg)
        rows_b = _dedup_sorted(rows_b, cfg)
    if len(rows_a) != len(rows_b):
        reason = 'distinct_row_count_mismatch' if cfg.r2_ignore_duplicate_rows \
            else 'row_count_mismatch'
        return False, {'reason': reason, 'left_rows': len(rows_a), 'right_rows': len(rows_b)}
    for i, (ra, rb) in enumerate(zip(rows_a, rows_b)):
        if not _row_eq(ra, rb, cfg):
            return False, {
                'reason': 'row_multiset_mismatch' if unordered else 'row_mismatch',
                'row_index': i,
                'left_row': _render_row(ra),
                'right_row': _render_row(rb),
            }
    return True, {}


# --- column permutation search (r4) -------------------------------------------


def _column_signature(cells, cfg: RelaxationConfig):
    """Hashable per-column signature for permutation pruning, or None when
    tolerance comparison makes exact signatures unsafe (floats under r3).

    The signature granularity must mirror the row comparison: ordered tuple
    when row order matters, multiset under r1, deduplicated set under r2.
    """
    coerced = [_coerce(c, cfg) for c in cells]
    if cfg.r3_ignore_column_types and any(isinstance(c, float) for c in coerced):
        return None
    keys = [_cell_key(c) for c in coerced]
    if cfg.r2_ignore_duplicate_rows:
        return tuple(sorted(set(keys)))
    if cfg.r1_ignore_row_order:
        return tuple(sorted(keys))
    return tuple(keys)


def _find_column_permutation(a: Relation, b: Relation, cfg: RelaxationConfig):
    n = a.n_columns
    cols_a = [[row[i] for row in a.rows] for i in range(n)]
    cols_b = [[row[i] for row in b.rows] for i in range(n)]
    sig_a = [_column_signature(c, cfg) for c in cols_a]
    sig_b = [_column_signature(c, cfg) for c in cols_b]
    candidates = []
    for i in range(n):
        cand = [j for j in range(n)
                if sig_a[i] is None or sig_b[j] is None or sig_a[i] == sig_b[j]]
        if not cand:
            return None, 0
        candidates.append(cand)
    if n > 8:
        space = 1
        for cand in candidates:
            space *= len(cand)
            if space > _PERMUTATION_BUDGET:
                raise SearchBudgetExceeded(
                    f'column permutation space for {n} columns exceeds '
                    f'{_PERMUTATION_BUDGET} candidates')
    order = sorted(range(n), key=lambda i: (len(candidates[i]), i))
    assignment: Dict[int, int] = {}
    used = set()
    checked = 0

    def backtrack(pos: int):
        nonlocal checked
        if pos == n:
            perm = tuple(assignment[i] for i in range(n))
            checked += 1
            permuted = b.project(perm)
            ok, _ = _compare_row_lists(a.rows, permuted.rows, cfg)
            return perm if ok else None
        i = order[pos]
        for j in candidates[i]:
            if j in used:
                continue
            assignment[i] = j
            used.add(j)
            found = backtrack(pos + 1)
            if found is not None:
                return found
            used.discard(j)
            del assignment[i]
        return None

    return backtrack(0), checked


# --- top-level comparison ------------------------------------------------------


def compare_relations(a: Relation, b: Relation, cfg: RelaxationConfig) -> MatchOutcome:
    digest = cfg.digest()

    def outcome(matched: bool, evidence: dict) -> MatchOutcome:
        return MatchOutcome(matched, 'execution', digest, evidence)

    if cfg.r6_column_overlap:
        return _compare_overlap(a, b, cfg, outcome)
    matched, evidence = _compare_core(a, b, cfg)
    return outcome(matched, evidence)


def _compare_core(a: Relation, b: Relation, cfg: RelaxationConfig):
    """Comparison with every flag except r6 honored."""
    if cfg.r5_flatten_cells:
        cells_a = [_coerce(c, cfg) for row in a.rows for c in row]
        cells_b = [_coerce(c, cfg) for row in b.rows for c in row]
        cells_a = sorted(cells_a, key=_cell_key)
        cells_b = sorted(cells_b, key=_cell_key)
        if cfg.r2_ignore_duplicate_rows:
            cells_a = [c[0] for c in _dedup_sorted([(c,) for c in cells_a], cfg)]
            cells_b = [c[0] for c in _dedup_sorted([(c,) for c in cells_b], cfg)]
        if len(cells_a) != len(cells_b):
            return False, {'reason': 'flattened_cell_count_mismatch',
                           'left_cells': len(cells_a), 'right_cells': len(cells_b)}
        for i, (x, y) in enumerate(zip(cells_a, cells_b)):
            if not _cell_eq(x, y, cfg):
                return False, {'reason': 'flattened_cell_mismatch', 'cell_index': i,
                               'left': _render_row([x])[0], 'right': _render_row([y])[0]}
        return True, {'flattened': True}
    if a.n_columns != b.n_columns:
        return False, {'reason': 'column_count_mismatch',
                       'left_columns': a.n_columns, 'right_columns': b.n_columns}
    if cfg.r4_ignore_column_order:
        perm, checked = _find_column_permutation(a, b, cfg)
        if perm is None:
            return False, {'reason': 'search exhausted',
                           'detail': 'no column permutation matches',
                           'permutations_checked': checked}
        return True, {'column_permutation': [j + 1 for j in perm]}
    return _compare_row_lists(a.rows, b.rows, cfg)


def _compare_overlap(a: Relation, b: Relation, cfg: RelaxationConfig, outcome):
    # Overlap on empty results is vacuous, so r6 never matches them.
    if a.n_rows == 0 or b.n_rows == 0:
        return outcome(False, {'reason': 'empty_result_guard'})
    inner = replace(cfg, r6_column_overlap=False)
    matched, evidence = _compare_core(a, b, inner)
    if matched or a.n_columns == b.n_columns:
        evidence = dict(evidence)
        evidence.setdefault('projection', 'identity')
        return outcome(matched, evidence)
    if a.n_columns > b.n_columns:
        wide, narrow, direction = a, b, 'right_subset_of_left'
    else:
        wide, narrow, direction = b, a, 'left_subset_of_right'
    last_evidence: dict = {}
    for combo in itertools.combinations(range(wide.n_columns), narrow.n_columns):
        projected = wide.project(combo)
        if direction == 'right_subset_of_left':
            matched, evidence = _compare_core(projected, narrow, inner)
        else:
            matched, evidence = _compare_core(narrow, projected, inner)
        if matched:
            evidence = dict(evidence)
            evidence['projection'] = {'direction': direction,
                                      'columns': [i + 1 for i in combo]}
            return outcome(True, evidence)
        last_evidence = evidence
    return outcome(False, {'reason': 'search exhausted',
                           'detail': 'no column subset projection matches',
                           'last_failure': last_evidence})


# --- top-k template and tie expansion ------------------------------------------


def topk_template(stmt: A.SelectStmt) -> Optional[Tuple[int, Tuple[A.OrderItem, ...]]]:
    """(k, order terms) when the outermost query ends with ORDER BY + LIMIT k
    and no OFFSET, else None."""
    if not stmt.order_by or stmt.limit is None or stmt.offset is not None:
        return None
    if not isinstance(stmt.limit, A.Literal) or not isinstance(stmt.limit.value, int):
        return None
    return stmt.limit.value, stmt.order_by


def _order_key_positions(stmt: A.SelectStmt):
    """Map each ORDER BY term to an existing projection index or mark it for
    appending.  Returns (positions, exprs_to_append) or None when the body
    shape rules expansion out."""
    if not isinstance(stmt.body, A.SelectCore):
        return None
    core = stmt.body
    if any(isinstance(item.expr, A.Star) for item in core.items):
        return None
    alias_index = {item.alias.lower(): i for i, item in enumerate(core.items) if item.alias}
    expr_index = {item.expr: i for i, item in enumerate(core.items)}
    positions: List[Tuple[str, int]] = []
    to_append: List[A.Expr] = []
    for term in stmt.order_by:
        expr = term.expr
        if isinstance(expr, A.Literal) and isinstance(expr.value, int):
            idx = expr.value - 1
            if not 0 <= idx < len(core.items):
                return None
            positions.append(('proj', idx))
            continue
        if isinstance(expr, A.ColumnRef) and expr.table is None \
                and expr.column.lower() in alias_index:
            positions.append(('proj', alias_index[expr.column.lower()]))
            continue
        if expr in expr_index:
            positions.append(('proj', expr_index[expr]))
            continue
        if core.distinct:
            # The engine rejects DISTINCT with non-projected sort terms, so
            # this shape should not occur; bail out rather than guess.
            return None
        positions.append(('appended', len(to_append)))
        to_append.append(expr)
    return positions, to_append


def tie_expansion_candidates(gt_stmt: A.SelectStmt, gt_relation: Relation,
                             db_instance, timeout: float) -> Optional[List[Relation]]:
    """All defensible k-row results when the top-k template cuts into a tie
    group.  None when expansion does not apply (caller falls back to the
    single observed candidate)."""
    info = topk_template(gt_stmt)
    if info is None:
        return None
    k, _ = info
    if k < 0:
        return None
    keyed = _order_key_positions(gt_stmt)
    if keyed is None:
        return None
    positions, to_append = keyed
    core = gt_stmt.body
    probe_core = replace(core, items=core.items + tuple(A.SelectItem(e) for e in to_append))
    probe = replace(gt_stmt, body=probe_core, limit=None, offset=None)
    result = execute_query(db_instance, A.to_sql(probe), timeout)
    if not result.ok:
        return None
    full = result.relation
    n_out = gt_relation.n_columns
    if full.n_columns != n_out + len(to_append):
        return None

    def sort_key(row):
        key = []
        for kind, idx in positions:
            cell = row[idx] if kind == 'proj' else row[n_out + idx]
            key.append(cell)
        return tuple(key)

    rows = list(full.rows)
    if len(rows) <= k:
        return [Relation.from_rows(gt_relation.column_names,
                                   [r[:n_out] for r in rows])]
    groups: List[List[tuple]] = []
    for row in rows:
        if groups and sort_key(groups[-1][0]) == sort_key(row):
            groups[-1].append(row)
        else:
            groups.append([row])
    mandatory: List[tuple] = []
    boundary: List[tuple] = []
    for group in groups:
        if len(mandatory) + len(group) <= k:
            mandatory.extend(group)
            if len(mandatory) == k:
                boundary = []
                break
        else:
            boundary = group
            break
    need = k - len(mandatory)
    if need == 0:
        return [Relation.from_rows(gt_relation.column_names,
                                   [r[:n_out] for r in mandatory])]
    if math.comb(len(boundary), need) > _TIE_CANDIDATE_CAP:
        return None
    candidates = []
    for combo in itertools.combinations(boundary, need):
        chosen = mandatory + list(combo)
        candidates.append(Relation.from_rows(gt_relation.column_names,
                                             [r[:n_out] for r in chosen]))
    return candidates


# --- execution match -----------------------------------------------------------


def execution_match(gt_sql: str, pred_sql: str, db_instances: Sequence,
                    cfg: RelaxationConfig, timeout: float = DEFAULT_TIMEOUT,
                    expand_ties: bool = True) -> MatchOutcome:
    """matched iff the two queries' results compare equal on every instance.

    A ground-truth execution error flags the outcome ``gt_unexecutable``; a
    prediction error is a mismatch with the error as evidence.  When the
    ground truth is a top-k template query, the prediction is accepted if it
    matches any tie-expansion candidate of the ground-truth result.
    """
    if not db_instances:
        raise ValueError('execution_match requires at least one database instance')
    gt_stmt = None
    try:
        gt_stmt = parse_statement(gt_sql)
    except Exception:
        pass
    if cfg.mode == 'auto':
        resolved_cfg = resolve_auto_relaxations(gt_stmt, cfg) if gt_stmt is not None \
            else replace(cfg, mode='fixed')
    else:
        resolved_cfg = cfg
    evidence: dict = {'instances': len(db_instances), 'base_config': cfg.digest()}
    digest = resolved_cfg.digest()
    gt_ran = False
    for index, instance in enumerate(db_instances):
        gt_result = execute_query(instance, gt_sql, timeout)
        if not gt_result.ok:
            evidence['gt_unexecutable'] = True
            evidence.setdefault('gt_errors', []).append(
                {'instance': index, 'kind': gt_result.error.kind,
                 'message': gt_result.error.message})
            continue
        gt_ran = True
        if gt_result.relation.n_rows == 0:
            evidence['empty_gt_result'] = True
        pred_result = execute_query(instance, pred_sql, timeout)
        if not pred_result.ok:
            evidence['prediction_error'] = {'instance': index,
                                            'kind': pred_result.error.kind,
                                            'message': pred_result.error.message}
            return MatchOutcome(False, 'execution', digest, evidence)
        out = compare_relations(gt_result.relation, pred_result.relation, resolved_cfg)
        if not out.matched and expand_ties and gt_stmt is not None:
            matched_tie = _try_tie_expansion(gt_stmt, gt_result.relation,
                                             pred_result.relation, instance,
                                             resolved_cfg, timeout, evidence)
            if matched_tie:
                continue
        if not out.matched:
            evidence['instance'] = index
            evidence['comparison'] = out.evidence
            return MatchOutcome(False, 'execution', digest, evidence)
        evidence.setdefault('comparison', out.evidence)
    if not gt_ran:
        evidence.setdefault('reason', 'ground truth executable on no instance')
        return MatchOutcome(False, 'execution', digest, evidence)
    return MatchOutcome(True, 'execution', digest, evidence)


def _try_tie_expansion(gt_stmt, gt_relation, pred_relation, instance,
                       cfg: RelaxationConfig, timeout: float, evidence: dict) -> bool:
    if topk_template(gt_stmt) is None:
        if gt_stmt.limit is not None:
            # LIMIT outside the recognized template may be nondeterministic;
            # the single-candidate comparison is all we can offer.
            evidence['tie_expansion'] = 'not applicable; single candidate compared'
        return False
    candidates = tie_expansion_candidates(gt_stmt, gt_relation, instance, timeout)
    if candidates is None:
        evidence['tie_expansion'] = 'not applicable; single candidate compared'
        return False
    for i, candidate in enumerate(candidates):
        out = compare_relations(candidate, pred_relation, cfg)
        if out.matched:
            evidence['tie_expansion'] = {'candidates': len(candidates), 'matched': i}
            evidence['comparison'] = out.evidence
            return True
    evidence['tie_expansion'] = {'candidates': len(candidates), 'matched': None}
    return False
