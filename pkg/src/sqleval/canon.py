"""Semantics-preserving canonicalization of resolved query ASTs.

Each rule is a pure AST-to-AST function that preserves execution results on
every valid instance; ``canonicalize`` iterates the configured rules to a
bounded fixpoint.  Node kinds outside the rewriters' dispatch raise
UnsupportedConstruct so callers can treat the query as undecidable instead
of unequal.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, replace
from typing import Callable, Dict, List, Optional, Tuple

from . import ast as A
from .errors import PreconditionError, UnsupportedConstruct
from .schema import SchemaDef


@dataclass(frozen=True)
class CanonRuleSet:
    rules: Tuple[str, ...]
    max_passes: int = 8

    def __post_init__(self):
        if not self.rules:
            raise ValueError('rule list must not be empty')
        if self.max_passes < 1:
            raise ValueError('max_passes must be positive')
        unknown = [r for r in self.rules if r not in RULES]
        if unknown:
            raise ValueError(f'unknown canonicalization rules: {unknown}')

    def digest(self) -> str:
        blob = json.dumps({'rules': list(self.rules),
                           'max_passes': self.max_passes}).encode()
        return hashlib.sha256(blob).hexdigest()[:12]


# --- generic traversal ----------------------------------------------------------


def _map_expr(expr: A.Expr, fn: Callable[[A.Expr], A.Expr],
              stmt_fn: Callable[[A.SelectStmt], A.SelectStmt]) -> A.Expr:
    """Postorder rewrite of an expression; subqueries go through ``stmt_fn``."""
    rec = lambda e: _map_expr(e, fn, stmt_fn)
    if isinstance(expr, (A.Literal, A.ColumnRef, A.Star)):
        return fn(expr)
    if isinstance(expr, A.Unary):
        return fn(replace(expr, operand=rec(expr.operand)))
    if isinstance(expr, A.Binary):
        return fn(replace(expr, left=rec(expr.left), right=rec(expr.right)))
    if isinstance(expr, A.Conjunction):
        return fn(replace(expr, operands=tuple(rec(o) for o in expr.operands)))
    if isinstance(expr, A.FuncCall):
        return fn(replace(expr, args=tuple(rec(a) for a in expr.args)))
    if isinstance(expr, A.InList):
        return fn(replace(expr, expr=rec(expr.expr), items=tuple(rec(i) for i in expr.items)))
    if isinstance(expr, A.InSubquery):
        return fn(replace(expr, expr=rec(expr.expr), query=stmt_fn(expr.query)))
    if isinstance(expr, A.Between):
        return fn(replace(expr, expr=rec(expr.expr), low=rec(expr.low), high=rec(expr.high)))
    if isinstance(expr, A.IsNull):
        return fn(replace(expr, expr=rec(expr.expr)))
    if isinstance(expr, A.Exists):
        return fn(replace(expr, query=stmt_fn(expr.query)))
    if isinstance(expr, A.Case):
        operand = rec(expr.operand) if expr.operand is not None else None
        whens = tuple((rec(c), rec(r)) for c, r in expr.whens)
        default = rec(expr.default) if expr.default is not None else None
        return fn(replace(expr, operand=operand, whens=whens, default=default))
    if isinstance(expr, A.Cast):
        return fn(replace(expr, expr=rec(expr.expr)))
    if isinstance(expr, A.Subquery):
        return fn(replace(expr, query=stmt_fn(expr.query)))
    raise UnsupportedConstruct(f'no canonical form for {type(expr).__name__}')


def _map_stmt_exprs(stmt: A.SelectStmt, fn: Callable[[A.Expr], A.Expr]) -> A.SelectStmt:
    """Apply ``fn`` postorder to every expression in the statement tree."""

    def on_stmt(s: A.SelectStmt) -> A.SelectStmt:
        body = on_body(s.body)
        order_by = tuple(replace(t, expr=_map_expr(t.expr, fn, on_stmt))
                         for t in s.order_by)
        limit = _map_expr(s.limit, fn, on_stmt) if s.limit is not None else None
        offset = _map_expr(s.offset, fn, on_stmt) if s.offset is not None else None
        return replace(s, body=body, order_by=order_by, limit=limit, offset=offset)

    def on_body(body: A.QueryExpr) -> A.QueryExpr:
        if isinstance(body, A.SetOp):
            return replace(body, left=on_body(body.left), right=on_body(body.right))
        if not isinstance(body, A.SelectCore):
            raise UnsupportedConstruct(f'no canonical form for {type(body).__name__}')
        return on_core(body)

    def on_core(core: A.SelectCore) -> A.SelectCore:
        items = tuple(replace(i, expr=_map_expr(i.expr, fn, on_stmt)) for i in core.items)
        source = on_source(core.source) if core.source is not None else None
        where = _map_expr(core.where, fn, on_stmt) if core.where is not None else None
        group_by = tuple(_map_expr(e, fn, on_stmt) for e in core.group_by)
        having = _map_expr(core.having, fn, on_stmt) if core.having is not None else None
        return replace(core, items=items, source=source, where=where,
                       group_by=group_by, having=having)

    def on_source(source: A.Source) -> A.Source:
        if isinstance(source, A.TableRef):
            return source
        if isinstance(source, A.SubquerySource):
            return replace(source, query=on_stmt(source.query))
        if isinstance(source, A.Join):
            condition = _map_expr(source.condition, fn, on_stmt) \
                if source.condition is not None else None
            return replace(source, left=on_source(source.left),
                           right=on_source(source.right), condition=condition)
        raise UnsupportedConstruct(f'no canonical form for {type(source).__name__}')

    return on_stmt(stmt)


def _map_cores(stmt: A.SelectStmt, fn: Callable[[A.SelectCore], A.SelectCore]) -> A.SelectStmt:
    """Apply ``fn`` to every select core, innermost subqueries first."""
    ident = lambda e: e

    def on_stmt(s: A.SelectStmt) -> A.SelectStmt:
        body = on_body(s.body)
        order_by = tuple(replace(t, expr=_map_expr(t.expr, ident, on_stmt))
                         for t in s.order_by)
        return replace(s, body=body, order_by=order_by)

    def on_body(body: A.QueryExpr) -> A.QueryExpr:
        if isinstance(body, A.SetOp):
            return replace(body, left=on_body(body.left), right=on_body(body.right))
        core = body
        items = tuple(replace(i, expr=_map_expr(i.expr, ident, on_stmt)) for i in core.items)
        source = on_source(core.source) if core.source is not None else None
        where = _map_expr(core.where, ident, on_stmt) if core.where is not None else None
        group_by = tuple(_map_expr(e, ident, on_stmt) for e in core.group_by)
        having = _map_expr(core.having, ident, on_stmt) if core.having is not None else None
        return fn(replace(core, items=items, source=source, where=where,
                          group_by=group_by, having=having))

    def on_source(source: A.Source) -> A.Source:
        if isinstance(source, A.TableRef):
            return source
        if isinstance(source, A.SubquerySource):
            return replace(source, query=on_stmt(source.query))
        if isinstance(source, A.Join):
            condition = _map_expr(source.condition, ident, on_stmt) \
                if source.condition is not None else None
            return replace(source, left=on_source(source.left),
                           right=on_source(source.right), condition=condition)
        raise UnsupportedConstruct(f'no canonical form for {type(source).__name__}')

    return on_stmt(stmt)


# --- rule 1: case folding -------------------------------------------------------


def rule_fold_case(stmt: A.SelectStmt, schema: SchemaDef) -> A.SelectStmt:
    def fold(expr: A.Expr) -> A.Expr:
        if isinstance(expr, A.ColumnRef):
            # lowercase the spelling as written: resolution is
            # case-insensitive, so this equals the schema spelling lowered,
            # and it never reverts renames applied by other rules
            lowered = expr.column.lower()
            table = expr.table.lower() if expr.table else None
            if lowered != expr.column or table != expr.table:
                return replace(expr, table=table, column=lowered)
            return expr
        if isinstance(expr, A.FuncCall) and expr.name != expr.name.lower():
            return replace(expr, name=expr.name.lower())
        if isinstance(expr, A.Star) and expr.table and expr.table != expr.table.lower():
            return replace(expr, table=expr.table.lower())
        return expr

    stmt = _map_stmt_exprs(stmt, fold)

    def fold_core(core: A.SelectCore) -> A.SelectCore:
        if core.source is None:
            return core
        return replace(core, source=_fold_source(core.source))

    def _fold_source(source: A.Source) -> A.Source:
        if isinstance(source, A.TableRef):
            name = (source.schema_name or source.name).lower()
            alias = source.alias.lower() if source.alias else None
            if name != source.name or alias != source.alias:
                return replace(source, name=name, alias=alias)
            return source
        if isinstance(source, A.SubquerySource):
            alias = source.alias.lower() if source.alias else None
            return source if alias == source.alias else replace(source, alias=alias)
        return replace(source, left=_fold_source(source.left),
                       right=_fold_source(source.right))

    return _map_cores(stmt, fold_core)


# --- rule 2: positional aliases --------------------------------------------------


def _scope_sources(source: Optional[A.Source], out: List) -> None:
    if source is None:
        return
    if isinstance(source, A.Join):
        _scope_sources(source.left, out)
        _scope_sources(source.right, out)
    else:
        out.append(source)


def rule_normalize_aliases(stmt: A.SelectStmt, schema: SchemaDef) -> A.SelectStmt:
    """Rename table aliases to global positional names, qualify every bound
    column reference, inline alias/ordinal references in ORDER BY and GROUP
    BY, and drop projection aliases (derived-table outputs become c1..cn)."""
    counter = [0]
    alias_of: Dict[int, str] = {}
    output_alias: Dict[Tuple[int, str], str] = {}

    def on_stmt(s: A.SelectStmt, top: bool) -> A.SelectStmt:
        body = on_body(s.body)
        items = _leftmost_items(body)
        order_by = tuple(replace(t, expr=on_order_expr(t.expr, items))
                         for t in s.order_by)
        limit = on_expr(s.limit) if s.limit is not None else None
        offset = on_expr(s.offset) if s.offset is not None else None
        return replace(s, body=body, order_by=order_by, limit=limit, offset=offset)

    def _leftmost_items(body: A.QueryExpr):
        while isinstance(body, A.SetOp):
            body = body.left
        return body.items

    def on_body(body: A.QueryExpr) -> A.QueryExpr:
        if isinstance(body, A.SetOp):
            return replace(body, left=on_body(body.left), right=on_body(body.right))
        return on_core(body)

    def on_core(core: A.SelectCore) -> A.SelectCore:
        source = on_source(core.source) if core.source is not None else None
        items = tuple(replace(i, expr=on_expr(i.expr), alias=None) for i in core.items)
        where = on_expr(core.where) if core.where is not None else None
        group_by = tuple(on_order_expr(e, items) for e in core.group_by)
        having = on_expr(core.having) if core.having is not None else None
        return replace(core, items=items, source=source, where=where,
                       group_by=group_by, having=having)

    def on_source(source: A.Source) -> A.Source:
        if isinstance(source, A.Join):
            condition = on_expr(source.condition) if source.condition is not None else None
            return replace(source, left=on_source(source.left),
                           right=on_source(source.right), condition=condition)
        counter[0] += 1
        alias = f't{counter[0]}'
        if isinstance(source, A.TableRef):
            if source.source_id is not None:
                alias_of[source.source_id] = alias
            return replace(source, alias=alias)
        # derived table: canonicalize inner query first, then rename its
        # outputs positionally so outer references survive alias dropping
        inner = on_stmt(source.query, top=False)
        outputs = _output_names(source.query)
        core = _only_core(inner)
        if core is not None and not any(isinstance(i.expr, A.Star) for i in core.items):
            renamed = tuple(replace(item, alias=f'c{pos + 1}')
                            for pos, item in enumerate(core.items))
            inner = replace(inner, body=replace(core, items=renamed))
            if source.source_id is not None:
                for pos, name in enumerate(outputs):
                    if name is not None:
                        output_alias[(source.source_id, name)] = f'c{pos + 1}'
        if source.source_id is not None:
            alias_of[source.source_id] = alias
        return replace(source, query=inner, alias=alias)

    def _only_core(s: A.SelectStmt) -> Optional[A.SelectCore]:
        return s.body if isinstance(s.body, A.SelectCore) else None

    def _output_names(s: A.SelectStmt):
        body = s.body
        while isinstance(body, A.SetOp):
            body = body.left
        names = []
        for item in body.items:
            if item.alias:
                names.append(item.alias.lower())
            elif isinstance(item.expr, A.ColumnRef):
                names.append(item.expr.column.lower())
            else:
                names.append(None)
        return names

    def rewrite_ref(expr: A.ColumnRef) -> A.Expr:
        binding = expr.binding
        if isinstance(binding, A.BoundColumn) and binding.source_id in alias_of:
            alias = alias_of[binding.source_id]
            column = expr.column
            renamed = output_alias.get((binding.source_id, column.lower()))
            if renamed is not None:
                column = renamed
            if expr.table != alias or expr.column != column:
                return replace(expr, table=alias, column=column)
        return expr

    def on_expr(expr: A.Expr) -> A.Expr:
        def fn(e: A.Expr) -> A.Expr:
            if isinstance(e, A.ColumnRef):
                return rewrite_ref(e)
            if isinstance(e, A.Star) and e.source_id in alias_of:
                alias = alias_of[e.source_id]
                return e if e.table == alias else replace(e, table=alias)
            return e
        return _map_expr(expr, fn, lambda s: on_stmt(s, top=False))

    def on_order_expr(expr: A.Expr, items) -> A.Expr:
        if isinstance(expr, A.Literal) and isinstance(expr.value, int):
            idx = expr.value - 1
            if 0 <= idx < len(items):
                return items[idx].expr
            return expr
        if isinstance(expr, A.ColumnRef) and isinstance(expr.binding, A.BoundAlias):
            idx = expr.binding.index
            if 0 <= idx < len(items):
                return items[idx].expr
        return on_expr(expr)

    return on_stmt(stmt, top=True)


# --- rule 3: boolean flattening and ordering --------------------------------------


def rule_flatten_bool(stmt: A.SelectStmt, schema: SchemaDef) -> A.SelectStmt:
    def fold(expr: A.Expr) -> A.Expr:
        if not isinstance(expr, A.Conjunction):
            return expr
        flat: List[A.Expr] = []
        for op in expr.operands:
            if isinstance(op, A.Conjunction) and op.op == expr.op:
                flat.extend(op.operands)
            else:
                flat.append(op)
        seen = set()
        unique: List[A.Expr] = []
        for op in sorted(flat, key=A.expr_sql):
            key = A.expr_sql(op)
            if key in seen:
                continue
            seen.add(key)
            unique.append(op)
        if len(unique) == 1:
            return unique[0]
        return replace(expr, operands=tuple(unique))

    return _map_stmt_exprs(stmt, fold)


# --- rule 4: comparison orientation ----------------------------------------------

_MIRROR = {'<': '>', '<=': '>=', '>': '<', '>=': '<=', '=': '=', '!=': '!='}


def _operand_rank(expr: A.Expr):
    return (1 if isinstance(expr, A.Literal) else 0, A.expr_sql(expr))


def rule_orient_comparisons(stmt: A.SelectStmt, schema: SchemaDef) -> A.SelectStmt:
    def orient(expr: A.Expr) -> A.Expr:
        if isinstance(expr, A.Binary) and expr.op in _MIRROR:
            if _operand_rank(expr.left) > _operand_rank(expr.right):
                return A.Binary(_MIRROR[expr.op], expr.right, expr.left)
        return expr

    return _map_stmt_exprs(stmt, orient)


# --- rule 5: IN normalization -----------------------------------------------------


def rule_normalize_in(stmt: A.SelectStmt, schema: SchemaDef) -> A.SelectStmt:
    def fold(expr: A.Expr) -> A.Expr:
        if not isinstance(expr, A.InList):
            return expr
        seen = set()
        items: List[A.Expr] = []
        for item in sorted(expr.items, key=A.expr_sql):
            key = A.expr_sql(item)
            if key in seen:
                continue
            seen.add(key)
            items.append(item)
        if len(items) == 1:
            op = '!=' if expr.negated else '='
            return A.Binary(op, expr.expr, items[0])
        return replace(expr, items=tuple(items))

    return _map_stmt_exprs(stmt, fold)


# --- rule 6: BETWEEN expansion ----------------------------------------------------


def rule_expand_between(stmt: A.SelectStmt, schema: SchemaDef) -> A.SelectStmt:
    def fold(expr: A.Expr) -> A.Expr:
        if not isinstance(expr, A.Between):
            return expr
        low = A.Binary('>=', expr.expr, expr.low)
        high = A.Binary('<=', expr.expr, expr.high)
        if expr.negated:
            return A.Conjunction('OR', (A.Binary('<', expr.expr, expr.low),
                                        A.Binary('>', expr.expr, expr.high)))
        return A.Conjunction('AND', (low, high))

    return _map_stmt_exprs(stmt, fold)


# --- rules 7+8: join normalization and operand sorting ----------------------------


def _flatten_inner_joins(source: A.Source):
    """(atoms, conditions) for a tree of inner/cross joins; None when the
    tree contains an outer join (left untouched for safety)."""
    if isinstance(source, (A.TableRef, A.SubquerySource)):
        return [source], []
    if isinstance(source, A.Join):
        if source.kind == 'left':
            return None
        left = _flatten_inner_joins(source.left)
        right = _flatten_inner_joins(source.right)
        if left is None or right is None:
            return None
        atoms = left[0] + right[0]
        conds = left[1] + right[1]
        if source.condition is not None:
            conds.append(source.condition)
        return atoms, conds
    raise UnsupportedConstruct(f'no canonical form for {type(source).__name__}')


def _rebuild_chain(atoms: List[A.Source]) -> A.Source:
    built = atoms[0]
    for atom in atoms[1:]:
        built = A.Join(built, atom, kind='cross', condition=None)
    return built


def rule_normalize_joins(stmt: A.SelectStmt, schema: SchemaDef) -> A.SelectStmt:
    def on_core(core: A.SelectCore) -> A.SelectCore:
        if core.source is None:
            return core
        flat = _flatten_inner_joins(core.source)
        if flat is None:
            return core
        atoms, conds = flat
        if not conds:
            rebuilt = _rebuild_chain(atoms)
            return core if rebuilt == core.source else replace(core, source=rebuilt)
        where_parts = conds + ([core.where] if core.where is not None else [])
        where = where_parts[0] if len(where_parts) == 1 \
            else A.Conjunction('AND', tuple(where_parts))
        return replace(core, source=_rebuild_chain(atoms), where=where)

    return _map_cores(stmt, on_core)


def _atom_sort_key(atom: A.Source):
    if isinstance(atom, A.TableRef):
        return (0, atom.name.lower(), '')
    return (1, A.to_sql(atom.query), '')


def rule_sort_join_operands(stmt: A.SelectStmt, schema: SchemaDef) -> A.SelectStmt:
    def on_core(core: A.SelectCore) -> A.SelectCore:
        if core.source is None:
            return core
        flat = _flatten_inner_joins(core.source)
        if flat is None:
            return core
        atoms, conds = flat
        if conds:
            # join conditions still attached; rule 7 moves them first
            return core
        ordered = sorted(atoms, key=_atom_sort_key)
        rebuilt = _rebuild_chain(ordered)
        return core if rebuilt == core.source else replace(core, source=rebuilt)

    return _map_cores(stmt, on_core)


# --- rule 9: schema-aware DISTINCT elimination -------------------------------------


def rule_drop_redundant_distinct(stmt: A.SelectStmt, schema: SchemaDef) -> A.SelectStmt:
    def on_core(core: A.SelectCore) -> A.SelectCore:
        if not core.distinct or core.group_by or core.having is not None:
            return core
        atoms: List[A.Source] = []
        _scope_sources(core.source, atoms)
        if len(atoms) != 1 or not isinstance(atoms[0], A.TableRef):
            return core
        table_ref = atoms[0]
        table = schema.find_table(table_ref.schema_name or table_ref.name)
        if table is None or not table.primary_key:
            return core
        projected = set()
        has_star = False
        for item in core.items:
            expr = item.expr
            if isinstance(expr, A.Star):
                if expr.table is None or expr.source_id == table_ref.source_id:
                    has_star = True
            elif isinstance(expr, A.ColumnRef):
                binding = expr.binding
                if isinstance(binding, A.BoundColumn) \
                        and binding.source_id == table_ref.source_id:
                    projected.add(binding.column.lower())
        pk = {c.lower() for c in table.primary_key}
        if has_star or pk <= projected:
            return replace(core, distinct=False)
        return core

    return _map_cores(stmt, on_core)


# --- rule 10: literal normalization -------------------------------------------------

_CMP_OPS = {'<', '<=', '>', '>=', '=', '!='}


def _int_if_integral(expr: A.Expr) -> A.Expr:
    if isinstance(expr, A.Literal) and isinstance(expr.value, float) \
            and expr.value.is_integer():
        return A.Literal(int(expr.value))
    return expr


def rule_normalize_literals(stmt: A.SelectStmt, schema: SchemaDef) -> A.SelectStmt:
    """Fold integral float literals to integers, but only where the engine
    compares by numeric value anyway (comparison operands, IN lists,
    BETWEEN bounds); projected literals keep their type."""

    def fold(expr: A.Expr) -> A.Expr:
        if isinstance(expr, A.Binary) and expr.op in _CMP_OPS:
            return replace(expr, left=_int_if_integral(expr.left),
                           right=_int_if_integral(expr.right))
        if isinstance(expr, A.InList):
            return replace(expr, items=tuple(_int_if_integral(i) for i in expr.items))
        if isinstance(expr, A.Between):
            return replace(expr, low=_int_if_integral(expr.low),
                           high=_int_if_integral(expr.high))
        return expr

    return _map_stmt_exprs(stmt, fold)


# --- rule registry and driver --------------------------------------------------------

RULES: Dict[str, Callable[[A.SelectStmt, SchemaDef], A.SelectStmt]] = {
    'fold_case': rule_fold_case,
    'normalize_aliases': rule_normalize_aliases,
    'flatten_bool': rule_flatten_bool,
    'orient_comparisons': rule_orient_comparisons,
    'normalize_in': rule_normalize_in,
    'expand_between': rule_expand_between,
    'normalize_joins': rule_normalize_joins,
    'sort_join_operands': rule_sort_join_operands,
    'drop_redundant_distinct': rule_drop_redundant_distinct,
    'normalize_literals': rule_normalize_literals,
}

DEFAULT_RULESET = CanonRuleSet(tuple(RULES), max_passes=8)


def canonicalize(ast: A.SelectStmt, schema: SchemaDef,
                 rules: CanonRuleSet = DEFAULT_RULESET) -> A.SelectStmt:
    """Apply the rule set to a bounded fixpoint.  Idempotent."""
    if not ast.resolved:
        raise PreconditionError('canonicalize requires a schema-resolved AST')
    current = ast
    for _ in range(rules.max_passes):
        before = current
        for name in rules.rules:
            current = RULES[name](current, schema)
        if current == before:
            break
    return current
