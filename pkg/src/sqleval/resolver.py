"""Schema-aware name resolution.

Rebuilds a parsed tree with a binding on every column reference.  Lookups are
case-insensitive; the binding carries the schema's original spelling.  All
unresolvable identifiers are collected and reported in one ResolutionError so
a caller can distinguish a hallucinated table from a hallucinated attribute.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple

from . import ast as A
from .errors import ResolutionError
from .schema import SchemaDef


@dataclass
class _Entry:
    key: Optional[str]            # lowercased effective name, None if unreferenceable
    source_id: int
    table: Optional[str]          # schema spelling for base tables
    columns: Optional[List[Tuple[str, str]]]  # (lower, spelling); None = accept anything


_Scope = List[_Entry]


class _Resolver:
    def __init__(self, schema: SchemaDef):
        self.schema = schema
        self.unknown_tables: set = set()
        self.unknown_columns: set = set()
        self._next_id = 0

    def fresh_id(self) -> int:
        self._next_id += 1
        return self._next_id

    # -- statements -----------------------------------------------------------

    def resolve_stmt(self, stmt: A.SelectStmt, outer: Sequence[_Scope]) -> Tuple[A.SelectStmt, List[Tuple[str, str]]]:
        body, scope, items, outputs = self.resolve_body(stmt.body, outer)
        chain = list(outer) + [scope]
        aliases = _alias_table(items)
        order_by = tuple(
            replace(term, expr=self.resolve_expr(term.expr, chain, aliases, alias_first=True))
            for term in stmt.order_by
        )
        limit = self.resolve_expr(stmt.limit, chain, None) if stmt.limit is not None else None
        offset = self.resolve_expr(stmt.offset, chain, None) if stmt.offset is not None else None
        resolved = replace(stmt, body=body, order_by=order_by, limit=limit,
                           offset=offset, resolved=True)
        return resolved, outputs

    def resolve_body(self, body: A.QueryExpr, outer: Sequence[_Scope]):
        if isinstance(body, A.SetOp):
            left, scope, items, outputs = self.resolve_body(body.left, outer)
            right, _, _, _ = self.resolve_body(body.right, outer)
            return replace(body, left=left, right=right), scope, items, outputs
        return self.resolve_core(body, outer)

    def resolve_core(self, core: A.SelectCore, outer: Sequence[_Scope]):
        scope: _Scope = []
        source = self.resolve_source(core.source, outer, scope) if core.source else None
        chain = list(outer) + [scope]
        if source is not None:
            source = self.resolve_join_conditions(source, chain)
        items = tuple(
            replace(item, expr=self.resolve_expr(item.expr, chain, None))
            for item in core.items
        )
        aliases = _alias_table(items)
        where = self.resolve_expr(core.where, chain, None) if core.where is not None else None
        group_by = tuple(self.resolve_expr(e, chain, aliases) for e in core.group_by)
        having = self.resolve_expr(core.having, chain, aliases) if core.having is not None else None
        resolved = replace(core, items=items, source=source, where=where,
                           group_by=group_by, having=having)
        return resolved, scope, items, self.output_columns(items, scope)

    # -- FROM tree ------------------------------------------------------------

    def resolve_source(self, source: A.Source, outer: Sequence[_Scope], scope: _Scope) -> A.Source:
        if isinstance(source, A.TableRef):
            table = self.schema.find_table(source.name)
            sid = self.fresh_id()
            if table is None:
                self.unknown_tables.add(source.name)
                entry = _Entry((source.alias or source.name).lower(), sid, None, None)
                scope.append(entry)
                return replace(source, schema_name=None, source_id=sid)
            cols = [(c.name.lower(), c.name) for c in table.columns]
            entry = _Entry((source.alias or table.name).lower(), sid, table.name, cols)
            scope.append(entry)
            return replace(source, schema_name=table.name, source_id=sid)
        if isinstance(source, A.SubquerySource):
            query, outputs = self.resolve_stmt(source.query, outer)
            sid = self.fresh_id()
            key = source.alias.lower() if source.alias else None
            scope.append(_Entry(key, sid, None, outputs))
            return replace(source, query=query, source_id=sid)
        left = self.resolve_source(source.left, outer, scope)
        right = self.resolve_source(source.right, outer, scope)
        return replace(source, left=left, right=right)

    def resolve_join_conditions(self, source: A.Source, chain: Sequence[_Scope]) -> A.Source:
        if not isinstance(source, A.Join):
            return source
        left = self.resolve_join_conditions(source.left, chain)
        right = self.resolve_join_conditions(source.right, chain)
        condition = None
        if source.condition is not None:
            condition = self.resolve_expr(source.condition, chain, None)
        return replace(source, left=left, right=right, condition=condition)

    def output_columns(self, items: Sequence[A.SelectItem], scope: _Scope) -> List[Tuple[str, str]]:
        outputs: List[Tuple[str, str]] = []
        for item in items:
            if isinstance(item.expr, A.Star):
                for entry in self._star_entries(item.expr, scope):
                    if entry.columns:
                        outputs.extend(entry.columns)
                continue
            if item.alias:
                outputs.append((item.alias.lower(), item.alias))
            elif isinstance(item.expr, A.ColumnRef):
                binding = item.expr.binding
                spelling = binding.column if isinstance(binding, A.BoundColumn) else item.expr.column
                outputs.append((spelling.lower(), spelling))
            else:
                text = A.expr_sql(item.expr)
                outputs.append((text.lower(), text))
        return outputs

    def _star_entries(self, star: A.Star, scope: _Scope) -> List[_Entry]:
        if star.table is None:
            return scope
        key = star.table.lower()
        matches = [e for e in scope if e.key == key]
        if not matches:
            self.unknown_tables.add(star.table)
        return matches

    # -- expressions ------------------------------------------------------------

    def resolve_expr(self, expr: A.Expr, chain: Sequence[_Scope],
                     aliases: Optional[dict], alias_first: bool = False) -> A.Expr:
        rec = lambda e: self.resolve_expr(e, chain, aliases, alias_first)
        if isinstance(expr, A.Literal):
            return expr
        if isinstance(expr, A.ColumnRef):
            return self.resolve_column(expr, chain, aliases, alias_first)
        if isinstance(expr, A.Star):
            if chain and expr.table is not None:
                entries = self._star_entries(expr, chain[-1])
                if entries:
                    return replace(expr, source_id=entries[0].source_id)
            return expr
        if isinstance(expr, A.Unary):
            return replace(expr, operand=rec(expr.operand))
        if isinstance(expr, A.Binary):
            return replace(expr, left=rec(expr.left), right=rec(expr.right))
        if isinstance(expr, A.Conjunction):
            return replace(expr, operands=tuple(rec(op) for op in expr.operands))
        if isinstance(expr, A.FuncCall):
            return replace(expr, args=tuple(rec(a) for a in expr.args))
        if isinstance(expr, A.InList):
            return replace(expr, expr=rec(expr.expr),
                           items=tuple(rec(i) for i in expr.items))
        if isinstance(expr, A.InSubquery):
            query, _ = self.resolve_stmt(expr.query, chain)
            return replace(expr, expr=rec(expr.expr), query=query)
        if isinstance(expr, A.Between):
            return replace(expr, expr=rec(expr.expr), low=rec(expr.low), high=rec(expr.high))
        if isinstance(expr, A.IsNull):
            return replace(expr, expr=rec(expr.expr))
        if isinstance(expr, A.Exists):
            query, _ = self.resolve_stmt(expr.query, chain)
            return replace(expr, query=query)
        if isinstance(expr, A.Case):
            operand = rec(expr.operand) if expr.operand is not None else None
            whens = tuple((rec(c), rec(r)) for c, r in expr.whens)
            default = rec(expr.default) if expr.default is not None else None
            return replace(expr, operand=operand, whens=whens, default=default)
        if isinstance(expr, A.Cast):
            return replace(expr, expr=rec(expr.expr))
        if isinstance(expr, A.Subquery):
            query, _ = self.resolve_stmt(expr.query, chain)
            return replace(expr, query=query)
        raise TypeError(f'cannot resolve {type(expr).__name__}')

    def resolve_column(self, ref: A.ColumnRef, chain: Sequence[_Scope],
                       aliases: Optional[dict], alias_first: bool) -> A.Expr:
        lower = ref.column.lower()
        if ref.table is not None:
            key = ref.table.lower()
            for scope in reversed(chain):
                for entry in scope:
                    if entry.key == key:
                        return self._bind(ref, entry, lower)
            self.unknown_tables.add(ref.table)
            return ref
        if aliases and alias_first and lower in aliases:
            return replace(ref, binding=A.BoundAlias(aliases[lower]))
        for scope in reversed(chain):
            matches = []
            for entry in scope:
                if entry.columns is None:
                    continue
                if any(c[0] == lower for c in entry.columns):
                    matches.append(entry)
            if len(matches) == 1:
                return self._bind(ref, matches[0], lower)
            if len(matches) > 1:
                # Same spelling in several sources; engines reject this, we
                # surface it the same way as an unknown name.
                self.unknown_columns.add(f'{ref.column} (ambiguous)')
                return ref
        if aliases and not alias_first and lower in aliases:
            return replace(ref, binding=A.BoundAlias(aliases[lower]))
        if ref.double_quoted:
            # Unresolvable double-quoted token: engine reads it as a string.
            return A.Literal(ref.column)
        self.unknown_columns.add(ref.column)
        return ref

    def _bind(self, ref: A.ColumnRef, entry: _Entry, lower: str) -> A.ColumnRef:
        if entry.columns is None:
            return replace(ref, binding=A.BoundColumn(entry.source_id, entry.table, ref.column))
        for col_lower, spelling in entry.columns:
            if col_lower == lower:
                return replace(ref, binding=A.BoundColumn(entry.source_id, entry.table, spelling))
        name = f'{ref.table}.{ref.column}' if ref.table else ref.column
        self.unknown_columns.add(name)
        return ref


def _alias_table(items: Sequence[A.SelectItem]) -> dict:
    table = {}
    for i, item in enumerate(items):
        if item.alias:
            table.setdefault(item.alias.lower(), i)
    return table


def resolve(stmt: A.SelectStmt, schema: SchemaDef) -> A.SelectStmt:
    resolver = _Resolver(schema)
    resolved, _ = resolver.resolve_stmt(stmt, [])
    if resolver.unknown_tables or resolver.unknown_columns:
        raise ResolutionError(sorted(resolver.unknown_tables),
                              sorted(resolver.unknown_columns))
    return resolved
