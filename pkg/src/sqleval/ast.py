"""AST node types for the supported SELECT grammar plus a deterministic writer.

Nodes are frozen dataclasses; child lists are tuples so every node is hashable
and safe to share between workers.  Resolution metadata (bindings, source ids)
is excluded from equality: two ASTs compare equal iff they are syntactically
identical, and for a fixed schema identical syntax implies identical bindings.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple, Union


# --- resolution metadata ----------------------------------------------------


@dataclass(frozen=True)
class BoundColumn:
    """A column reference bound to a FROM source.

    ``table``/``column`` carry the schema's original spelling; ``table`` is
    None when the source is a derived table (subquery in FROM).
    """

    source_id: int
    table: Optional[str]
    column: str


@dataclass(frozen=True)
class BoundAlias:
    """A reference bound to a projection alias of the enclosing select core."""

    index: int


Binding = Union[BoundColumn, BoundAlias]


# --- expressions ------------------------------------------------------------


@dataclass(frozen=True)
class Literal:
    value: Union[None, int, float, str, bytes]


@dataclass(frozen=True)
class ColumnRef:
    table: Optional[str]
    column: str
    binding: Optional[Binding] = field(default=None, compare=False)
    # True when the column was written with double quotes; the engine lets
    # such a token fall back to a string literal if it resolves to nothing.
    double_quoted: bool = field(default=False, compare=False)


@dataclass(frozen=True)
class Star:
    table: Optional[str] = None
    source_id: Optional[int] = field(default=None, compare=False)


@dataclass(frozen=True)
class Unary:
    op: str  # '-', '+', '~', 'NOT'
    operand: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Conjunction:
    """n-ary AND / OR; the parser flattens same-operator chains."""

    op: str  # 'AND' | 'OR'
    operands: Tuple["Expr", ...]


@dataclass(frozen=True)
class FuncCall:
    name: str
    args: Tuple["Expr", ...]
    distinct: bool = False
    star: bool = False


@dataclass(frozen=True)
class InList:
    expr: "Expr"
    items: Tuple["Expr", ...]
    negated: bool = False


@dataclass(frozen=True)
class InSubquery:
    expr: "Expr"
    query: "SelectStmt"
    negated: bool = False


@dataclass(frozen=True)
class Between:
    expr: "Expr"
    low: "Expr"
    high: "Expr"
    negated: bool = False


@dataclass(frozen=True)
class IsNull:
    expr: "Expr"
    negated: bool = False


@dataclass(frozen=True)
class Exists:
    query: "SelectStmt"
    negated: bool = False


@dataclass(frozen=True)
class Case:
    operand: Optional["Expr"]
    whens: Tuple[Tuple["Expr", "Expr"], ...]
    default: Optional["Expr"]


@dataclass(frozen=True)
class Cast:
    expr: "Expr"
    type_name: str


@dataclass(frozen=True)
class Subquery:
    query: "SelectStmt"


Expr = Union[
    Literal, ColumnRef, Star, Unary, Binary, Conjunction, FuncCall,
    InList, InSubquery, Between, IsNull, Exists, Case, Cast, Subquery,
]


# --- FROM sources -----------------------------------------------------------


@dataclass(frozen=True)
class TableRef:
    name: str
    alias: Optional[str] = None
    schema_name: Optional[str] = field(default=None, compare=False)
    source_id: Optional[int] = field(default=None, compare=False)


@dataclass(frozen=True)
class SubquerySource:
    query: "SelectStmt"
    alias: Optional[str] = None
    source_id: Optional[int] = field(default=None, compare=False)


@dataclass(frozen=True)
class Join:
    left: "Source"
    right: "Source"
    kind: str  # 'inner' | 'left' | 'cross'
    condition: Optional[Expr] = None


Source = Union[TableRef, SubquerySource, Join]


# --- select statement -------------------------------------------------------


@dataclass(frozen=True)
class SelectItem:
    expr: Expr
    alias: Optional[str] = None


@dataclass(frozen=True)
class SelectCore:
    items: Tuple[SelectItem, ...]
    distinct: bool = False
    source: Optional[Source] = None
    where: Optional[Expr] = None
    group_by: Tuple[Expr, ...] = ()
    having: Optional[Expr] = None


@dataclass(frozen=True)
class SetOp:
    op: str  # 'union' | 'union_all' | 'intersect' | 'except'
    left: "QueryExpr"
    right: "QueryExpr"


QueryExpr = Union[SelectCore, SetOp]


@dataclass(frozen=True)
class OrderItem:
    expr: Expr
    desc: bool = False


@dataclass(frozen=True)
class SelectStmt:
    body: QueryExpr
    order_by: Tuple[OrderItem, ...] = ()
    limit: Optional[Expr] = None
    offset: Optional[Expr] = None
    resolved: bool = field(default=False, compare=False)


QueryAst = SelectStmt


# --- writer -----------------------------------------------------------------

# Binding strength, lower binds looser.  Mirrors the engine's operator table
# so a nested expression is parenthesized exactly when reparsing would regroup.
_PREC_OR = 1
_PREC_AND = 2
_PREC_NOT = 3
_PREC_EQ = 4      # = != IS IN LIKE GLOB BETWEEN
_PREC_REL = 5     # < <= > >=
_PREC_BIT = 6     # & | << >>
_PREC_ADD = 7
_PREC_MUL = 8
_PREC_CONCAT = 9
_PREC_UNARY = 10
_PREC_ATOM = 100

_BINARY_PREC = {
    '=': _PREC_EQ, '!=': _PREC_EQ,
    'LIKE': _PREC_EQ, 'NOT LIKE': _PREC_EQ, 'GLOB': _PREC_EQ, 'NOT GLOB': _PREC_EQ,
    '<': _PREC_REL, '<=': _PREC_REL, '>': _PREC_REL, '>=': _PREC_REL,
    '&': _PREC_BIT, '|': _PREC_BIT, '<<': _PREC_BIT, '>>': _PREC_BIT,
    '+': _PREC_ADD, '-': _PREC_ADD,
    '*': _PREC_MUL, '/': _PREC_MUL, '%': _PREC_MUL,
    '||': _PREC_CONCAT,
}

_IDENT_PLAIN = None  # set lazily to avoid importing re at module load for no reason


def _quote_ident(name: str) -> str:
    global _IDENT_PLAIN
    if _IDENT_PLAIN is None:
        import re
        _IDENT_PLAIN = re.compile(r'^[A-Za-z_][A-Za-z0-9_]*$')
    from .parser import KEYWORDS
    if _IDENT_PLAIN.match(name) and name.upper() not in KEYWORDS:
        return name
    return '"' + name.replace('"', '""') + '"'


def _quote_string(value: str) -> str:
    return "'" + value.replace("'", "''") + "'"


def _literal_sql(value) -> str:
    if value is None:
        return 'NULL'
    if isinstance(value, bool):
        return '1' if value else '0'
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, bytes):
        return "X'" + value.hex() + "'"
    return _quote_string(value)


def _expr_sql(node: Expr, parent_prec: int) -> str:
    text, prec = _render(node)
    if prec < parent_prec:
        return '(' + text + ')'
    return text


def _render(node: Expr):
    if isinstance(node, Literal):
        return _literal_sql(node.value), _PREC_ATOM
    if isinstance(node, ColumnRef):
        if node.table:
            return _quote_ident(node.table) + '.' + _quote_ident(node.column), _PREC_ATOM
        return _quote_ident(node.column), _PREC_ATOM
    if isinstance(node, Star):
        return (_quote_ident(node.table) + '.*' if node.table else '*'), _PREC_ATOM
    if isinstance(node, Unary):
        prec = _PREC_NOT if node.op == 'NOT' else _PREC_UNARY
        sep = ' ' if node.op == 'NOT' else ''
        return node.op + sep + _expr_sql(node.operand, prec + 1), prec
    if isinstance(node, Binary):
        prec = _BINARY_PREC[node.op]
        left = _expr_sql(node.left, prec)
        right = _expr_sql(node.right, prec + 1)
        return f'{left} {node.op} {right}', prec
    if isinstance(node, Conjunction):
        prec = _PREC_AND if node.op == 'AND' else _PREC_OR
        parts = [_expr_sql(op, prec + 1) for op in node.operands]
        return (' ' + node.op + ' ').join(parts), prec
    if isinstance(node, FuncCall):
        if node.star:
            inner = '*'
        else:
            inner = ', '.join(_expr_sql(a, 0) for a in node.args)
            if node.distinct:
                inner = 'DISTINCT ' + inner
        return f'{node.name}({inner})', _PREC_ATOM
    if isinstance(node, InList):
        kw = 'NOT IN' if node.negated else 'IN'
        items = ', '.join(_expr_sql(i, 0) for i in node.items)
        return f'{_expr_sql(node.expr, _PREC_EQ + 1)} {kw} ({items})', _PREC_EQ
    if isinstance(node, InSubquery):
        kw = 'NOT IN' if node.negated else 'IN'
        return f'{_expr_sql(node.expr, _PREC_EQ + 1)} {kw} ({to_sql(node.query)})', _PREC_EQ
    if isinstance(node, Between):
        kw = 'NOT BETWEEN' if node.negated else 'BETWEEN'
        low = _expr_sql(node.low, _PREC_EQ + 1)
        high = _expr_sql(node.high, _PREC_EQ + 1)
        return f'{_expr_sql(node.expr, _PREC_EQ + 1)} {kw} {low} AND {high}', _PREC_EQ
    if isinstance(node, IsNull):
        kw = 'IS NOT NULL' if node.negated else 'IS NULL'
        return f'{_expr_sql(node.expr, _PREC_EQ + 1)} {kw}', _PREC_EQ
    if isinstance(node, Exists):
        kw = 'NOT EXISTS' if node.negated else 'EXISTS'
        return f'{kw} ({to_sql(node.query)})', _PREC_ATOM
    if isinstance(node, Case):
        parts = ['CASE']
        if node.operand is not None:
            parts.append(_expr_sql(node.operand, 0))
        for cond, result in node.whens:
            parts.append('WHEN ' + _expr_sql(cond, 0) + ' THEN ' + _expr_sql(result, 0))
        if node.default is not None:
            parts.append('ELSE ' + _expr_sql(node.default, 0))
        parts.append('END')
        return ' '.join(parts), _PREC_ATOM
    if isinstance(node, Cast):
        return f'CAST({_expr_sql(node.expr, 0)} AS {node.type_name})', _PREC_ATOM
    if isinstance(node, Subquery):
        return '(' + to_sql(node.query) + ')', _PREC_ATOM
    raise TypeError(f'cannot render {type(node).__name__}')


def _source_sql(source: Source) -> str:
    if isinstance(source, TableRef):
        text = _quote_ident(source.name)
        if source.alias:
            text += ' AS ' + _quote_ident(source.alias)
        return text
    if isinstance(source, SubquerySource):
        text = '(' + to_sql(source.query) + ')'
        if source.alias:
            text += ' AS ' + _quote_ident(source.alias)
        return text
    if isinstance(source, Join):
        left = _source_sql(source.left)
        right = source.right
        right_text = _source_sql(right)
        if isinstance(right, Join):
            right_text = '(' + right_text + ')'
        if source.kind == 'cross' and source.condition is None:
            return f'{left}, {right_text}'
        kw = {'inner': 'JOIN', 'left': 'LEFT JOIN', 'cross': 'CROSS JOIN'}[source.kind]
        text = f'{left} {kw} {right_text}'
        if source.condition is not None:
            text += ' ON ' + _expr_sql(source.condition, 0)
        return text
    raise TypeError(f'cannot render {type(source).__name__}')


def _core_sql(core: SelectCore) -> str:
    parts = ['SELECT']
    if core.distinct:
        parts.append('DISTINCT')
    items = []
    for item in core.items:
        text = _expr_sql(item.expr, 0)
        if item.alias:
            text += ' AS ' + _quote_ident(item.alias)
        items.append(text)
    parts.append(', '.join(items))
    if core.source is not None:
        parts.append('FROM ' + _source_sql(core.source))
    if core.where is not None:
        parts.append('WHERE ' + _expr_sql(core.where, 0))
    if core.group_by:
        parts.append('GROUP BY ' + ', '.join(_expr_sql(e, 0) for e in core.group_by))
    if core.having is not None:
        parts.append('HAVING ' + _expr_sql(core.having, 0))
    return ' '.join(parts)


def _body_sql(body: QueryExpr) -> str:
    if isinstance(body, SelectCore):
        return _core_sql(body)
    kw = {'union': 'UNION', 'union_all': 'UNION ALL',
          'intersect': 'INTERSECT', 'except': 'EXCEPT'}[body.op]
    return f'{_body_sql(body.left)} {kw} {_body_sql(body.right)}'


def to_sql(stmt: SelectStmt) -> str:
    """Render a statement back to SQL text (deterministic, single line)."""
    parts = [_body_sql(stmt.body)]
    if stmt.order_by:
        terms = []
        for item in stmt.order_by:
            term = _expr_sql(item.expr, 0)
            if item.desc:
                term += ' DESC'
            terms.append(term)
        parts.append('ORDER BY ' + ', '.join(terms))
    if stmt.limit is not None:
        parts.append('LIMIT ' + _expr_sql(stmt.limit, 0))
        if stmt.offset is not None:
            parts.append('OFFSET ' + _expr_sql(stmt.offset, 0))
    return ' '.join(parts)


def expr_sql(expr: Expr) -> str:
    """Render a bare expression (used for sort keys and evidence payloads)."""
    return _expr_sql(expr, 0)
