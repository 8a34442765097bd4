"""Tokenizer, recursive-descent parser, and name resolution for SELECT statements.

The accepted grammar is the SQLite-flavored SELECT subset used by Spider-style
benchmarks: compound selects (UNION / UNION ALL / INTERSECT / EXCEPT), joins
(comma, [INNER|LEFT|CROSS] JOIN with ON or USING), WHERE / GROUP BY / HAVING /
ORDER BY / LIMIT / OFFSET, and the usual expression forms (IN, BETWEEN,
IS NULL, LIKE, CASE, CAST, EXISTS, subqueries, `||` concatenation).

Statements other than SELECT are rejected.  Double-quoted tokens follow the
engine quirk: they are identifiers when they resolve against the schema and
fall back to string literals otherwise.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import List, Optional, Tuple

from . import ast as A
from .errors import ParseError, ResolutionError

KEYWORDS = {
    'SELECT', 'FROM', 'WHERE', 'GROUP', 'BY', 'HAVING', 'ORDER', 'LIMIT',
    'OFFSET', 'UNION', 'ALL', 'INTERSECT', 'EXCEPT', 'DISTINCT', 'AS', 'ON',
    'JOIN', 'LEFT', 'RIGHT', 'FULL', 'INNER', 'OUTER', 'CROSS', 'NATURAL',
    'USING', 'AND', 'OR', 'NOT', 'IN', 'BETWEEN', 'IS', 'NULL', 'LIKE',
    'GLOB', 'EXISTS', 'CASE', 'WHEN', 'THEN', 'ELSE', 'END', 'CAST', 'ASC',
    'DESC', 'TRUE', 'FALSE', 'ESCAPE',
}

_TOKEN_RE = re.compile(r"""
    (?P<space>\s+|--[^\n]*|/\*.*?\*/)
  | (?P<blob>[xX]'(?:[0-9a-fA-F]*)')
  | (?P<real>(?:\d+\.\d*|\.\d+)(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+)
  | (?P<int>0[xX][0-9a-fA-F]+|\d+)
  | (?P<string>'(?:[^']|'')*')
  | (?P<dqident>"(?:[^"]|"")*")
  | (?P<btident>`(?:[^`]|``)*`)
  | (?P<brident>\[[^\]]*\])
  | (?P<ident>[A-Za-z_][A-Za-z0-9_$]*)
  | (?P<op><<|>>|<>|<=|>=|==|!=|\|\||[-+*/%&|<>=~])
  | (?P<punct>[(),.;])
""", re.VERBOSE | re.DOTALL)


@dataclass(frozen=True)
class Token:
    kind: str
    value: object
    text: str
    pos: int


def tokenize(sql: str) -> List[Token]:
    tokens = []
    pos = 0
    n = len(sql)
    while pos < n:
        m = _TOKEN_RE.match(sql, pos)
        if m is None:
            raise ParseError(f'unexpected character {sql[pos]!r}', pos)
        kind = m.lastgroup
        text = m.group()
        if kind == 'space':
            pos = m.end()
            continue
        if kind == 'blob':
            hexpart = text[2:-1]
            if len(hexpart) % 2:
                raise ParseError('odd-length blob literal', pos)
            tokens.append(Token('blob', bytes.fromhex(hexpart), text, pos))
        elif kind == 'real':
            tokens.append(Token('real', float(text), text, pos))
        elif kind == 'int':
            tokens.append(Token('int', int(text, 0), text, pos))
        elif kind == 'string':
            tokens.append(Token('string', text[1:-1].replace("''", "'"), text, pos))
        elif kind == 'dqident':
            tokens.append(Token('dqident', text[1:-1].replace('""', '"'), text, pos))
        elif kind == 'btident':
            tokens.append(Token('qident', text[1:-1].replace('``', '`'), text, pos))
        elif kind == 'brident':
            tokens.append(Token('qident', text[1:-1], text, pos))
        elif kind == 'ident':
            upper = text.upper()
            if upper in KEYWORDS:
                tokens.append(Token('kw', upper, text, pos))
            else:
                tokens.append(Token('ident', text, text, pos))
        elif kind == 'op':
            tokens.append(Token('op', text, text, pos))
        else:
            tokens.append(Token('punct', text, text, pos))
        pos = m.end()
    tokens.append(Token('eof', None, '', n))
    return tokens


_REL_OPS = {'<', '<=', '>', '>='}
_BIT_OPS = {'&', '|', '<<', '>>'}
_ADD_OPS = {'+', '-'}
_MUL_OPS = {'*', '/', '%'}


class _Parser:
    def __init__(self, tokens: List[Token]):
        self.tokens = tokens
        self.i = 0

    # -- token helpers ------------------------------------------------------

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.i + ahead, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.tokens[self.i]
        if tok.kind != 'eof':
            self.i += 1
        return tok

    def at_kw(self, *words: str) -> bool:
        tok = self.peek()
        return tok.kind == 'kw' and tok.value in words

    def take_kw(self, *words: str) -> bool:
        if self.at_kw(*words):
            self.next()
            return True
        return False

    def expect_kw(self, word: str) -> None:
        if not self.take_kw(word):
            tok = self.peek()
            raise ParseError(f'expected {word}, found {tok.text or "end of input"}', tok.pos)

    def at_punct(self, ch: str) -> bool:
        tok = self.peek()
        return tok.kind == 'punct' and tok.value == ch

    def take_punct(self, ch: str) -> bool:
        if self.at_punct(ch):
            self.next()
            return True
        return False

    def expect_punct(self, ch: str) -> None:
        if not self.take_punct(ch):
            tok = self.peek()
            raise ParseError(f'expected {ch!r}, found {tok.text or "end of input"}', tok.pos)

    def at_op(self, *ops: str) -> bool:
        tok = self.peek()
        return tok.kind == 'op' and tok.value in ops

    # -- entry point --------------------------------------------------------

    def parse_statement(self) -> A.SelectStmt:
        tok = self.peek()
        if tok.kind == 'eof':
            raise ParseError('empty input', tok.pos)
        if not self.at_kw('SELECT'):
            raise ParseError('only SELECT statements are supported', tok.pos)
        stmt = self.parse_select_stmt()
        self.take_punct(';')
        tok = self.peek()
        if tok.kind != 'eof':
            raise ParseError(f'unexpected trailing input {tok.text!r}', tok.pos)
        return stmt

    def parse_select_stmt(self) -> A.SelectStmt:
        body: A.QueryExpr = self.parse_core()
        while True:
            if self.take_kw('UNION'):
                op = 'union_all' if self.take_kw('ALL') else 'union'
            elif self.take_kw('INTERSECT'):
                op = 'intersect'
            elif self.take_kw('EXCEPT'):
                op = 'except'
            else:
                break
            body = A.SetOp(op, body, self.parse_core())
        order_by: Tuple[A.OrderItem, ...] = ()
        if self.take_kw('ORDER'):
            self.expect_kw('BY')
            terms = [self.parse_order_term()]
            while self.take_punct(','):
                terms.append(self.parse_order_term())
            order_by = tuple(terms)
        limit = offset = None
        if self.take_kw('LIMIT'):
            limit = self.parse_expr()
            if self.take_kw('OFFSET'):
                offset = self.parse_expr()
            elif self.take_punct(','):
                # LIMIT a, b is shorthand for LIMIT b OFFSET a
                offset = limit
                limit = self.parse_expr()
        return A.SelectStmt(body=body, order_by=order_by, limit=limit, offset=offset)

    def parse_order_term(self) -> A.OrderItem:
        expr = self.parse_expr()
        desc = False
        if self.take_kw('DESC'):
            desc = True
        else:
            self.take_kw('ASC')
        return A.OrderItem(expr, desc)

    def parse_core(self) -> A.SelectCore:
        self.expect_kw('SELECT')
        distinct = False
        if self.take_kw('DISTINCT'):
            distinct = True
        else:
            self.take_kw('ALL')
        items = [self.parse_result_column()]
        while self.take_punct(','):
            items.append(self.parse_result_column())
        source = where = having = None
        group_by: Tuple[A.Expr, ...] = ()
        if self.take_kw('FROM'):
            source = self.parse_source()
        if self.take_kw('WHERE'):
            where = self.parse_expr()
        if self.take_kw('GROUP'):
            self.expect_kw('BY')
            exprs = [self.parse_expr()]
            while self.take_punct(','):
                exprs.append(self.parse_expr())
            group_by = tuple(exprs)
        if self.take_kw('HAVING'):
            having = self.parse_expr()
        return A.SelectCore(items=tuple(items), distinct=distinct, source=source,
                            where=where, group_by=group_by, having=having)

    def parse_result_column(self) -> A.SelectItem:
        if self.at_op('*'):
            self.next()
            return A.SelectItem(A.Star())
        if self.peek().kind in ('ident', 'dqident', 'qident') \
                and self.peek(1).kind == 'punct' and self.peek(1).value == '.' \
                and self.peek(2).kind == 'op' and self.peek(2).value == '*':
            table = self.next().value
            self.next()
            self.next()
            return A.SelectItem(A.Star(table=table))
        expr = self.parse_expr()
        alias = None
        if self.take_kw('AS'):
            alias = self.parse_alias_name()
        elif self.peek().kind in ('ident', 'dqident', 'qident'):
            alias = self.next().value
        return A.SelectItem(expr, alias)

    def parse_alias_name(self) -> str:
        tok = self.peek()
        if tok.kind in ('ident', 'dqident', 'qident', 'string'):
            self.next()
            return tok.value
        raise ParseError(f'expected alias name, found {tok.text or "end of input"}', tok.pos)

    # -- FROM clause --------------------------------------------------------

    def parse_source(self) -> A.Source:
        left = self.parse_single_source()
        while True:
            if self.take_punct(','):
                right = self.parse_single_source()
                left = A.Join(left, right, kind='cross', condition=None)
                continue
            kind = self.parse_join_kind()
            if kind is None:
                break
            right = self.parse_single_source()
            condition = None
            if self.take_kw('ON'):
                condition = self.parse_expr()
            elif self.take_kw('USING'):
                condition = self.desugar_using(left, right)
            if kind == 'inner' and condition is None:
                kind = 'cross'
            left = A.Join(left, right, kind=kind, condition=condition)
        return left

    def parse_join_kind(self) -> Optional[str]:
        if self.at_kw('NATURAL'):
            raise ParseError('NATURAL JOIN is not supported', self.peek().pos)
        if self.at_kw('RIGHT', 'FULL'):
            raise ParseError(f'{self.peek().value} JOIN is not supported', self.peek().pos)
        if self.take_kw('JOIN'):
            return 'inner'
        if self.take_kw('INNER'):
            self.expect_kw('JOIN')
            return 'inner'
        if self.take_kw('LEFT'):
            self.take_kw('OUTER')
            self.expect_kw('JOIN')
            return 'left'
        if self.take_kw('CROSS'):
            self.expect_kw('JOIN')
            return 'cross'
        return None

    def desugar_using(self, left: A.Source, right: A.Source) -> A.Expr:
        self.expect_punct('(')
        cols = [self.parse_alias_name()]
        while self.take_punct(','):
            cols.append(self.parse_alias_name())
        self.expect_punct(')')
        left_name = _rightmost_source_name(left)
        right_name = _source_name(right)
        conds: List[A.Expr] = [
            A.Binary('=', A.ColumnRef(left_name, c), A.ColumnRef(right_name, c))
            for c in cols
        ]
        return conds[0] if len(conds) == 1 else A.Conjunction('AND', tuple(conds))

    def parse_single_source(self) -> A.Source:
        if self.take_punct('('):
            if not self.at_kw('SELECT'):
                raise ParseError('expected SELECT in parenthesized source', self.peek().pos)
            query = self.parse_select_stmt()
            self.expect_punct(')')
            alias = self.parse_optional_alias()
            return A.SubquerySource(query, alias)
        tok = self.peek()
        if tok.kind not in ('ident', 'dqident', 'qident'):
            raise ParseError(f'expected table name, found {tok.text or "end of input"}', tok.pos)
        self.next()
        alias = self.parse_optional_alias()
        return A.TableRef(tok.value, alias)

    def parse_optional_alias(self) -> Optional[str]:
        if self.take_kw('AS'):
            return self.parse_alias_name()
        if self.peek().kind in ('ident', 'dqident', 'qident'):
            return self.next().value
        return None

    # -- expressions ---------------------------------------------------------

    def parse_expr(self) -> A.Expr:
        return self.parse_or()

    def parse_or(self) -> A.Expr:
        operands = [self.parse_and()]
        while self.take_kw('OR'):
            operands.append(self.parse_and())
        if len(operands) == 1:
            return operands[0]
        flat: List[A.Expr] = []
        for op in operands:
            if isinstance(op, A.Conjunction) and op.op == 'OR':
                flat.extend(op.operands)
            else:
                flat.append(op)
        return A.Conjunction('OR', tuple(flat))

    def parse_and(self) -> A.Expr:
        operands = [self.parse_not()]
        while self.take_kw('AND'):
            operands.append(self.parse_not())
        if len(operands) == 1:
            return operands[0]
        flat: List[A.Expr] = []
        for op in operands:
            if isinstance(op, A.Conjunction) and op.op == 'AND':
                flat.extend(op.operands)
            else:
                flat.append(op)
        return A.Conjunction('AND', tuple(flat))

    def parse_not(self) -> A.Expr:
        if self.take_kw('NOT'):
            return A.Unary('NOT', self.parse_not())
        return self.parse_predicate()

    def parse_predicate(self) -> A.Expr:
        left = self.parse_relational()
        while True:
            tok = self.peek()
            if tok.kind == 'op' and tok.value in ('=', '==', '!=', '<>'):
                self.next()
                op = '=' if tok.value in ('=', '==') else '!='
                left = A.Binary(op, left, self.parse_relational())
                continue
            if self.at_kw('IS'):
                self.next()
                negated = self.take_kw('NOT')
                if not self.take_kw('NULL'):
                    raise ParseError('IS is only supported with NULL', self.peek().pos)
                left = A.IsNull(left, negated)
                continue
            negated = False
            if self.at_kw('NOT') and self.peek(1).kind == 'kw' \
                    and self.peek(1).value in ('IN', 'BETWEEN', 'LIKE', 'GLOB'):
                self.next()
                negated = True
            if self.take_kw('IN'):
                left = self.parse_in_tail(left, negated)
                continue
            if self.take_kw('BETWEEN'):
                low = self.parse_relational()
                self.expect_kw('AND')
                high = self.parse_relational()
                left = A.Between(left, low, high, negated)
                continue
            if self.take_kw('LIKE'):
                op = 'NOT LIKE' if negated else 'LIKE'
                left = A.Binary(op, left, self.parse_relational())
                if self.at_kw('ESCAPE'):
                    raise ParseError('LIKE ... ESCAPE is not supported', self.peek().pos)
                continue
            if self.take_kw('GLOB'):
                op = 'NOT GLOB' if negated else 'GLOB'
                left = A.Binary(op, left, self.parse_relational())
                continue
            if negated:
                raise ParseError('expected IN, BETWEEN, LIKE or GLOB after NOT', self.peek().pos)
            return left

    def parse_in_tail(self, left: A.Expr, negated: bool) -> A.Expr:
        self.expect_punct('(')
        if self.at_kw('SELECT'):
            query = self.parse_select_stmt()
            self.expect_punct(')')
            return A.InSubquery(left, query, negated)
        items: List[A.Expr] = []
        if not self.at_punct(')'):
            items.append(self.parse_expr())
            while self.take_punct(','):
                items.append(self.parse_expr())
        self.expect_punct(')')
        return A.InList(left, tuple(items), negated)

    def parse_relational(self) -> A.Expr:
        left = self.parse_bitwise()
        while self.at_op(*_REL_OPS):
            op = self.next().value
            left = A.Binary(op, left, self.parse_bitwise())
        return left

    def parse_bitwise(self) -> A.Expr:
        left = self.parse_additive()
        while self.at_op(*_BIT_OPS):
            op = self.next().value
            left = A.Binary(op, left, self.parse_additive())
        return left

    def parse_additive(self) -> A.Expr:
        left = self.parse_multiplicative()
        while self.at_op(*_ADD_OPS):
            op = self.next().value
            left = A.Binary(op, left, self.parse_multiplicative())
        return left

    def parse_multiplicative(self) -> A.Expr:
        left = self.parse_concat()
        while self.at_op(*_MUL_OPS):
            tok = self.next()
            left = A.Binary(tok.value, left, self.parse_concat())
        return left

    def parse_concat(self) -> A.Expr:
        left = self.parse_unary()
        while self.at_op('||'):
            self.next()
            left = A.Binary('||', left, self.parse_unary())
        return left

    def parse_unary(self) -> A.Expr:
        tok = self.peek()
        if tok.kind == 'op' and tok.value in ('-', '+', '~'):
            self.next()
            operand = self.parse_unary()
            if tok.value in ('-', '+') and isinstance(operand, A.Literal) \
                    and isinstance(operand.value, (int, float)):
                value = -operand.value if tok.value == '-' else operand.value
                return A.Literal(value)
            return A.Unary(tok.value, operand)
        return self.parse_primary()

    def parse_primary(self) -> A.Expr:
        tok = self.peek()
        if tok.kind in ('int', 'real', 'string', 'blob'):
            self.next()
            return A.Literal(tok.value)
        if self.take_kw('NULL'):
            return A.Literal(None)
        if self.take_kw('TRUE'):
            return A.Literal(1)
        if self.take_kw('FALSE'):
            return A.Literal(0)
        if self.at_kw('CASE'):
            return self.parse_case()
        if self.take_kw('CAST'):
            self.expect_punct('(')
            expr = self.parse_expr()
            self.expect_kw('AS')
            type_name = self.parse_type_name()
            self.expect_punct(')')
            return A.Cast(expr, type_name)
        if self.take_kw('EXISTS'):
            self.expect_punct('(')
            query = self.parse_select_stmt()
            self.expect_punct(')')
            return A.Exists(query)
        if self.take_punct('('):
            if self.at_kw('SELECT'):
                query = self.parse_select_stmt()
                self.expect_punct(')')
                return A.Subquery(query)
            expr = self.parse_expr()
            self.expect_punct(')')
            return expr
        if tok.kind in ('ident', 'dqident', 'qident'):
            self.next()
            if self.at_punct('(') and tok.kind == 'ident':
                return self.parse_func_tail(tok.value)
            if self.at_punct('.') and self.peek(1).kind in ('ident', 'dqident', 'qident'):
                self.next()
                col = self.next()
                return A.ColumnRef(tok.value, col.value)
            return A.ColumnRef(None, tok.value, double_quoted=tok.kind == 'dqident')
        raise ParseError(f'unexpected token {tok.text or "end of input"!s}', tok.pos)

    def parse_func_tail(self, name: str) -> A.Expr:
        self.expect_punct('(')
        if self.at_op('*'):
            self.next()
            self.expect_punct(')')
            return A.FuncCall(name, (), star=True)
        if self.take_punct(')'):
            return A.FuncCall(name, ())
        distinct = self.take_kw('DISTINCT')
        args = [self.parse_expr()]
        while self.take_punct(','):
            args.append(self.parse_expr())
        self.expect_punct(')')
        return A.FuncCall(name, tuple(args), distinct=distinct)

    def parse_case(self) -> A.Expr:
        self.expect_kw('CASE')
        operand = None
        if not self.at_kw('WHEN'):
            operand = self.parse_expr()
        whens: List[Tuple[A.Expr, A.Expr]] = []
        while self.take_kw('WHEN'):
            cond = self.parse_expr()
            self.expect_kw('THEN')
            whens.append((cond, self.parse_expr()))
        if not whens:
            raise ParseError('CASE requires at least one WHEN arm', self.peek().pos)
        default = None
        if self.take_kw('ELSE'):
            default = self.parse_expr()
        self.expect_kw('END')
        return A.Case(operand, tuple(whens), default)

    def parse_type_name(self) -> str:
        words = []
        while self.peek().kind in ('ident', 'kw'):
            words.append(self.next().text)
        if not words:
            raise ParseError('expected type name', self.peek().pos)
        name = ' '.join(words)
        if self.take_punct('('):
            nums = [self.next().text]
            while self.take_punct(','):
                nums.append(self.next().text)
            self.expect_punct(')')
            name += '(' + ', '.join(nums) + ')'
        return name


def _source_name(source: A.Source) -> Optional[str]:
    if isinstance(source, A.TableRef):
        return source.alias or source.name
    if isinstance(source, A.SubquerySource):
        return source.alias
    return None


def _rightmost_source_name(source: A.Source) -> Optional[str]:
    while isinstance(source, A.Join):
        source = source.right
    return _source_name(source)


def parse_statement(sql: str) -> A.SelectStmt:
    """Parse without name resolution (``resolved`` stays False)."""
    return _Parser(tokenize(sql)).parse_statement()


def parse_sql(sql: str, schema=None) -> A.SelectStmt:
    """Parse a SELECT statement, resolving names against ``schema`` if given.

    Raises ParseError on syntax failure and ResolutionError listing every
    identifier that does not resolve.
    """
    stmt = parse_statement(sql)
    if schema is None:
        return stmt
    from .resolver import resolve
    return resolve(stmt, schema)
