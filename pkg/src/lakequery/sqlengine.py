"""In-process SELECT-only SQL subset over in-memory relations.

Supported grammar:

    SELECT item [, item ...] | *
    FROM table [alias] [, table [alias] ...]
    [JOIN table [alias] ON col = col ...]
    [WHERE condition]
    [GROUP BY col [, col ...]]
    [ORDER BY col [ASC|DESC] [, ...]]
    [LIMIT n]

    item      := expr [[AS] alias]
    expr      := columns, literals, + - * / %, MIN/MAX/SUM/AVG/COUNT(...)
    condition := comparisons (= != <> < <= > >=), AND/OR/NOT, LIKE,
                 IN (literals), IS [NOT] NULL, parentheses

Semantics are fixed so results are reproducible byte for byte: input row
order is preserved, joins scan left to right, GROUP BY output is ordered by
group key (nulls first), and ORDER BY is a stable sort. Comparisons follow
three-valued logic; aggregates ignore nulls; COUNT(*) counts rows; division
by zero yields null. Text that looks numeric coerces to a number inside
arithmetic and mixed-type comparisons (so `answer + 0` turns QA answers into
numbers); anything unparseable becomes null.

Anything that is not a single SELECT statement is rejected before parsing.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .relation import (
    BOOLEAN,
    NUMBER,
    TEXT,
    Cell,
    DocRef,
    ImageRef,
    Relation,
)


class SqlError(Exception):
    """Base class for engine failures."""


class SqlSecurityError(SqlError):
    """Statement rejected by the SELECT-only guard."""


class SqlParseError(SqlError):
    pass


class SqlBindError(SqlError):
    """Unknown table/column or invalid aggregate usage."""


class SqlTypeError(SqlError):
    """Runtime type mismatch (e.g. MIN over mixed value kinds)."""


_KEYWORDS = {
    "select", "from", "where", "group", "by", "order", "limit", "join", "on",
    "as", "and", "or", "not", "like", "in", "is", "null", "asc", "desc",
    "min", "max", "sum", "avg", "count", "distinct",
}
_AGGREGATES = ("min", "max", "sum", "avg", "count")


@dataclass(frozen=True)
class _Token:
    kind: str  # KEYWORD IDENT NUMBER STRING OP EOF
    value: object
    pos: int


def _tokenize(sql: str) -> list[_Token]:
    tokens: list[_Token] = []
    i, n = 0, len(sql)
    while i < n:
        c = sql[i]
        if c.isspace():
            i += 1
            continue
        if sql[i : i + 2] == "--":
            j = sql.find("\n", i)
            i = n if j < 0 else j + 1
            continue
        if sql[i : i + 2] == "/*":
            j = sql.find("*/", i + 2)
            if j < 0:
                raise SqlParseError(f"unterminated comment at position {i}")
            i = j + 2
            continue
        if sql[i : i + 2] in ("<=", ">=", "!=", "<>", "=="):
            op = sql[i : i + 2]
            op = {"<>": "!=", "==": "="}.get(op, op)
            tokens.append(_Token("OP", op, i))
            i += 2
            continue
        if c in "=<>+-*/%(),.;":
            tokens.append(_Token("OP", c, i))
            i += 1
            continue
        if c == "'":
            j, buf = i + 1, []
            while j < n:
                if sql[j] == "'" and sql[j + 1 : j + 2] == "'":
                    buf.append("'")
                    j += 2
                elif sql[j] == "'":
                    break
                else:
                    buf.append(sql[j])
                    j += 1
            if j >= n:
                raise SqlParseError(f"unterminated string at position {i}")
            tokens.append(_Token("STRING", "".join(buf), i))
            i = j + 1
            continue
        if c == '"':
            j = sql.find('"', i + 1)
            if j < 0:
                raise SqlParseError(f"unterminated quoted identifier at position {i}")
            tokens.append(_Token("IDENT", sql[i + 1 : j], i))
            i = j + 1
            continue
        if c.isdigit() or (c == "." and sql[i + 1 : i + 2].isdigit()):
            m = re.match(r"\d+\.\d+|\d+|\.\d+", sql[i:])
            text = m.group(0)
            value = float(text) if "." in text else int(text)
            tokens.append(_Token("NUMBER", value, i))
            i += len(text)
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (sql[j].isalnum() or sql[j] == "_"):
                j += 1
            word = sql[i:j]
            if word.lower() in _KEYWORDS:
                tokens.append(_Token("KEYWORD", word.lower(), i))
            else:
                tokens.append(_Token("IDENT", word, i))
            i = j
            continue
        raise SqlParseError(f"unexpected character {c!r} at position {i}")
    tokens.append(_Token("EOF", None, n))
    return tokens


def guard_select_only(sql: str) -> None:
    """Reject anything that is not exactly one SELECT statement.

    Runs before parsing: the first keyword must be SELECT and no second
    statement may follow a semicolon.
    """
    stripped = sql
    while True:
        stripped = stripped.lstrip()
        if stripped.startswith("--"):
            _, _, stripped = stripped.partition("\n")
            continue
        if stripped.startswith("/*"):
            _, sep, rest = stripped[2:].partition("*/")
            if not sep:
                raise SqlSecurityError("rejected: unterminated comment")
            stripped = rest
            continue
        break
    m = re.match(r"[A-Za-z_]+", stripped)
    first = m.group(0).upper() if m else ""
    if first != "SELECT":
        raise SqlSecurityError(
            f"rejected: only SELECT statements are allowed (statement begins with {first or stripped[:10]!r})"
        )
    tokens = _tokenize(sql)
    for idx, tok in enumerate(tokens):
        if tok.kind == "OP" and tok.value == ";":
            trailing = tokens[idx + 1 :]
            if any(t.kind != "EOF" and not (t.kind == "OP" and t.value == ";") for t in trailing):
                raise SqlSecurityError("rejected: multiple statements are not allowed")


# --- AST ---------------------------------------------------------------------

@dataclass(frozen=True)
class ColRef:
    table: str | None
    name: str


@dataclass(frozen=True)
class Literal:
    value: object


@dataclass(frozen=True)
class Arith:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class Neg:
    operand: object


@dataclass(frozen=True)
class AggCall:
    fn: str  # min max sum avg count
    arg: object | None  # None means COUNT(*)


@dataclass(frozen=True)
class Cmp:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class LikeCond:
    operand: object
    pattern: str
    negated: bool


@dataclass(frozen=True)
class InCond:
    operand: object
    options: tuple
    negated: bool


@dataclass(frozen=True)
class IsNullCond:
    operand: object
    negated: bool


@dataclass(frozen=True)
class AndCond:
    left: object
    right: object


@dataclass(frozen=True)
class OrCond:
    left: object
    right: object


@dataclass(frozen=True)
class NotCond:
    operand: object


@dataclass(frozen=True)
class SelectItem:
    expr: object
    alias: str | None


@dataclass(frozen=True)
class TableRef:
    name: str
    alias: str | None


@dataclass(frozen=True)
class JoinClause:
    table: TableRef
    left: ColRef
    right: ColRef


@dataclass(frozen=True)
class OrderItem:
    column: ColRef
    descending: bool


@dataclass(frozen=True)
class Select:
    items: tuple | None  # None means SELECT *
    tables: tuple[TableRef, ...]
    joins: tuple[JoinClause, ...]
    where: object | None
    group_by: tuple[ColRef, ...]
    order_by: tuple[OrderItem, ...]
    limit: int | None


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def at_keyword(self, *words: str) -> bool:
        tok = self.peek()
        return tok.kind == "KEYWORD" and tok.value in words

    def eat_keyword(self, word: str) -> None:
        if not self.at_keyword(word):
            raise SqlParseError(f"expected {word.upper()} near position {self.peek().pos}")
        self.advance()

    def at_op(self, op: str) -> bool:
        tok = self.peek()
        return tok.kind == "OP" and tok.value == op

    def eat_op(self, op: str) -> None:
        if not self.at_op(op):
            raise SqlParseError(f"expected {op!r} near position {self.peek().pos}")
        self.advance()

    def parse_select(self) -> Select:
        self.eat_keyword("select")
        if self.at_keyword("distinct"):
            raise SqlParseError("DISTINCT is not supported by this SQL subset")
        items: tuple | None
        if self.at_op("*"):
            self.advance()
            items = None
        else:
            parsed = [self.parse_select_item()]
            while self.at_op(","):
                self.advance()
                parsed.append(self.parse_select_item())
            items = tuple(parsed)
        self.eat_keyword("from")
        tables = [self.parse_table_ref()]
        while self.at_op(","):
            self.advance()
            tables.append(self.parse_table_ref())
        joins: list[JoinClause] = []
        while self.at_keyword("join"):
            self.advance()
            table = self.parse_table_ref()
            self.eat_keyword("on")
            left = self.parse_col_ref()
            self.eat_op("=")
            right = self.parse_col_ref()
            joins.append(JoinClause(table, left, right))
        where = None
        if self.at_keyword("where"):
            self.advance()
            where = self.parse_condition()
        group_by: list[ColRef] = []
        if self.at_keyword("group"):
            self.advance()
            self.eat_keyword("by")
            group_by.append(self.parse_col_ref())
            while self.at_op(","):
                self.advance()
                group_by.append(self.parse_col_ref())
        order_by: list[OrderItem] = []
        if self.at_keyword("order"):
            self.advance()
            self.eat_keyword("by")
            order_by.append(self.parse_order_item())
            while self.at_op(","):
                self.advance()
                order_by.append(self.parse_order_item())
        limit = None
        if self.at_keyword("limit"):
            self.advance()
            tok = self.peek()
            if tok.kind != "NUMBER" or not isinstance(tok.value, int) or tok.value < 0:
                raise SqlParseError("LIMIT expects a non-negative integer")
            limit = tok.value
            self.advance()
        while self.at_op(";"):
            self.advance()
        tok = self.peek()
        if tok.kind != "EOF":
            raise SqlParseError(
                f"unexpected {tok.value!r} near position {tok.pos} (unsupported construct?)"
            )
        return Select(items, tuple(tables), tuple(joins), where, tuple(group_by), tuple(order_by), limit)

    def parse_select_item(self) -> SelectItem:
        expr = self.parse_expr()
        alias = None
        if self.at_keyword("as"):
            self.advance()
            tok = self.advance()
            if tok.kind not in ("IDENT", "KEYWORD"):
                raise SqlParseError(f"expected alias near position {tok.pos}")
            alias = str(tok.value)
        elif self.peek().kind == "IDENT":
            alias = str(self.advance().value)
        return SelectItem(expr, alias)

    def parse_table_ref(self) -> TableRef:
        tok = self.advance()
        if tok.kind != "IDENT":
            raise SqlParseError(f"expected table name near position {tok.pos}")
        alias = None
        if self.at_keyword("as"):
            self.advance()
            alias_tok = self.advance()
            if alias_tok.kind != "IDENT":
                raise SqlParseError(f"expected alias near position {alias_tok.pos}")
            alias = str(alias_tok.value)
        elif self.peek().kind == "IDENT":
            alias = str(self.advance().value)
        return TableRef(str(tok.value), alias)

    def parse_col_ref(self) -> ColRef:
        tok = self.advance()
        if tok.kind != "IDENT":
            raise SqlParseError(f"expected column name near position {tok.pos}")
        if self.at_op("."):
            self.advance()
            col = self.advance()
            if col.kind != "IDENT":
                raise SqlParseError(f"expected column after '.' near position {col.pos}")
            return ColRef(str(tok.value), str(col.value))
        return ColRef(None, str(tok.value))

    def parse_order_item(self) -> OrderItem:
        col = self.parse_col_ref()
        descending = False
        if self.at_keyword("asc"):
            self.advance()
        elif self.at_keyword("desc"):
            self.advance()
            descending = True
        return OrderItem(col, descending)

    # value expressions ------------------------------------------------------

    def parse_expr(self):
        node = self.parse_term()
        while self.at_op("+") or self.at_op("-"):
            op = str(self.advance().value)
            node = Arith(op, node, self.parse_term())
        return node

    def parse_term(self):
        node = self.parse_factor()
        while self.at_op("*") or self.at_op("/") or self.at_op("%"):
            op = str(self.advance().value)
            node = Arith(op, node, self.parse_factor())
        return node

    def parse_factor(self):
        if self.at_op("-"):
            self.advance()
            return Neg(self.parse_factor())
        return self.parse_atom()

    def parse_atom(self):
        tok = self.peek()
        if tok.kind == "NUMBER" or tok.kind == "STRING":
            self.advance()
            return Literal(tok.value)
        if tok.kind == "KEYWORD" and tok.value == "null":
            self.advance()
            return Literal(None)
        if tok.kind == "KEYWORD" and tok.value in _AGGREGATES:
            fn = str(tok.value)
            self.advance()
            self.eat_op("(")
            if self.at_op("*"):
                if fn != "count":
                    raise SqlParseError(f"{fn.upper()}(*) is not supported")
                self.advance()
                self.eat_op(")")
                return AggCall("count", None)
            arg = self.parse_expr()
            self.eat_op(")")
            return AggCall(fn, arg)
        if tok.kind == "IDENT":
            return self.parse_col_ref()
        if self.at_op("("):
            self.advance()
            node = self.parse_expr()
            self.eat_op(")")
            return node
        raise SqlParseError(f"unexpected token near position {tok.pos}")

    # conditions ---------------------------------------------------------------

    def parse_condition(self):
        node = self.parse_and_cond()
        while self.at_keyword("or"):
            self.advance()
            node = OrCond(node, self.parse_and_cond())
        return node

    def parse_and_cond(self):
        node = self.parse_not_cond()
        while self.at_keyword("and"):
            self.advance()
            node = AndCond(node, self.parse_not_cond())
        return node

    def parse_not_cond(self):
        if self.at_keyword("not"):
            self.advance()
            return NotCond(self.parse_not_cond())
        return self.parse_predicate()

    def parse_predicate(self):
        if self.at_op("("):
            saved = self.pos
            self.advance()
            try:
                inner = self.parse_condition()
                self.eat_op(")")
                return inner
            except SqlParseError:
                self.pos = saved  # fall through: parenthesized value expression
        left = self.parse_expr()
        if self.at_keyword("is"):
            self.advance()
            negated = False
            if self.at_keyword("not"):
                self.advance()
                negated = True
            self.eat_keyword("null")
            return IsNullCond(left, negated)
        negated = False
        if self.at_keyword("not"):
            self.advance()
            negated = True
            if not self.at_keyword("like", "in"):
                raise SqlParseError("expected LIKE or IN after NOT")
        if self.at_keyword("like"):
            self.advance()
            tok = self.advance()
            if tok.kind != "STRING":
                raise SqlParseError("LIKE expects a string pattern")
            return LikeCond(left, str(tok.value), negated)
        if self.at_keyword("in"):
            self.advance()
            self.eat_op("(")
            options = [self.parse_in_option()]
            while self.at_op(","):
                self.advance()
                options.append(self.parse_in_option())
            self.eat_op(")")
            return InCond(left, tuple(options), negated)
        if negated:
            raise SqlParseError("expected LIKE or IN after NOT")
        tok = self.peek()
        if tok.kind == "OP" and tok.value in ("=", "!=", "<", "<=", ">", ">="):
            op = str(self.advance().value)
            return Cmp(op, left, self.parse_expr())
        raise SqlParseError(f"expected a comparison near position {tok.pos}")

    def parse_in_option(self):
        tok = self.advance()
        if tok.kind == "OP" and tok.value == "-":
            number = self.advance()
            if number.kind != "NUMBER":
                raise SqlParseError("IN list accepts literals only")
            return -number.value
        if tok.kind in ("NUMBER", "STRING"):
            return tok.value
        if tok.kind == "KEYWORD" and tok.value == "null":
            return None
        raise SqlParseError("IN list accepts literals only")


def parse_sql(sql: str) -> Select:
    guard_select_only(sql)
    return _Parser(_tokenize(sql)).parse_select()


# --- binding -----------------------------------------------------------------

@dataclass
class _Scope:
    """Flattened column namespace of the FROM/JOIN sources."""

    entries: list[tuple[str, str, str]] = field(default_factory=list)  # (qualifier, name, type)

    def add_table(self, qualifier: str, schema: Sequence[tuple[str, str]]) -> None:
        for name, stype in schema:
            self.entries.append((qualifier, name, stype))

    def resolve(self, ref: ColRef) -> int:
        matches = []
        for i, (qualifier, name, _) in enumerate(self.entries):
            if name.lower() != ref.name.lower():
                continue
            if ref.table is not None and qualifier.lower() != ref.table.lower():
                continue
            matches.append(i)
        if not matches:
            raise SqlBindError(f"unknown column {_render_colref(ref)!r}")
        if len(matches) > 1:
            raise SqlBindError(f"ambiguous column {_render_colref(ref)!r}")
        return matches[0]

    def type_of(self, index: int) -> str:
        return self.entries[index][2]

    def output_names(self) -> list[str]:
        seen: dict[str, int] = {}
        for _, name, _ in self.entries:
            seen[name] = seen.get(name, 0) + 1
        names = []
        for qualifier, name, _ in self.entries:
            names.append(name if seen[name] == 1 else f"{qualifier}.{name}")
        return names


def _render_colref(ref: ColRef) -> str:
    return f"{ref.table}.{ref.name}" if ref.table else ref.name


class _Bound:
    """Statement with every column reference resolved against the scope."""

    def __init__(self, stmt: Select, scope: _Scope, group_idx: list[int]):
        self.stmt = stmt
        self.scope = scope
        self.group_idx = group_idx
        self.output: list[tuple[str, str]] = []  # (name, semantic type)


def _lookup_table(env_schemas: Mapping[str, Sequence[tuple[str, str]]], name: str) -> tuple[str, Sequence[tuple[str, str]]]:
    for key, schema in env_schemas.items():
        if key.lower() == name.lower():
            return key, schema
    known = ", ".join(sorted(env_schemas))
    raise SqlBindError(f"unknown table {name!r} (have: {known})")


def _bind(stmt: Select, env_schemas: Mapping[str, Sequence[tuple[str, str]]]) -> tuple[_Bound, list[tuple[str, str]], list[tuple[int, int]]]:
    """Resolve names; returns bound statement, source tables, join index pairs."""
    scope = _Scope()
    sources: list[tuple[str, str]] = []  # (env key, qualifier)
    for ref in stmt.tables:
        key, schema = _lookup_table(env_schemas, ref.name)
        qualifier = ref.alias or ref.name
        scope.add_table(qualifier, schema)
        sources.append((key, qualifier))
    join_pairs: list[tuple[int, int]] = []
    for join in stmt.joins:
        key, schema = _lookup_table(env_schemas, join.table.name)
        qualifier = join.table.alias or join.table.name
        scope.add_table(qualifier, schema)
        sources.append((key, qualifier))
        left = scope.resolve(join.left)
        right = scope.resolve(join.right)
        join_pairs.append((left, right))
    bound = _Bound(stmt, scope, [scope.resolve(c) for c in stmt.group_by])

    grouped = bool(stmt.group_by)
    has_agg = False
    if stmt.items is not None:
        has_agg = any(_contains_agg(item.expr) for item in stmt.items)
    aggregate_query = grouped or has_agg

    if stmt.items is None:
        if aggregate_query:
            raise SqlBindError("SELECT * cannot be combined with GROUP BY or aggregates")
        names = scope.output_names()
        if len(set(names)) != len(names):
            raise SqlBindError("duplicate output column after join; select explicit columns")
        bound.output = [(names[i], scope.entries[i][2]) for i in range(len(names))]
    else:
        for item in stmt.items:
            _check_expr(item.expr, scope, aggregate_query, bound.group_idx)
            name = item.alias or _expr_name(item.expr)
            bound.output.append((name, _expr_type(item.expr, scope)))
        names = [n for n, _ in bound.output]
        if len(set(names)) != len(names):
            raise SqlBindError(f"duplicate output column name; add AS aliases: {names}")

    if stmt.where is not None:
        _check_cond(stmt.where, scope)

    out_names = {name.lower() for name, _ in bound.output}
    for item in stmt.order_by:
        if item.column.table is None and item.column.name.lower() in out_names:
            continue
        if aggregate_query:
            raise SqlBindError(
                f"ORDER BY column {_render_colref(item.column)!r} must be an output column"
            )
        scope.resolve(item.column)
    return bound, sources, join_pairs


def _contains_agg(expr) -> bool:
    if isinstance(expr, AggCall):
        return True
    if isinstance(expr, Arith):
        return _contains_agg(expr.left) or _contains_agg(expr.right)
    if isinstance(expr, Neg):
        return _contains_agg(expr.operand)
    return False


def _check_expr(expr, scope: _Scope, aggregate_query: bool, group_idx: list[int], inside_agg: bool = False) -> None:
    if isinstance(expr, Literal):
        return
    if isinstance(expr, ColRef):
        idx = scope.resolve(expr)
        if aggregate_query and not inside_agg and idx not in group_idx:
            raise SqlBindError(
                f"column {_render_colref(expr)!r} must appear in GROUP BY or inside an aggregate"
            )
        return
    if isinstance(expr, Neg):
        _check_expr(expr.operand, scope, aggregate_query, group_idx, inside_agg)
        return
    if isinstance(expr, Arith):
        _check_expr(expr.left, scope, aggregate_query, group_idx, inside_agg)
        _check_expr(expr.right, scope, aggregate_query, group_idx, inside_agg)
        return
    if isinstance(expr, AggCall):
        if inside_agg:
            raise SqlBindError("nested aggregates are not allowed")
        if expr.arg is not None:
            _check_expr(expr.arg, scope, aggregate_query, group_idx, inside_agg=True)
        return
    raise SqlBindError(f"unsupported expression {expr!r}")


def _check_cond(cond, scope: _Scope) -> None:
    if isinstance(cond, (AndCond, OrCond)):
        _check_cond(cond.left, scope)
        _check_cond(cond.right, scope)
    elif isinstance(cond, NotCond):
        _check_cond(cond.operand, scope)
    elif isinstance(cond, Cmp):
        if _contains_agg(cond.left) or _contains_agg(cond.right):
            raise SqlBindError("aggregates are not allowed in WHERE")
        _check_expr(cond.left, scope, False, [])
        _check_expr(cond.right, scope, False, [])
    elif isinstance(cond, (LikeCond, InCond, IsNullCond)):
        if _contains_agg(cond.operand):
            raise SqlBindError("aggregates are not allowed in WHERE")
        _check_expr(cond.operand, scope, False, [])
    else:
        raise SqlBindError(f"unsupported condition {cond!r}")


def _expr_name(expr) -> str:
    if isinstance(expr, ColRef):
        return expr.name
    if isinstance(expr, Literal):
        return "null" if expr.value is None else str(expr.value)
    if isinstance(expr, Neg):
        return f"-{_expr_name(expr.operand)}"
    if isinstance(expr, Arith):
        return f"{_expr_name(expr.left)} {expr.op} {_expr_name(expr.right)}"
    if isinstance(expr, AggCall):
        inner = "*" if expr.arg is None else _expr_name(expr.arg)
        return f"{expr.fn.upper()}({inner})"
    return "expr"


def _expr_type(expr, scope: _Scope) -> str:
    if isinstance(expr, ColRef):
        return scope.type_of(scope.resolve(expr))
    if isinstance(expr, Literal):
        if isinstance(expr.value, str) or expr.value is None:
            return TEXT
        return NUMBER
    if isinstance(expr, (Neg, Arith)):
        return NUMBER
    if isinstance(expr, AggCall):
        if expr.fn in ("count", "sum", "avg"):
            return NUMBER
        return _expr_type(expr.arg, scope)
    return TEXT


# --- evaluation ---------------------------------------------------------------

def _coerce_number(value: Cell) -> float | int | None:
    if value is None or isinstance(value, bool):
        return None
    if isinstance(value, (int, float)):
        return value
    if isinstance(value, str):
        text = value.strip()
        try:
            return int(text)
        except ValueError:
            try:
                return float(text)
            except ValueError:
                return None
    return None


def _eval_expr(expr, row: tuple, scope: _Scope, group_rows: list[tuple] | None = None) -> Cell:
    if isinstance(expr, Literal):
        return expr.value
    if isinstance(expr, ColRef):
        value = row[scope.resolve(expr)]
        return value
    if isinstance(expr, Neg):
        value = _coerce_number(_eval_expr(expr.operand, row, scope, group_rows))
        return None if value is None else -value
    if isinstance(expr, Arith):
        left = _coerce_number(_eval_expr(expr.left, row, scope, group_rows))
        right = _coerce_number(_eval_expr(expr.right, row, scope, group_rows))
        if left is None or right is None:
            return None
        if expr.op == "+":
            return left + right
        if expr.op == "-":
            return left - right
        if expr.op == "*":
            return left * right
        if expr.op == "/":
            return None if right == 0 else left / right
        if expr.op == "%":
            return None if right == 0 else left % right
        raise SqlError(f"unknown arithmetic operator {expr.op!r}")
    if isinstance(expr, AggCall):
        rows = group_rows if group_rows is not None else []
        return _eval_aggregate(expr, rows, scope)
    raise SqlError(f"cannot evaluate {expr!r}")


def _eval_aggregate(agg: AggCall, rows: list[tuple], scope: _Scope) -> Cell:
    if agg.fn == "count":
        if agg.arg is None:
            return len(rows)
        return sum(1 for row in rows if _eval_expr(agg.arg, row, scope) is not None)
    values = [_eval_expr(agg.arg, row, scope) for row in rows]
    values = [v for v in values if v is not None]
    if agg.fn in ("sum", "avg"):
        numbers = [n for n in (_coerce_number(v) for v in values) if n is not None]
        if not numbers:
            return None
        total = sum(numbers)
        return total if agg.fn == "sum" else total / len(numbers)
    if not values:
        return None
    kinds = {type(v) for v in values}
    if kinds <= {int, float}:
        return min(values) if agg.fn == "min" else max(values)
    if kinds == {str}:
        return min(values) if agg.fn == "min" else max(values)
    raise SqlTypeError(f"{agg.fn.upper()} over mixed value kinds")


def _comparable(value: Cell) -> Cell:
    if isinstance(value, (ImageRef, DocRef)):
        return value.path
    return value


def _eval_cmp(op: str, left: Cell, right: Cell) -> bool | None:
    left, right = _comparable(left), _comparable(right)
    if left is None or right is None:
        return None
    left_num = isinstance(left, (int, float)) and not isinstance(left, bool)
    right_num = isinstance(right, (int, float)) and not isinstance(right, bool)
    if left_num != right_num:
        # Mixed number/text: coerce the text side, null on failure.
        if isinstance(left, str):
            left = _coerce_number(left)
            left_num = True
        elif isinstance(right, str):
            right = _coerce_number(right)
            right_num = True
        if left is None or right is None:
            return None
    try:
        if op == "=":
            return left == right
        if op == "!=":
            return left != right
        if op == "<":
            return left < right
        if op == "<=":
            return left <= right
        if op == ">":
            return left > right
        if op == ">=":
            return left >= right
    except TypeError:
        raise SqlTypeError(f"type error in predicate: cannot compare {left!r} with {right!r}")
    raise SqlError(f"unknown comparison {op!r}")


def _like_match(value: Cell, pattern: str) -> bool | None:
    if value is None:
        return None
    if isinstance(value, (ImageRef, DocRef)):
        value = value.path
    if not isinstance(value, str):
        return None
    regex = re.escape(pattern).replace("%", ".*").replace("_", ".")
    return re.fullmatch(regex, value, re.IGNORECASE | re.DOTALL) is not None


def _eval_cond(cond, row: tuple, scope: _Scope) -> bool | None:
    if isinstance(cond, AndCond):
        left = _eval_cond(cond.left, row, scope)
        if left is False:
            return False
        right = _eval_cond(cond.right, row, scope)
        if right is False:
            return False
        return None if left is None or right is None else True
    if isinstance(cond, OrCond):
        left = _eval_cond(cond.left, row, scope)
        if left is True:
            return True
        right = _eval_cond(cond.right, row, scope)
        if right is True:
            return True
        return None if left is None or right is None else False
    if isinstance(cond, NotCond):
        inner = _eval_cond(cond.operand, row, scope)
        return None if inner is None else (not inner)
    if isinstance(cond, Cmp):
        return _eval_cmp(cond.op, _eval_expr(cond.left, row, scope), _eval_expr(cond.right, row, scope))
    if isinstance(cond, LikeCond):
        matched = _like_match(_eval_expr(cond.operand, row, scope), cond.pattern)
        if matched is None:
            return None
        return (not matched) if cond.negated else matched
    if isinstance(cond, InCond):
        value = _eval_expr(cond.operand, row, scope)
        if value is None:
            return None
        saw_null = False
        hit = False
        for option in cond.options:
            if option is None:
                saw_null = True
                continue
            if _eval_cmp("=", value, option) is True:
                hit = True
                break
        if hit:
            result: bool | None = True
        elif saw_null:
            result = None
        else:
            result = False
        if result is None:
            return None
        return (not result) if cond.negated else result
    if isinstance(cond, IsNullCond):
        value = _eval_expr(cond.operand, row, scope)
        is_null = value is None
        return (not is_null) if cond.negated else is_null
    raise SqlError(f"cannot evaluate condition {cond!r}")


def _group_sort_key(key: tuple) -> tuple:
    return tuple((0, 0) if v is None else (1, v) for v in key)


def validate_sql(sql: str, env_schemas: Mapping[str, Sequence[tuple[str, str]]]) -> list[str]:
    """Static check; returns human-readable violations instead of raising."""
    try:
        stmt = parse_sql(sql)
        _bind(stmt, env_schemas)
    except SqlError as exc:
        return [str(exc)]
    return []


def referenced_tables(sql: str) -> list[str]:
    stmt = parse_sql(sql)
    names = [t.name for t in stmt.tables] + [j.table.name for j in stmt.joins]
    out: list[str] = []
    for name in names:
        if name not in out:
            out.append(name)
    return out


def execute_sql(sql: str, env: Mapping[str, Relation]) -> Relation:
    """Run one SELECT statement over the named relations in `env`."""
    stmt = parse_sql(sql)
    env_schemas = {name: rel.schema for name, rel in env.items()}
    bound, sources, join_pairs = _bind(stmt, env_schemas)
    scope = bound.scope

    rows: list[tuple] = [()]
    for key, _ in sources[: len(stmt.tables)]:
        rel = _lookup_env(env, key)
        rows = [prefix + r for prefix in rows for r in rel.rows]
    for join_no, (key, _) in enumerate(sources[len(stmt.tables) :]):
        rel = _lookup_env(env, key)
        left_idx, right_idx = join_pairs[join_no]
        joined: list[tuple] = []
        for prefix in rows:
            for r in rel.rows:
                combined = prefix + r
                if _eval_cmp("=", combined[left_idx], combined[right_idx]) is True:
                    joined.append(combined)
        rows = joined

    if stmt.where is not None:
        rows = [row for row in rows if _eval_cond(stmt.where, row, scope) is True]

    grouped = bool(stmt.group_by)
    has_agg = stmt.items is not None and any(_contains_agg(i.expr) for i in stmt.items)

    out_rows: list[tuple]
    if grouped:
        groups: dict[tuple, list[tuple]] = {}
        for row in rows:
            key = tuple(row[i] for i in bound.group_idx)
            groups.setdefault(key, []).append(row)
        ordered_keys = sorted(groups, key=_group_sort_key)
        out_rows = []
        for key in ordered_keys:
            members = groups[key]
            exemplar = members[0]
            out_rows.append(
                tuple(_eval_expr(item.expr, exemplar, scope, members) for item in stmt.items)
            )
    elif has_agg:
        out_rows = [tuple(_eval_expr(item.expr, (), scope, rows) for item in stmt.items)]
    elif stmt.items is None:
        out_rows = list(rows)
    else:
        out_rows = [tuple(_eval_expr(item.expr, row, scope) for item in stmt.items) for row in rows]

    if stmt.order_by:
        order_values = _order_values(stmt, bound, rows, out_rows, scope, grouped or has_agg)
        indexed = list(range(len(out_rows)))
        for pos in range(len(stmt.order_by) - 1, -1, -1):
            item = stmt.order_by[pos]
            indexed.sort(
                key=lambda i: _group_sort_key((order_values[i][pos],)),
                reverse=item.descending,
            )
        out_rows = [out_rows[i] for i in indexed]

    if stmt.limit is not None:
        out_rows = out_rows[: stmt.limit]

    out_rows = [tuple(_normalize_cell(v, bound.output[i][1]) for i, v in enumerate(row)) for row in out_rows]
    return Relation(tuple(bound.output), tuple(out_rows))


def _order_values(stmt: Select, bound: _Bound, src_rows: list[tuple], out_rows: list[tuple], scope: _Scope, aggregated: bool) -> list[tuple]:
    """Per output row, the tuple of ORDER BY sort values."""
    out_names = [name.lower() for name, _ in bound.output]
    values: list[tuple] = []
    for i, out_row in enumerate(out_rows):
        row_values = []
        for item in stmt.order_by:
            if item.column.table is None and item.column.name.lower() in out_names:
                row_values.append(out_row[out_names.index(item.column.name.lower())])
            elif not aggregated:
                row_values.append(src_rows[i][scope.resolve(item.column)])
            else:
                raise SqlBindError(
                    f"ORDER BY column {_render_colref(item.column)!r} is not an output column"
                )
        values.append(tuple(row_values))
    return values


def _normalize_cell(value: Cell, semantic_type: str) -> Cell:
    # Aggregates/arithmetic can surface numeric strings via coercion rules.
    if semantic_type == NUMBER and isinstance(value, str):
        coerced = _coerce_number(value)
        return coerced
    if semantic_type == BOOLEAN and isinstance(value, (int, float)) and not isinstance(value, bool):
        return bool(value)
    return value


def _lookup_env(env: Mapping[str, Relation], name: str) -> Relation:
    for key, rel in env.items():
        if key.lower() == name.lower():
            return rel
    raise SqlBindError(f"unknown table {name!r}")
