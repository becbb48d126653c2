"""Restricted, total row-expression language backing generated transforms.

Grammar (loosest binding first):

    or            a or b
    and           a and b
    not           not a
    comparison    = != < <= > >=        (== accepted as =)
    additive      + -
    multiplicative * / %
    unary         -a
    atom          literal | column | col(name) | builtin(...) | if(c, a, b) | (e)

There are no loops, recursion, assignments, or I/O: every expression is a
finite tree and evaluation is total. Anything that would be a runtime fault
(bad parse_int input, division by zero, out-of-range substr) yields null, and
null propagates through operators, except that `if` treats a null condition as
false and and/or follow three-valued logic.

Division of two integers rounds toward negative infinity, so
((year - 1) / 100) + 1 computes a calendar century for any positive year.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .relation import BOOLEAN, DOCUMENT, IMAGE, NUMBER, TEXT, Cell, DocRef, ImageRef


class ExprError(Exception):
    """Base class for expression-language failures."""


class ExprSyntaxError(ExprError):
    def __init__(self, message: str, pos: int, expected: Sequence[str] = ()):
        self.pos = pos
        self.expected = tuple(expected)
        detail = f"{message} at position {pos}"
        if expected:
            detail += " (expected " + " or ".join(expected) + ")"
        super().__init__(detail)


class ExprTypeError(ExprError):
    pass


# --- AST -------------------------------------------------------------------

@dataclass(frozen=True)
class Lit:
    value: object  # int | float | str | bool | None


@dataclass(frozen=True)
class Col:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str  # "-" | "not"
    operand: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str  # arithmetic, comparison, "and", "or"
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class If:
    cond: "Expr"
    then: "Expr"
    orelse: "Expr"


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple["Expr", ...]


Expr = object  # Lit | Col | Unary | Binary | If | Call


# --- lexer -----------------------------------------------------------------

_KEYWORDS = {"and", "or", "not", "if", "col", "true", "false", "null"}
_TWO_CHAR = {"==", "!=", "<=", ">="}
_ONE_CHAR = set("+-*/%=<>(),")
_UNICODE_OPS = {"≠": "!=", "≤": "<=", "≥": ">="}


@dataclass(frozen=True)
class _Token:
    kind: str  # NUMBER STRING IDENT KEYWORD OP EOF
    value: object
    pos: int


def _tokenize(source: str) -> list[_Token]:
    tokens: list[_Token] = []
    i, n = 0, len(source)
    while i < n:
        c = source[i]
        if c.isspace():
            i += 1
            continue
        if c in _UNICODE_OPS:
            tokens.append(_Token("OP", _UNICODE_OPS[c], i))
            i += 1
            continue
        if source[i : i + 2] in _TWO_CHAR:
            op = source[i : i + 2]
            tokens.append(_Token("OP", "=" if op == "==" else op, i))
            i += 2
            continue
        if c in _ONE_CHAR:
            tokens.append(_Token("OP", c, i))
            i += 1
            continue
        if c in "\"'":
            quote, j, buf = c, i + 1, []
            while j < n and source[j] != quote:
                if source[j] == "\\" and j + 1 < n:
                    esc = source[j + 1]
                    buf.append({"n": "\n", "t": "\t"}.get(esc, esc))
                    j += 2
                else:
                    buf.append(source[j])
                    j += 1
            if j >= n:
                raise ExprSyntaxError("unterminated string literal", i)
            tokens.append(_Token("STRING", "".join(buf), i))
            i = j + 1
            continue
        if c.isdigit():
            j = i
            while j < n and source[j].isdigit():
                j += 1
            if j < n and source[j] == "." and j + 1 < n and source[j + 1].isdigit():
                j += 1
                while j < n and source[j].isdigit():
                    j += 1
                tokens.append(_Token("NUMBER", float(source[i:j]), i))
            else:
                tokens.append(_Token("NUMBER", int(source[i:j]), i))
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            word = source[i:j]
            lowered = word.lower()
            if lowered in _KEYWORDS:
                tokens.append(_Token("KEYWORD", lowered, i))
            else:
                tokens.append(_Token("IDENT", word, i))
            i = j
            continue
        raise ExprSyntaxError(f"unexpected character {c!r}", i)
    tokens.append(_Token("EOF", None, n))
    return tokens


# --- parser ----------------------------------------------------------------

_COMPARISONS = ("=", "!=", "<", "<=", ">", ">=")


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

    def expect_op(self, op: str) -> None:
        tok = self.peek()
        if tok.kind != "OP" or tok.value != op:
            raise ExprSyntaxError(f"unexpected {self._show(tok)}", tok.pos, [repr(op)])
        self.advance()

    @staticmethod
    def _show(tok: _Token) -> str:
        return "end of input" if tok.kind == "EOF" else repr(str(tok.value))

    def parse(self) -> Expr:
        expr = self.parse_or()
        tok = self.peek()
        if tok.kind != "EOF":
            raise ExprSyntaxError(f"unexpected {self._show(tok)}", tok.pos, ["end of input"])
        return expr

    def parse_or(self) -> Expr:
        node = self.parse_and()
        while self.peek().kind == "KEYWORD" and self.peek().value == "or":
            self.advance()
            node = Binary("or", node, self.parse_and())
        return node

    def parse_and(self) -> Expr:
        node = self.parse_not()
        while self.peek().kind == "KEYWORD" and self.peek().value == "and":
            self.advance()
            node = Binary("and", node, self.parse_not())
        return node

    def parse_not(self) -> Expr:
        if self.peek().kind == "KEYWORD" and self.peek().value == "not":
            self.advance()
            return Unary("not", self.parse_not())
        return self.parse_comparison()

    def parse_comparison(self) -> Expr:
        node = self.parse_additive()
        tok = self.peek()
        if tok.kind == "OP" and tok.value in _COMPARISONS:
            self.advance()
            node = Binary(tok.value, node, self.parse_additive())
        return node

    def parse_additive(self) -> Expr:
        node = self.parse_multiplicative()
        while self.peek().kind == "OP" and self.peek().value in ("+", "-"):
            op = self.advance().value
            node = Binary(op, node, self.parse_multiplicative())
        return node

    def parse_multiplicative(self) -> Expr:
        node = self.parse_unary()
        while self.peek().kind == "OP" and self.peek().value in ("*", "/", "%"):
            op = self.advance().value
            node = Binary(op, node, self.parse_unary())
        return node

    def parse_unary(self) -> Expr:
        tok = self.peek()
        if tok.kind == "OP" and tok.value == "-":
            self.advance()
            # Fold a directly following number into a negative literal so
            # rendering round-trips structurally.
            if self.peek().kind == "NUMBER":
                return Lit(-self.advance().value)
            return Unary("-", self.parse_unary())
        return self.parse_atom()

    def parse_atom(self) -> Expr:
        tok = self.peek()
        if tok.kind == "NUMBER" or tok.kind == "STRING":
            self.advance()
            return Lit(tok.value)
        if tok.kind == "KEYWORD":
            if tok.value in ("true", "false"):
                self.advance()
                return Lit(tok.value == "true")
            if tok.value == "null":
                self.advance()
                return Lit(None)
            if tok.value == "if":
                self.advance()
                self.expect_op("(")
                cond = self.parse_or()
                self.expect_op(",")
                then = self.parse_or()
                self.expect_op(",")
                orelse = self.parse_or()
                self.expect_op(")")
                return If(cond, then, orelse)
            if tok.value == "col":
                self.advance()
                self.expect_op("(")
                name_tok = self.peek()
                if name_tok.kind not in ("IDENT", "STRING", "KEYWORD"):
                    raise ExprSyntaxError(
                        f"unexpected {self._show(name_tok)}", name_tok.pos, ["column name"]
                    )
                self.advance()
                self.expect_op(")")
                return Col(str(name_tok.value))
            raise ExprSyntaxError(f"unexpected {tok.value!r}", tok.pos, ["expression"])
        if tok.kind == "IDENT":
            self.advance()
            nxt = self.peek()
            if nxt.kind == "OP" and nxt.value == "(":
                self.advance()
                args: list[Expr] = []
                if not (self.peek().kind == "OP" and self.peek().value == ")"):
                    args.append(self.parse_or())
                    while self.peek().kind == "OP" and self.peek().value == ",":
                        self.advance()
                        args.append(self.parse_or())
                self.expect_op(")")
                return Call(str(tok.value), tuple(args))
            return Col(str(tok.value))
        if tok.kind == "OP" and tok.value == "(":
            self.advance()
            node = self.parse_or()
            self.expect_op(")")
            return node
        raise ExprSyntaxError(f"unexpected {self._show(tok)}", tok.pos, ["expression"])


def parse_expr(source: str) -> Expr:
    """Parse an expression; raises ExprSyntaxError with position and hints."""
    return _Parser(_tokenize(source)).parse()


# --- rendering -------------------------------------------------------------

_PREC = {"or": 1, "and": 2, "not": 3, "cmp": 4, "add": 5, "mul": 6, "neg": 7, "atom": 8}


def _prec_of(expr: Expr) -> int:
    if isinstance(expr, Binary):
        if expr.op == "or":
            return _PREC["or"]
        if expr.op == "and":
            return _PREC["and"]
        if expr.op in _COMPARISONS:
            return _PREC["cmp"]
        if expr.op in ("+", "-"):
            return _PREC["add"]
        return _PREC["mul"]
    if isinstance(expr, Unary):
        return _PREC["not"] if expr.op == "not" else _PREC["neg"]
    return _PREC["atom"]


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def render_expr(expr: Expr) -> str:
    """Canonical source text; parse_expr(render_expr(e)) rebuilds e."""
    if isinstance(expr, Lit):
        if expr.value is None:
            return "null"
        if isinstance(expr.value, bool):
            return "true" if expr.value else "false"
        if isinstance(expr.value, str):
            return _quote(expr.value)
        return repr(expr.value)
    if isinstance(expr, Col):
        return f"col({expr.name})"
    if isinstance(expr, Unary):
        inner = render_expr(expr.operand)
        if _prec_of(expr.operand) < _prec_of(expr):
            inner = f"({inner})"
        if expr.op == "not":
            return f"not {inner}"
        if inner.startswith("-"):
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(expr, Binary):
        prec = _prec_of(expr)
        left = render_expr(expr.left)
        right = render_expr(expr.right)
        # Left-associative chain: equal precedence needs parens on the right.
        if _prec_of(expr.left) < prec:
            left = f"({left})"
        if _prec_of(expr.right) <= prec:
            right = f"({right})"
        return f"{left} {expr.op} {right}"
    if isinstance(expr, If):
        parts = ", ".join(render_expr(e) for e in (expr.cond, expr.then, expr.orelse))
        return f"if({parts})"
    if isinstance(expr, Call):
        return f"{expr.name}(" + ", ".join(render_expr(a) for a in expr.args) + ")"
    raise ExprError(f"cannot render {expr!r}")


# --- type checking ---------------------------------------------------------

NULL = "NULL"  # type of the bare null literal; unifies with anything


@dataclass(frozen=True)
class ExprType:
    base: str  # NUMBER | TEXT | BOOLEAN | NULL
    nullable: bool = True

    def __str__(self) -> str:
        return f"NULLABLE<{self.base}>" if self.nullable else self.base


def _unify(a: ExprType, b: ExprType, where: str) -> ExprType:
    if a.base == NULL:
        return ExprType(b.base, True)
    if b.base == NULL:
        return ExprType(a.base, True)
    if a.base != b.base:
        raise ExprTypeError(f"{where}: cannot unify {a} with {b}")
    return ExprType(a.base, a.nullable or b.nullable)


# name -> (parameter bases, result base, result forced nullable)
_BUILTINS: dict[str, tuple[tuple[str, ...], str, bool]] = {
    "substr": ((TEXT, NUMBER, NUMBER), TEXT, True),
    "split": ((TEXT, TEXT, NUMBER), TEXT, True),
    "parse_int": ((TEXT,), NUMBER, True),
    "parse_float": ((TEXT,), NUMBER, True),
    "lower": ((TEXT,), TEXT, False),
    "upper": ((TEXT,), TEXT, False),
    "trim": ((TEXT,), TEXT, False),
    "len": ((TEXT,), NUMBER, False),
    "abs": ((NUMBER,), NUMBER, False),
    "floor": ((NUMBER,), NUMBER, False),
    "round": ((NUMBER,), NUMBER, False),
}

BUILTIN_NAMES = tuple(sorted(_BUILTINS)) + ("concat",)


def _column_expr_type(semantic_type: str) -> ExprType:
    # Reference columns are seen by expressions as their path text.
    if semantic_type in (IMAGE, DOCUMENT):
        return ExprType(TEXT, True)
    return ExprType(semantic_type, True)


def typecheck(expr: Expr, schema: Mapping[str, str]) -> ExprType:
    """Assign a type to every node or raise ExprTypeError.

    `schema` maps column names to relation semantic types.
    """
    if isinstance(expr, Lit):
        if expr.value is None:
            return ExprType(NULL, True)
        if isinstance(expr.value, bool):
            return ExprType(BOOLEAN, False)
        if isinstance(expr.value, str):
            return ExprType(TEXT, False)
        return ExprType(NUMBER, False)
    if isinstance(expr, Col):
        if expr.name not in schema:
            known = ", ".join(sorted(schema))
            raise ExprTypeError(f"unknown column {expr.name!r} (have: {known})")
        return _column_expr_type(schema[expr.name])
    if isinstance(expr, Unary):
        inner = typecheck(expr.operand, schema)
        if expr.op == "not":
            _require(inner, BOOLEAN, "operand of not")
            return ExprType(BOOLEAN, inner.nullable)
        _require(inner, NUMBER, "operand of unary -")
        return ExprType(NUMBER, inner.nullable)
    if isinstance(expr, Binary):
        left = typecheck(expr.left, schema)
        right = typecheck(expr.right, schema)
        if expr.op in ("and", "or"):
            _require(left, BOOLEAN, f"left operand of {expr.op}")
            _require(right, BOOLEAN, f"right operand of {expr.op}")
            return ExprType(BOOLEAN, left.nullable or right.nullable)
        if expr.op in _COMPARISONS:
            merged = _unify(left, right, f"comparison {expr.op!r}")
            if merged.base == BOOLEAN and expr.op not in ("=", "!="):
                raise ExprTypeError("booleans only support = and != comparisons")
            return ExprType(BOOLEAN, True)
        _require(left, NUMBER, f"left operand of {expr.op!r}")
        _require(right, NUMBER, f"right operand of {expr.op!r}")
        nullable = left.nullable or right.nullable or expr.op in ("/", "%")
        return ExprType(NUMBER, nullable)
    if isinstance(expr, If):
        cond = typecheck(expr.cond, schema)
        _require(cond, BOOLEAN, "if condition")
        return _unify(typecheck(expr.then, schema), typecheck(expr.orelse, schema), "if branches")
    if isinstance(expr, Call):
        if expr.name == "concat":
            if not expr.args:
                raise ExprTypeError("concat needs at least one argument")
            for arg in expr.args:
                typecheck(arg, schema)
            return ExprType(TEXT, False)
        sig = _BUILTINS.get(expr.name)
        if sig is None:
            raise ExprTypeError(
                f"unknown function {expr.name!r} (have: {', '.join(BUILTIN_NAMES)})"
            )
        params, result, forced_nullable = sig
        if len(expr.args) != len(params):
            raise ExprTypeError(
                f"{expr.name} takes {len(params)} argument(s), got {len(expr.args)}"
            )
        nullable = forced_nullable
        for i, (arg, want) in enumerate(zip(expr.args, params), start=1):
            got = typecheck(arg, schema)
            _require(got, want, f"argument {i} of {expr.name}")
            nullable = nullable or got.nullable
        return ExprType(result, nullable)
    raise ExprTypeError(f"cannot type {expr!r}")


def _require(got: ExprType, want: str, where: str) -> None:
    if got.base not in (want, NULL):
        raise ExprTypeError(f"{where} must be {want}, got {got}")


# --- evaluation ------------------------------------------------------------

def eval_expr(expr: Expr, row: Mapping[str, Cell]) -> Cell:
    """Total evaluation: faults become null, null propagates."""
    if isinstance(expr, Lit):
        return expr.value
    if isinstance(expr, Col):
        value = row.get(expr.name)
        if isinstance(value, (ImageRef, DocRef)):
            return value.path
        return value
    if isinstance(expr, Unary):
        value = eval_expr(expr.operand, row)
        if expr.op == "not":
            return None if value is None else (not value)
        return None if value is None else -value
    if isinstance(expr, Binary):
        if expr.op == "and":
            left = eval_expr(expr.left, row)
            if left is False:
                return False
            right = eval_expr(expr.right, row)
            if right is False:
                return False
            return None if left is None or right is None else True
        if expr.op == "or":
            left = eval_expr(expr.left, row)
            if left is True:
                return True
            right = eval_expr(expr.right, row)
            if right is True:
                return True
            return None if left is None or right is None else False
        left = eval_expr(expr.left, row)
        right = eval_expr(expr.right, row)
        if left is None or right is None:
            return None
        if expr.op in _COMPARISONS:
            return _compare(expr.op, left, right)
        return _arith(expr.op, left, right)
    if isinstance(expr, If):
        cond = eval_expr(expr.cond, row)
        # A null condition falls through to the else branch.
        if cond is True:
            return eval_expr(expr.then, row)
        return eval_expr(expr.orelse, row)
    if isinstance(expr, Call):
        args = [eval_expr(a, row) for a in expr.args]
        return _call(expr.name, args)
    return None


def _compare(op: str, left: Cell, right: Cell) -> Cell:
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
        return left >= right
    except TypeError:
        return None


def _arith(op: str, left: Cell, right: Cell) -> Cell:
    if not _is_number(left) or not _is_number(right):
        return None
    if op == "+":
        return left + right
    if op == "-":
        return left - right
    if op == "*":
        return left * right
    if op == "/":
        if right == 0:
            return None
        if isinstance(left, int) and isinstance(right, int):
            return left // right  # floor division, rounds toward -inf
        return left / right
    if op == "%":
        if right == 0:
            return None
        return left % right
    return None


def _is_number(value: Cell) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _call(name: str, args: list[Cell]) -> Cell:
    if name == "concat":
        if any(a is None for a in args):
            return None
        return "".join(_as_text(a) for a in args)
    if any(a is None for a in args):
        return None
    try:
        if name == "substr":
            s, start, length = args
            start, length = _as_index(start), _as_index(length)
            if start is None or length is None or start < 0 or length < 0:
                return None
            return s[start : start + length]
        if name == "split":
            s, sep, i = args
            i = _as_index(i)
            if i is None or sep == "":
                return None
            parts = s.split(sep)
            return parts[i] if 0 <= i < len(parts) else None
        if name == "parse_int":
            return int(str(args[0]).strip())
        if name == "parse_float":
            return float(str(args[0]).strip())
        if name == "lower":
            return args[0].lower()
        if name == "upper":
            return args[0].upper()
        if name == "trim":
            return args[0].strip()
        if name == "len":
            return len(args[0])
        if name == "abs":
            return abs(args[0])
        if name == "floor":
            return math.floor(args[0])
        if name == "round":
            return round(args[0])
    except (ValueError, TypeError, OverflowError):
        return None
    return None


def _as_text(value: Cell) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def _as_index(value: Cell) -> int | None:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        return None
    if isinstance(value, float):
        if not value.is_integer():
            return None
        value = int(value)
    return value
