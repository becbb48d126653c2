"""Expression language: parsing, typing, total evaluation, round-trips."""

import random

import pytest

from lakequery.expr import (
    Binary,
    Call,
    Col,
    ExprSyntaxError,
    ExprTypeError,
    If,
    Lit,
    Unary,
    eval_expr,
    parse_expr,
    render_expr,
    typecheck,
)

CENTURY_EXPR = "((parse_int(substr(inception, 0, 4)) - 1) / 100) + 1"


def century_oracle(year: int) -> int:
    return (year - 1) // 100 + 1


class TestParsing:
    def test_century_expression_structure(self):
        ast = parse_expr(CENTURY_EXPR)
        # ((parse_int(substr(...)) - 1) / 100) + 1 nests six levels deep.
        assert ast == Binary(
            "+",
            Binary(
                "/",
                Binary(
                    "-",
                    Call("parse_int", (Call("substr", (Col("inception"), Lit(0), Lit(4))),)),
                    Lit(1),
                ),
                Lit(100),
            ),
            Lit(1),
        )

    def test_conditional(self):
        ast = parse_expr('if(len(title) > 10, "long", "short")')
        assert isinstance(ast, If)
        assert ast.then == Lit("long")
        assert ast.orelse == Lit("short")

    def test_incomplete_input_reports_position(self):
        with pytest.raises(ExprSyntaxError) as err:
            parse_expr("1 + ")
        assert err.value.pos == 4
        assert err.value.expected

    def test_error_carries_expected_tokens(self):
        with pytest.raises(ExprSyntaxError) as err:
            parse_expr("substr(a, 1 2)")
        assert err.value.expected

    def test_col_call_and_bare_identifier_agree(self):
        assert parse_expr("col(title)") == parse_expr("title") == Col("title")

    def test_precedence(self):
        assert parse_expr("1 + 2 * 3") == Binary("+", Lit(1), Binary("*", Lit(2), Lit(3)))
        assert parse_expr("not a = b") == Unary("not", Binary("=", Col("a"), Col("b")))
        assert parse_expr("a or b and c") == Binary(
            "or", Col("a"), Binary("and", Col("b"), Col("c"))
        )

    def test_unicode_comparison_aliases(self):
        assert parse_expr("a ≤ b") == parse_expr("a <= b")


class TestEvaluation:
    @pytest.mark.parametrize(
        "year", [1503, 1600, 1601, 2000, 2001, 1, 99, 100, 101, 1999]
    )
    def test_century_matches_oracle(self, year):
        ast = parse_expr(CENTURY_EXPR)
        assert eval_expr(ast, {"inception": str(year)}) == century_oracle(year)

    def test_parse_int_non_numeric_is_null(self):
        assert eval_expr(parse_expr('parse_int("Mona Lisa")'), {}) is None

    def test_division_by_zero_is_null(self):
        assert eval_expr(parse_expr("1 / 0"), {}) is None
        assert eval_expr(parse_expr("1 % 0"), {}) is None

    def test_integer_division_floors_toward_negative_infinity(self):
        assert eval_expr(parse_expr("-7 / 2"), {}) == -4
        assert eval_expr(parse_expr("7 / 2"), {}) == 3
        assert eval_expr(parse_expr("7.0 / 2"), {}) == 3.5

    def test_null_propagates_through_operators(self):
        assert eval_expr(parse_expr("missing + 1"), {"missing": None}) is None
        assert eval_expr(parse_expr("upper(missing)"), {"missing": None}) is None

    def test_if_null_condition_takes_else(self):
        ast = parse_expr('if(x > 0, "pos", "other")')
        assert eval_expr(ast, {"x": None}) == "other"
        assert eval_expr(ast, {"x": 3}) == "pos"

    def test_three_valued_logic(self):
        assert eval_expr(parse_expr("a and b"), {"a": False, "b": None}) is False
        assert eval_expr(parse_expr("a or b"), {"a": True, "b": None}) is True
        assert eval_expr(parse_expr("a and b"), {"a": True, "b": None}) is None
        assert eval_expr(parse_expr("not a"), {"a": None}) is None

    def test_builtins(self):
        assert eval_expr(parse_expr('split("a-b-c", "-", 1)'), {}) == "b"
        assert eval_expr(parse_expr('split("a-b-c", "-", 9)'), {}) is None
        assert eval_expr(parse_expr('concat("a", 1, true)'), {}) == "a1true"
        assert eval_expr(parse_expr('trim("  x ")'), {}) == "x"
        assert eval_expr(parse_expr('substr("hello", 1, 3)'), {}) == "ell"
        assert eval_expr(parse_expr('substr("hello", -1, 3)'), {}) is None
        assert eval_expr(parse_expr("floor(2.7)"), {}) == 2
        assert eval_expr(parse_expr("abs(-4)"), {}) == 4


class TestTypechecking:
    def test_unknown_column_rejected(self):
        with pytest.raises(ExprTypeError, match="unknown column"):
            typecheck(parse_expr("nope + 1"), {"title": "TEXT"})

    def test_arithmetic_needs_numbers(self):
        with pytest.raises(ExprTypeError, match="NUMBER"):
            typecheck(parse_expr("title + 1"), {"title": "TEXT"})

    def test_image_columns_type_as_text(self):
        result = typecheck(parse_expr("upper(image)"), {"image": "IMAGE"})
        assert result.base == "TEXT"

    def test_if_branches_must_unify(self):
        with pytest.raises(ExprTypeError):
            typecheck(parse_expr('if(true, 1, "x")'), {})

    def test_null_literal_unifies(self):
        result = typecheck(parse_expr("if(true, 1, null)"), {})
        assert result.base == "NUMBER" and result.nullable


# --- randomized properties ----------------------------------------------------

_SCHEMA = {"t": "TEXT", "u": "TEXT", "n": "NUMBER", "m": "NUMBER", "b": "BOOLEAN"}


def _random_expr(rng: random.Random, want: str, depth: int):
    """Random well-typed AST for the fixed schema."""
    if depth <= 0:
        return _leaf(rng, want)
    roll = rng.random()
    if want == "NUMBER":
        if roll < 0.25:
            return _leaf(rng, want)
        if roll < 0.5:
            op = rng.choice(["+", "-", "*", "/", "%"])
            return Binary(op, _random_expr(rng, "NUMBER", depth - 1), _random_expr(rng, "NUMBER", depth - 1))
        if roll < 0.6:
            inner = _random_expr(rng, "NUMBER", depth - 1)
            if isinstance(inner, Lit):
                return Lit(-inner.value)  # parser folds -NUMBER into the literal
            return Unary("-", inner)
        if roll < 0.7:
            return Call("parse_int", (_random_expr(rng, "TEXT", depth - 1),))
        if roll < 0.8:
            return Call(rng.choice(["abs", "floor", "round"]), (_random_expr(rng, "NUMBER", depth - 1),))
        if roll < 0.9:
            return Call("len", (_random_expr(rng, "TEXT", depth - 1),))
        return If(
            _random_expr(rng, "BOOLEAN", depth - 1),
            _random_expr(rng, "NUMBER", depth - 1),
            _random_expr(rng, "NUMBER", depth - 1),
        )
    if want == "TEXT":
        if roll < 0.3:
            return _leaf(rng, want)
        if roll < 0.5:
            return Call(
                "substr",
                (
                    _random_expr(rng, "TEXT", depth - 1),
                    _random_expr(rng, "NUMBER", depth - 1),
                    _random_expr(rng, "NUMBER", depth - 1),
                ),
            )
        if roll < 0.7:
            return Call(rng.choice(["lower", "upper", "trim"]), (_random_expr(rng, "TEXT", depth - 1),))
        if roll < 0.85:
            return Call("concat", tuple(_random_expr(rng, "TEXT", depth - 1) for _ in range(2)))
        return Call(
            "split",
            (
                _random_expr(rng, "TEXT", depth - 1),
                Lit(rng.choice(["-", " ", "a"])),
                _random_expr(rng, "NUMBER", depth - 1),
            ),
        )
    # BOOLEAN
    if roll < 0.2:
        return _leaf(rng, want)
    if roll < 0.5:
        op = rng.choice(["=", "!=", "<", "<=", ">", ">="])
        kind = rng.choice(["NUMBER", "TEXT"])
        return Binary(op, _random_expr(rng, kind, depth - 1), _random_expr(rng, kind, depth - 1))
    if roll < 0.8:
        op = rng.choice(["and", "or"])
        return Binary(op, _random_expr(rng, "BOOLEAN", depth - 1), _random_expr(rng, "BOOLEAN", depth - 1))
    return Unary("not", _random_expr(rng, "BOOLEAN", depth - 1))


def _leaf(rng: random.Random, want: str):
    columns = [name for name, t in _SCHEMA.items() if t == want]
    if rng.random() < 0.5 and columns:
        return Col(rng.choice(columns))
    if want == "NUMBER":
        return Lit(rng.choice([0, 1, -3, 7, 100, 2.5]))
    if want == "TEXT":
        return Lit(rng.choice(["", "abc", "Mona Lisa", "17", "a-b-c"]))
    return Lit(rng.choice([True, False]))


def _random_row(rng: random.Random) -> dict:
    def maybe_null(value):
        return None if rng.random() < 0.15 else value

    return {
        "t": maybe_null(rng.choice(["", "x", "1503", "longer text"])),
        "u": maybe_null(rng.choice(["a-b", "42", "zz"])),
        "n": maybe_null(rng.choice([0, 1, -5, 10, 3.5])),
        "m": maybe_null(rng.choice([0, 2, 7])),
        "b": maybe_null(rng.choice([True, False])),
    }


def test_totality_and_purity_fuzz():
    """Typechecked expressions never raise and evaluate identically twice."""
    rng = random.Random(20240817)
    for _ in range(400):
        want = rng.choice(["NUMBER", "TEXT", "BOOLEAN"])
        ast = _random_expr(rng, want, rng.randrange(1, 4))
        typecheck(ast, _SCHEMA)
        for _ in range(3):
            row = _random_row(rng)
            first = eval_expr(ast, row)
            second = eval_expr(ast, row)
            assert first == second or (first is None and second is None)


def test_parse_render_round_trip_fuzz():
    rng = random.Random(99173)
    for _ in range(400):
        want = rng.choice(["NUMBER", "TEXT", "BOOLEAN"])
        ast = _random_expr(rng, want, rng.randrange(0, 4))
        rendered = render_expr(ast)
        assert parse_expr(rendered) == ast, rendered
