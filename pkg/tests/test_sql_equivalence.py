"""Randomized engine-vs-oracle equivalence.

A seeded generator produces a structured query description plus random input
relations. The description is rendered to SQL for the engine and interpreted
directly (nested loops, no engine code) by the oracle below. Results must
agree as multisets on every case.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field

from lakequery.relation import Relation
from lakequery.sqlengine import execute_sql

N_CASES = 1200
SEED = 421


# --- query description ------------------------------------------------------------

@dataclass
class Table:
    name: str
    columns: list[tuple[str, str]]  # (name, NUMBER|TEXT)
    rows: list[tuple]


@dataclass
class Query:
    tables: list[Table]
    join_on: tuple[str, str] | None  # column names, or None for cross/single
    select: list[tuple]  # ("col", name) | ("arith", op, name, literal) | ("agg", fn, name|None)
    aliases: list[str]
    where: object | None
    group_by: list[str] = field(default_factory=list)
    order_by: list[tuple[str, bool]] = field(default_factory=list)  # (alias, desc)
    limit: int | None = None


# --- generator ---------------------------------------------------------------------

_TEXT_POOL = ["alpha", "beta", "Gamma", "del ta", "x0", "", "42", "zz top"]
_NUM_POOL = [0, 1, -3, 7, 42, 100, 2.5, -1.5]
_LIKE_PATTERNS = ["%a%", "x%", "%0", "_a%", "%z%", "alpha"]


def _make_table(rng: random.Random, name: str, prefix: str) -> Table:
    n_cols = rng.randrange(1, 7)  # up to six columns
    columns = []
    for i in range(n_cols):
        kind = rng.choice(["NUMBER", "TEXT"])
        columns.append((f"{prefix}{i}", kind))
    n_rows = rng.randrange(0, 31)  # up to thirty rows
    rows = []
    for _ in range(n_rows):
        row = []
        for _, kind in columns:
            if rng.random() < 0.12:
                row.append(None)
            elif kind == "NUMBER":
                row.append(rng.choice(_NUM_POOL))
            else:
                row.append(rng.choice(_TEXT_POOL))
        rows.append(tuple(row))
    return Table(name, columns, rows)


def _columns_of(query: Query) -> list[tuple[str, str]]:
    out = []
    for table in query.tables:
        out.extend(table.columns)
    return out


def _random_condition(rng: random.Random, columns: list[tuple[str, str]], depth: int):
    if depth > 0 and rng.random() < 0.4:
        op = rng.choice(["and", "or", "not"])
        if op == "not":
            return ("not", _random_condition(rng, columns, depth - 1))
        return (
            op,
            _random_condition(rng, columns, depth - 1),
            _random_condition(rng, columns, depth - 1),
        )
    name, kind = rng.choice(columns)
    roll = rng.random()
    if roll < 0.15:
        return ("isnull", name, rng.random() < 0.5)
    if kind == "TEXT":
        if roll < 0.45:
            return ("like", name, rng.choice(_LIKE_PATTERNS), rng.random() < 0.3)
        if roll < 0.7:
            options = rng.sample(_TEXT_POOL, rng.randrange(1, 4))
            if rng.random() < 0.2:
                options.append(None)
            return ("in", name, options, rng.random() < 0.3)
        return ("cmp", rng.choice(["=", "!=", "<", "<=", ">", ">="]), name, rng.choice(_TEXT_POOL))
    if roll < 0.6:
        return ("cmp", rng.choice(["=", "!=", "<", "<=", ">", ">="]), name, rng.choice(_NUM_POOL))
    options = rng.sample(_NUM_POOL, rng.randrange(1, 4))
    if rng.random() < 0.2:
        options.append(None)
    return ("in", name, options, rng.random() < 0.3)


def _make_query(rng: random.Random, case_no: int) -> Query:
    tables = [_make_table(rng, "ta", "a")]
    join_on = None
    if rng.random() < 0.45:
        tables.append(_make_table(rng, "tb", "b"))
        # Prefer a typed equi-join when both sides have a same-kind column.
        pairs = [
            (ac, bc)
            for ac, ak in tables[0].columns
            for bc, bk in tables[1].columns
            if ak == bk
        ]
        if pairs and rng.random() < 0.7:
            join_on = rng.choice(pairs)
    columns = []
    for table in tables:
        columns.extend(table.columns)

    grouped = rng.random() < 0.35
    select: list[tuple] = []
    group_by: list[str] = []
    if grouped:
        n_keys = rng.randrange(1, min(3, len(columns)) + 1)
        group_by = [name for name, _ in rng.sample(columns, n_keys)]
        for key in group_by[: rng.randrange(1, len(group_by) + 1)]:
            select.append(("col", key))
        for _ in range(rng.randrange(1, 3)):
            select.append(_random_aggregate(rng, columns))
    elif rng.random() < 0.25:
        for _ in range(rng.randrange(1, 3)):
            select.append(_random_aggregate(rng, columns))
    else:
        for _ in range(rng.randrange(1, 4)):
            name, kind = rng.choice(columns)
            if kind == "NUMBER" and rng.random() < 0.35:
                select.append(("arith", rng.choice(["+", "-", "*", "/", "%"]), name, rng.choice(_NUM_POOL)))
            else:
                select.append(("col", name))
    aliases = [f"c{i}" for i in range(len(select))]

    where = _random_condition(rng, columns, 2) if rng.random() < 0.7 else None
    order_by = []
    if rng.random() < 0.4:
        for alias in rng.sample(aliases, rng.randrange(1, len(aliases) + 1)):
            order_by.append((alias, rng.random() < 0.5))
    limit = rng.randrange(0, 8) if rng.random() < 0.3 else None
    return Query(tables, join_on, select, aliases, where, group_by, order_by, limit)


def _random_aggregate(rng: random.Random, columns: list[tuple[str, str]]) -> tuple:
    if rng.random() < 0.2:
        return ("agg", "count", None)
    name, kind = rng.choice(columns)
    if kind == "TEXT":
        return ("agg", rng.choice(["min", "max", "count"]), name)
    return ("agg", rng.choice(["min", "max", "sum", "avg", "count"]), name)


# --- SQL rendering -----------------------------------------------------------------

def _render_literal(value) -> str:
    if value is None:
        return "NULL"
    if isinstance(value, str):
        return "'" + value.replace("'", "''") + "'"
    return repr(value)


def _render_expr(item: tuple) -> str:
    kind = item[0]
    if kind == "col":
        return item[1]
    if kind == "arith":
        _, op, name, literal = item
        return f"({name} {op} {_render_literal(literal)})"
    _, fn, arg = item
    return f"{fn.upper()}({'*' if arg is None else arg})"


def _render_condition(cond) -> str:
    kind = cond[0]
    if kind == "and" or kind == "or":
        return f"({_render_condition(cond[1])} {kind.upper()} {_render_condition(cond[2])})"
    if kind == "not":
        return f"(NOT {_render_condition(cond[1])})"
    if kind == "cmp":
        _, op, name, literal = cond
        return f"{name} {op} {_render_literal(literal)}"
    if kind == "like":
        _, name, pattern, negated = cond
        return f"{name} {'NOT ' if negated else ''}LIKE {_render_literal(pattern)}"
    if kind == "in":
        _, name, options, negated = cond
        rendered = ", ".join(_render_literal(o) for o in options)
        return f"{name} {'NOT ' if negated else ''}IN ({rendered})"
    _, name, negated = cond
    return f"{name} IS {'NOT ' if negated else ''}NULL"


def render_sql(query: Query) -> str:
    select = ", ".join(
        f"{_render_expr(item)} AS {alias}" for item, alias in zip(query.select, query.aliases)
    )
    if query.join_on is not None:
        left, right = query.join_on
        from_clause = f"{query.tables[0].name} JOIN {query.tables[1].name} ON {left} = {right}"
    else:
        from_clause = ", ".join(t.name for t in query.tables)
    sql = f"SELECT {select} FROM {from_clause}"
    if query.where is not None:
        sql += f" WHERE {_render_condition(query.where)}"
    if query.group_by:
        sql += " GROUP BY " + ", ".join(query.group_by)
    if query.order_by:
        sql += " ORDER BY " + ", ".join(
            f"{alias} {'DESC' if desc else 'ASC'}" for alias, desc in query.order_by
        )
    if query.limit is not None:
        sql += f" LIMIT {query.limit}"
    return sql


# --- nested-loop oracle ---------------------------------------------------------------

def _oracle_rows(query: Query) -> tuple[list[tuple], dict[str, int]]:
    index = {}
    offset = 0
    for table in query.tables:
        for name, _ in table.columns:
            index[name] = offset
            offset += 1
    if len(query.tables) == 1:
        rows = list(query.tables[0].rows)
    else:
        rows = []
        for left in query.tables[0].rows:
            for right in query.tables[1].rows:
                rows.append(left + right)
        if query.join_on is not None:
            li, ri = index[query.join_on[0]], index[query.join_on[1]]
            rows = [
                r
                for r in rows
                if r[li] is not None and r[ri] is not None and r[li] == r[ri]
            ]
    return rows, index


def _oracle_cmp(op: str, left, right):
    if left is None or right is None:
        return None
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


def _oracle_like(value, pattern: str):
    if value is None:
        return None
    import re as _re

    regex = _re.escape(pattern).replace("%", ".*").replace("_", ".")
    return _re.fullmatch(regex, value, _re.IGNORECASE | _re.DOTALL) is not None


def _oracle_cond(cond, row: tuple, index: dict[str, int]):
    kind = cond[0]
    if kind == "and":
        left = _oracle_cond(cond[1], row, index)
        right = _oracle_cond(cond[2], row, index)
        if left is False or right is False:
            return False
        if left is None or right is None:
            return None
        return True
    if kind == "or":
        left = _oracle_cond(cond[1], row, index)
        right = _oracle_cond(cond[2], row, index)
        if left is True or right is True:
            return True
        if left is None or right is None:
            return None
        return False
    if kind == "not":
        inner = _oracle_cond(cond[1], row, index)
        return None if inner is None else not inner
    if kind == "cmp":
        _, op, name, literal = cond
        return _oracle_cmp(op, row[index[name]], literal)
    if kind == "like":
        _, name, pattern, negated = cond
        matched = _oracle_like(row[index[name]], pattern)
        if matched is None:
            return None
        return not matched if negated else matched
    if kind == "in":
        _, name, options, negated = cond
        value = row[index[name]]
        if value is None:
            return None
        hit = any(o is not None and o == value for o in options)
        if hit:
            result = True
        elif any(o is None for o in options):
            result = None
        else:
            result = False
        if result is None:
            return None
        return not result if negated else result
    _, name, negated = cond
    is_null = row[index[name]] is None
    return not is_null if negated else is_null


def _oracle_item(item: tuple, row: tuple, index: dict[str, int], group: list[tuple]):
    kind = item[0]
    if kind == "col":
        return row[index[item[1]]]
    if kind == "arith":
        _, op, name, literal = item
        value = row[index[name]]
        if value is None or literal is None:
            return None
        if op == "+":
            return value + literal
        if op == "-":
            return value - literal
        if op == "*":
            return value * literal
        if op == "/":
            return None if literal == 0 else value / literal
        return None if literal == 0 else value % literal
    _, fn, arg = item
    if fn == "count":
        if arg is None:
            return len(group)
        return sum(1 for r in group if r[index[arg]] is not None)
    values = [r[index[arg]] for r in group if r[index[arg]] is not None]
    if not values:
        return None
    if fn == "min":
        return min(values)
    if fn == "max":
        return max(values)
    if fn == "sum":
        return sum(values)
    return sum(values) / len(values)


def _sort_key(value):
    return (0, 0) if value is None else (1, value)


def oracle_execute(query: Query) -> list[tuple]:
    rows, index = _oracle_rows(query)
    if query.where is not None:
        rows = [r for r in rows if _oracle_cond(query.where, r, index) is True]
    if query.group_by:
        groups: dict[tuple, list[tuple]] = {}
        for row in rows:
            key = tuple(row[index[g]] for g in query.group_by)
            groups.setdefault(key, []).append(row)
        ordered = sorted(groups, key=lambda k: tuple(_sort_key(v) for v in k))
        out = [
            tuple(_oracle_item(item, groups[key][0], index, groups[key]) for item in query.select)
            for key in ordered
        ]
    elif any(item[0] == "agg" for item in query.select):
        out = [tuple(_oracle_item(item, (), index, rows) for item in query.select)]
    else:
        out = [tuple(_oracle_item(item, row, index, []) for item in query.select) for row in rows]
    if query.order_by:
        positions = {alias: i for i, alias in enumerate(query.aliases)}
        indexed = list(range(len(out)))
        for alias, desc in reversed(query.order_by):
            pos = positions[alias]
            indexed.sort(key=lambda i: _sort_key(out[i][pos]), reverse=desc)
        out = [out[i] for i in indexed]
    if query.limit is not None:
        out = out[: query.limit]
    return out


# --- the equivalence run ----------------------------------------------------------------

def test_engine_matches_nested_loop_oracle():
    rng = random.Random(SEED)
    mismatches = 0
    for case_no in range(N_CASES):
        query = _make_query(rng, case_no)
        env = {
            t.name: Relation.build(t.columns, t.rows) for t in query.tables
        }
        sql = render_sql(query)
        engine_rows = [tuple(r) for r in execute_sql(sql, env).rows]
        oracle_rows = oracle_execute(query)
        if Counter(engine_rows) != Counter(oracle_rows):
            mismatches += 1
            print(f"case {case_no}: {sql}")
            print(f"  engine: {sorted(Counter(engine_rows).items(), key=repr)[:6]}")
            print(f"  oracle: {sorted(Counter(oracle_rows).items(), key=repr)[:6]}")
            if mismatches > 4:
                break
    assert mismatches == 0, f"{mismatches} mismatching cases"
