"""Independent gold-result computation for the query suite.

Reads the fixture CSVs and annotation files directly (plain csv/json, nested
loops, no engine code) and computes the expected result of every suite case.
Results are shaped exactly like QueryResult.to_json_dict() so they can be
compared or digested against engine output.
"""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

from .fixtures import (
    PEOPLE_QUESTION,
    TEAM_NAMES,
    lose_question,
    points_question,
    win_question,
)


def _read_csv(path: Path) -> list[dict[str, str]]:
    with open(path, newline="", encoding="utf-8") as handle:
        return list(csv.DictReader(handle))


def _read_json(path: Path):
    return json.loads(path.read_text(encoding="utf-8"))


class FixtureData:
    """Raw fixture content, loaded without any engine involvement."""

    def __init__(self, root: str | Path):
        root = Path(root)
        self.paintings = _read_csv(root / "artwork" / "paintings.csv")
        self.image_annotations = _read_json(root / "artwork" / "painting_images" / "annotations.json")
        self.teams = _read_csv(root / "rotowire" / "teams.csv")
        self.players = _read_csv(root / "rotowire" / "players.csv")
        self.report_annotations = _read_json(root / "rotowire" / "game_reports" / "annotations.json")
        self.report_names = sorted(self.report_annotations)

    # artwork helpers ---------------------------------------------------------

    def image_answer(self, img: str, question: str) -> str:
        return self.image_annotations.get(img, {}).get(question, "unknown")

    def century(self, painting: dict[str, str]) -> int:
        year = int(painting["inception"][:4])
        return (year - 1) // 100 + 1

    # rotowire helpers --------------------------------------------------------

    def report_answer(self, report: str, question: str) -> str:
        return self.report_annotations.get(report, {}).get(question, "unknown")

    def team_points(self, team: str) -> list[int]:
        values = []
        for report in self.report_names:
            answer = self.report_answer(report, points_question(team))
            try:
                values.append(int(answer))
            except ValueError:
                pass
        return values

    def team_yes_count(self, team: str, question_fn) -> int:
        return sum(
            1
            for report in self.report_names
            if self.report_answer(report, question_fn(team)) == "yes"
        )


def _value(v) -> dict:
    return {"kind": "value", "value": v}


def _table(schema: list[list[str]], rows: list[list]) -> dict:
    return {"kind": "table", "table": {"schema": schema, "rows": rows}}


def _plot(kind: str, x: str, y: str, title: str, data: list[list]) -> dict:
    data = sorted(data, key=lambda p: ((0, 0) if p[0] is None else (1, p[0])))
    return {
        "kind": "plot",
        "plot": {"kind": kind, "x": x, "y": y, "title": title, "data": [list(p) for p in data]},
    }


def _group_sorted(keys) -> list:
    return sorted(keys)


def compute_gold(case: dict, fixtures_root: str | Path, data: FixtureData | None = None) -> dict:
    """Expected result for one suite case, from fixtures alone."""
    data = data or FixtureData(fixtures_root)
    pattern = case["oracle"]["pattern"]
    params = case["oracle"].get("params", {})
    fn = _PATTERNS.get(pattern)
    if fn is None:
        raise KeyError(f"unknown oracle pattern {pattern!r}")
    return fn(data, params)


def result_digest(result: dict) -> str:
    canonical = json.dumps(result, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


# --- artwork patterns --------------------------------------------------------

def _art_count_all(data: FixtureData, params: dict) -> dict:
    return _value(len(data.paintings))


def _art_count_where(data: FixtureData, params: dict) -> dict:
    column, value = params["column"], params["value"]
    return _value(sum(1 for p in data.paintings if p[column] == value))


def _art_min_year(data: FixtureData, params: dict) -> dict:
    return _value(min(int(p["inception"]) for p in data.paintings))


def _art_titles_where(data: FixtureData, params: dict) -> dict:
    column, value = params["column"], params["value"]
    rows = [[p["title"]] for p in data.paintings if p[column] == value]
    return _table([["title", "TEXT"]], rows)


def _art_title_year_after(data: FixtureData, params: dict) -> dict:
    threshold = params["threshold"]
    rows = [
        [p["title"], p["inception"]]
        for p in data.paintings
        if int(p["inception"]) > threshold
    ]
    return _table([["title", "TEXT"], ["inception", "TEXT"]], rows)


def _art_group_count(data: FixtureData, params: dict) -> dict:
    column = params["column"]
    counts: dict[str, int] = {}
    for p in data.paintings:
        counts[p[column]] = counts.get(p[column], 0) + 1
    rows = [[key, counts[key]] for key in _group_sorted(counts)]
    return _table([[column, "TEXT"], ["n", "NUMBER"]], rows)


def _art_titles_ordered(data: FixtureData, params: dict) -> dict:
    column, value = params["column"], params["value"]
    rows = sorted(
        [[p["title"], p["genre"]] for p in data.paintings if p[column] == value],
        key=lambda r: r[0],
    )
    return _table([["title", "TEXT"], ["genre", "TEXT"]], rows)


def _art_plot_group_count(data: FixtureData, params: dict) -> dict:
    column, title = params["column"], params["title"]
    counts: dict[str, int] = {}
    for p in data.paintings:
        counts[p[column]] = counts.get(p[column], 0) + 1
    return _plot("bar", column, "n", title, [[k, counts[k]] for k in counts])


def _art_plot_min_year(data: FixtureData, params: dict) -> dict:
    title = params["title"]
    earliest: dict[str, int] = {}
    for p in data.paintings:
        year = int(p["inception"])
        movement = p["movement"]
        if movement not in earliest or year < earliest[movement]:
            earliest[movement] = year
    return _plot("bar", "movement", "earliest", title, [[m, y] for m, y in earliest.items()])


def _art_plot_count_per_year(data: FixtureData, params: dict) -> dict:
    counts: dict[str, int] = {}
    for p in data.paintings:
        counts[p["inception"]] = counts.get(p["inception"], 0) + 1
    return _plot("bar", "inception", "n", params["title"], [[k, counts[k]] for k in counts])


def _art_count_answer_yes(data: FixtureData, params: dict) -> dict:
    question = params["question"]
    count = sum(
        1 for p in data.paintings if data.image_answer(p["img_path"], question) == "yes"
    )
    return _value(count)


def _art_max_numeric_answer(data: FixtureData, params: dict) -> dict:
    question = params["question"]
    values = []
    for p in data.paintings:
        answer = data.image_answer(p["img_path"], question)
        try:
            values.append(int(answer))
        except ValueError:
            pass
    return _value(max(values))


def _art_people_on_title(data: FixtureData, params: dict) -> dict:
    title = params["painting_title"]
    for p in data.paintings:
        if p["title"] == title:
            return _value(data.image_answer(p["img_path"], PEOPLE_QUESTION))
    raise AssertionError(f"painting {title!r} not in fixtures")


def _art_group_count_yes(data: FixtureData, params: dict) -> dict:
    column, question = params["column"], params["question"]
    counts: dict[str, int] = {}
    for p in data.paintings:
        if data.image_answer(p["img_path"], question) == "yes":
            counts[p[column]] = counts.get(p[column], 0) + 1
    rows = [[key, counts[key]] for key in _group_sorted(counts)]
    return _table([[column, "TEXT"], ["n", "NUMBER"]], rows)


def _art_titles_answer_yes(data: FixtureData, params: dict) -> dict:
    question = params["question"]
    rows = [
        [p["title"]]
        for p in data.paintings
        if data.image_answer(p["img_path"], question) == "yes"
    ]
    return _table([["title", "TEXT"]], rows)


def _art_group_max_answer(data: FixtureData, params: dict) -> dict:
    column, question, out = params["column"], params["question"], params["out"]
    best: dict[str, int] = {}
    for p in data.paintings:
        answer = data.image_answer(p["img_path"], question)
        try:
            value = int(answer)
        except ValueError:
            continue
        key = p[column]
        if key not in best or value > best[key]:
            best[key] = value
    rows = [[key, best[key]] for key in _group_sorted(best)]
    return _table([[column, "TEXT"], [out, "NUMBER"]], rows)


def _art_title_answer_where(data: FixtureData, params: dict) -> dict:
    column, value, question, out = (
        params["column"],
        params["value"],
        params["question"],
        params["out"],
    )
    rows = [
        [p["title"], data.image_answer(p["img_path"], question)]
        for p in data.paintings
        if p[column] == value
    ]
    return _table([["title", "TEXT"], [out, "TEXT"]], rows)


def _art_plot_century_max(data: FixtureData, params: dict) -> dict:
    question, out, title = params["question"], params["out"], params["title"]
    best: dict[int, int] = {}
    for p in data.paintings:
        answer = data.image_answer(p["img_path"], question)
        try:
            value = int(answer)
        except ValueError:
            continue
        century = data.century(p)
        if century not in best or value > best[century]:
            best[century] = value
    return _plot("bar", "century", out, title, [[c, v] for c, v in best.items()])


def _art_plot_group_count_yes(data: FixtureData, params: dict) -> dict:
    column, question, title = params["column"], params["question"], params["title"]
    counts: dict[str, int] = {}
    for p in data.paintings:
        if data.image_answer(p["img_path"], question) == "yes":
            counts[p[column]] = counts.get(p[column], 0) + 1
    return _plot("bar", column, "n", title, [[k, v] for k, v in counts.items()])


def _art_plot_group_max_answer(data: FixtureData, params: dict) -> dict:
    column, question, out, title = (
        params["column"],
        params["question"],
        params["out"],
        params["title"],
    )
    best: dict[str, int] = {}
    for p in data.paintings:
        answer = data.image_answer(p["img_path"], question)
        try:
            value = int(answer)
        except ValueError:
            continue
        key = p[column]
        if key not in best or value > best[key]:
            best[key] = value
    return _plot("bar", column, out, title, [[k, v] for k, v in best.items()])


def _art_plot_century_count_yes(data: FixtureData, params: dict) -> dict:
    question, title = params["question"], params["title"]
    counts: dict[int, int] = {}
    for p in data.paintings:
        if data.image_answer(p["img_path"], question) == "yes":
            century = data.century(p)
            counts[century] = counts.get(century, 0) + 1
    return _plot("bar", "century", "n", title, [[c, v] for c, v in counts.items()])


# --- rotowire patterns -------------------------------------------------------

def _roto_count_teams_where(data: FixtureData, params: dict) -> dict:
    column, value = params["column"], params["value"]
    return _value(sum(1 for t in data.teams if t[column] == value))


def _roto_count_players_taller(data: FixtureData, params: dict) -> dict:
    threshold = params["threshold"]
    return _value(sum(1 for p in data.players if int(p["height_cm"]) > threshold))


def _roto_avg_height(data: FixtureData, params: dict) -> dict:
    heights = [int(p["height_cm"]) for p in data.players]
    return _value(sum(heights) / len(heights))


def _roto_count_players_where(data: FixtureData, params: dict) -> dict:
    column, value = params["column"], params["value"]
    return _value(sum(1 for p in data.players if p[column] == value))


def _roto_team_names_where(data: FixtureData, params: dict) -> dict:
    column, value = params["column"], params["value"]
    rows = [[t["name"]] for t in data.teams if t[column] == value]
    return _table([["name", "TEXT"]], rows)


def _roto_players_per_team(data: FixtureData, params: dict) -> dict:
    counts: dict[str, int] = {}
    for p in data.players:
        counts[p["team"]] = counts.get(p["team"], 0) + 1
    rows = [[key, counts[key]] for key in _group_sorted(counts)]
    return _table([["team", "TEXT"], ["n", "NUMBER"]], rows)


def _roto_players_where(data: FixtureData, params: dict) -> dict:
    column, value = params["column"], params["value"]
    rows = [[p["name"], p["nationality"]] for p in data.players if p[column] == value]
    return _table([["name", "TEXT"], ["nationality", "TEXT"]], rows)


def _roto_teams_per_conference(data: FixtureData, params: dict) -> dict:
    counts: dict[str, int] = {}
    for t in data.teams:
        counts[t["conference"]] = counts.get(t["conference"], 0) + 1
    rows = [[key, counts[key]] for key in _group_sorted(counts)]
    return _table([["conference", "TEXT"], ["n", "NUMBER"]], rows)


def _roto_plot_players_per_team(data: FixtureData, params: dict) -> dict:
    counts: dict[str, int] = {}
    for p in data.players:
        counts[p["team"]] = counts.get(p["team"], 0) + 1
    return _plot("bar", "team", "n", params["title"], [[k, v] for k, v in counts.items()])


def _roto_plot_avg_height(data: FixtureData, params: dict) -> dict:
    sums: dict[str, list[int]] = {}
    for p in data.players:
        sums.setdefault(p["team"], []).append(int(p["height_cm"]))
    data_points = [[team, sum(v) / len(v)] for team, v in sums.items()]
    return _plot("bar", "team", "avg_height", params["title"], data_points)


def _roto_plot_teams_per_division(data: FixtureData, params: dict) -> dict:
    counts: dict[str, int] = {}
    for t in data.teams:
        counts[t["division"]] = counts.get(t["division"], 0) + 1
    return _plot("bar", "division", "n", params["title"], [[k, v] for k, v in counts.items()])


def _roto_plot_max_height_nationality(data: FixtureData, params: dict) -> dict:
    best: dict[str, int] = {}
    for p in data.players:
        height = int(p["height_cm"])
        key = p["nationality"]
        if key not in best or height > best[key]:
            best[key] = height
    return _plot("bar", "nationality", "max_height", params["title"], [[k, v] for k, v in best.items()])


def _roto_team_max_points(data: FixtureData, params: dict) -> dict:
    return _value(max(data.team_points(params["team"])))


def _roto_team_yes_count(data: FixtureData, params: dict) -> dict:
    question_fn = lose_question if params["question"] == "lose" else win_question
    return _value(data.team_yes_count(params["team"], question_fn))


def _roto_overall_max_points(data: FixtureData, params: dict) -> dict:
    values = []
    for team in TEAM_NAMES:
        values.extend(data.team_points(team))
    return _value(max(values))


def _roto_max_points_per_team(data: FixtureData, params: dict) -> dict:
    out = params["out"]
    rows = []
    for team in _group_sorted(TEAM_NAMES):
        points = data.team_points(team)
        rows.append([team, max(points) if points else None])
    return _table([["name", "TEXT"], [out, "NUMBER"]], rows)


def _roto_yes_count_per_team(data: FixtureData, params: dict) -> dict:
    question_fn = lose_question if params["question"] == "lose" else win_question
    out = params["out"]
    rows = []
    for team in _group_sorted(TEAM_NAMES):
        count = data.team_yes_count(team, question_fn)
        if count > 0:
            rows.append([team, count])
    return _table([["name", "TEXT"], [out, "NUMBER"]], rows)


def _roto_max_points_conference_teams(data: FixtureData, params: dict) -> dict:
    conference, out = params["conference"], params["out"]
    rows = []
    names = _group_sorted(t["name"] for t in data.teams if t["conference"] == conference)
    for team in names:
        points = data.team_points(team)
        rows.append([team, max(points) if points else None])
    return _table([["name", "TEXT"], [out, "NUMBER"]], rows)


def _roto_plot_max_points_per_team(data: FixtureData, params: dict) -> dict:
    out, title = params["out"], params["title"]
    points = [[team, max(data.team_points(team))] for team in TEAM_NAMES]
    return _plot("bar", "name", out, title, points)


def _roto_plot_yes_count_per_team(data: FixtureData, params: dict) -> dict:
    question_fn = lose_question if params["question"] == "lose" else win_question
    out, title = params["out"], params["title"]
    data_points = []
    for team in TEAM_NAMES:
        count = data.team_yes_count(team, question_fn)
        if count > 0:
            data_points.append([team, count])
    return _plot("bar", "name", out, title, data_points)


def _roto_plot_max_points_per_conference(data: FixtureData, params: dict) -> dict:
    out, title = params["out"], params["title"]
    best: dict[str, int] = {}
    for t in data.teams:
        points = data.team_points(t["name"])
        if not points:
            continue
        conference = t["conference"]
        top = max(points)
        if conference not in best or top > best[conference]:
            best[conference] = top
    return _plot("bar", "conference", out, title, [[k, v] for k, v in best.items()])


_PATTERNS = {
    "art_count_all": _art_count_all,
    "art_count_where": _art_count_where,
    "art_min_year": _art_min_year,
    "art_titles_where": _art_titles_where,
    "art_title_year_after": _art_title_year_after,
    "art_group_count": _art_group_count,
    "art_titles_ordered": _art_titles_ordered,
    "art_plot_group_count": _art_plot_group_count,
    "art_plot_min_year": _art_plot_min_year,
    "art_plot_count_per_year": _art_plot_count_per_year,
    "art_count_answer_yes": _art_count_answer_yes,
    "art_max_numeric_answer": _art_max_numeric_answer,
    "art_people_on_title": _art_people_on_title,
    "art_group_count_yes": _art_group_count_yes,
    "art_titles_answer_yes": _art_titles_answer_yes,
    "art_group_max_answer": _art_group_max_answer,
    "art_title_answer_where": _art_title_answer_where,
    "art_plot_century_max": _art_plot_century_max,
    "art_plot_group_count_yes": _art_plot_group_count_yes,
    "art_plot_group_max_answer": _art_plot_group_max_answer,
    "art_plot_century_count_yes": _art_plot_century_count_yes,
    "roto_count_teams_where": _roto_count_teams_where,
    "roto_count_players_taller": _roto_count_players_taller,
    "roto_avg_height": _roto_avg_height,
    "roto_count_players_where": _roto_count_players_where,
    "roto_team_names_where": _roto_team_names_where,
    "roto_players_per_team": _roto_players_per_team,
    "roto_players_where": _roto_players_where,
    "roto_teams_per_conference": _roto_teams_per_conference,
    "roto_plot_players_per_team": _roto_plot_players_per_team,
    "roto_plot_avg_height": _roto_plot_avg_height,
    "roto_plot_teams_per_division": _roto_plot_teams_per_division,
    "roto_plot_max_height_nationality": _roto_plot_max_height_nationality,
    "roto_team_max_points": _roto_team_max_points,
    "roto_team_yes_count": _roto_team_yes_count,
    "roto_overall_max_points": _roto_overall_max_points,
    "roto_max_points_per_team": _roto_max_points_per_team,
    "roto_yes_count_per_team": _roto_yes_count_per_team,
    "roto_max_points_conference_teams": _roto_max_points_conference_teams,
    "roto_plot_max_points_per_team": _roto_plot_max_points_per_team,
    "roto_plot_yes_count_per_team": _roto_plot_yes_count_per_team,
    "roto_plot_max_points_per_conference": _roto_plot_max_points_per_conference,
}
