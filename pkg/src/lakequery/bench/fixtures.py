"""Deterministic fixture builders: an artwork lake and a rotowire-style lake.

Everything derives from the seed, so two builds with the same seed produce
byte-identical trees. The artwork lake has a painting metadata table plus an
image collection with per-image QA annotations; the rotowire-style lake has
teams/players tables plus a text collection of templated game reports with
per-report QA annotations. The annotations are the ground truth the fixture
QA backend answers from, and the ground truth the bench oracle reads.
"""

from __future__ import annotations

import base64
import csv
import json
import random
from pathlib import Path

DEFAULT_SEED = 7

# 1x1 black-pixel PNG; the files are stubs, only their names matter to QA.
_PNG_STUB = base64.b64decode(
    "iVBORw0KGgoAAAANSUhEUgAAAAEAAAABCAYAAAAfFcSJAAAADUlEQVR42mNk"
    "+M9QDwADhgGAWjR9awAAAABJRU5ErkJggg=="
)

MOVEMENTS = ("Renaissance", "Baroque", "Impressionism", "Cubism")
GENRES = ("religious art", "portrait", "landscape", "still life")

_TITLE_HEADS = (
    "Madonna", "Saint Jerome", "The Harbor", "The Duchess", "Venus",
    "The Market", "A Knight", "The Garden", "The Bridge", "Judith",
    "The Mill", "An Allegory",
)
_TITLE_TAILS = (
    "at Dusk", "with Child", "in Blue", "of Seville", "in Armor",
    "by the Sea", "in Winter", "of the North", "at Rest", "in Spring",
    "with Doves", "of Time",
)

TEAM_NAMES = ("Comets", "Falcons", "Harbormen", "Monarchs", "Pioneers", "Voyagers")
_CONFERENCES = {"East": ("Atlantic", "Central"), "West": ("Pacific", "Summit")}
_CITIES = ("Arden", "Brookfield", "Carverton", "Dunmore", "Eastvale", "Fairport")
_FIRST_NAMES = ("Alex", "Ben", "Cole", "Dane", "Eli", "Finn", "Gray", "Hale", "Ivan", "Jude", "Kai", "Lee")
_LAST_NAMES = ("Adler", "Brant", "Cobb", "Doyle", "Eaton", "Frost", "Grove", "Hayes", "Ives", "Jarvis", "Keats", "Lowe")
_NATIONALITIES = ("USA", "Canada", "Spain", "France")

SWORD_QUESTION = "How many swords are depicted?"
PEOPLE_QUESTION = "How many people are depicted?"
MADONNA_QUESTION = "Does this painting depict Madonna and Child?"
CROWN_QUESTION = "Does this painting depict a crown?"


def image_show_question(description: str) -> str:
    # Must match the question image_select sends to the backend.
    return f"Does this image show: {description}?"


def points_question(team: str) -> str:
    return f"How many points did {team} score?"


def lose_question(team: str) -> str:
    return f"Did {team} lose?"


def win_question(team: str) -> str:
    return f"Did {team} win?"


def build_fixtures(dest: str | Path, seed: int = DEFAULT_SEED) -> Path:
    """Write the artwork and rotowire fixture trees under `dest`."""
    dest = Path(dest)
    _build_artwork(dest / "artwork", seed)
    _build_rotowire(dest / "rotowire", seed)
    return dest


# --- artwork -------------------------------------------------------------------

def _build_artwork(root: Path, seed: int) -> None:
    rng = random.Random(seed * 7919 + 1)
    root.mkdir(parents=True, exist_ok=True)
    images_dir = root / "painting_images"
    images_dir.mkdir(exist_ok=True)

    paintings = []
    for i in range(12):
        title = f"{_TITLE_HEADS[i]} {_TITLE_TAILS[i]}"
        year = rng.randrange(1450, 1950)
        paintings.append(
            {
                "title": title,
                "inception": str(year),
                "movement": MOVEMENTS[i % len(MOVEMENTS)],
                "genre": GENRES[rng.randrange(len(GENRES))],
                "img_path": f"img_{i:03d}.png",
            }
        )
    centuries = {(int(p["inception"]) - 1) // 100 + 1 for p in paintings}
    assert len(centuries) >= 2, "fixture must span at least two centuries"

    annotations: dict[str, dict[str, str]] = {}
    madonna_yes = 0
    crown_yes = 0
    for i, painting in enumerate(paintings):
        swords = rng.randrange(0, 5)
        people = rng.randrange(0, 8)
        madonna = "yes" if "Madonna" in painting["title"] or rng.random() < 0.2 else "no"
        crown = "yes" if rng.random() < 0.3 else "no"
        madonna_yes += madonna == "yes"
        crown_yes += crown == "yes"
        annotations[painting["img_path"]] = {
            SWORD_QUESTION: str(swords),
            PEOPLE_QUESTION: str(people),
            MADONNA_QUESTION: madonna,
            CROWN_QUESTION: crown,
            image_show_question("Madonna and Child"): madonna,
            image_show_question("a crown"): crown,
        }
        (images_dir / painting["img_path"]).write_bytes(_PNG_STUB)
    assert madonna_yes >= 1 and crown_yes >= 1, "fixture needs positive QA matches"

    _write_csv(
        root / "paintings.csv",
        ["title", "inception", "movement", "genre", "img_path"],
        [[p["title"], p["inception"], p["movement"], p["genre"], p["img_path"]] for p in paintings],
    )
    _write_json(images_dir / "annotations.json", annotations)
    _write_json(
        root / "catalog.json",
        [
            {
                "name": "paintings",
                "kind": "table",
                "path": "paintings.csv",
                "columns": [
                    {"name": "title", "type": "TEXT"},
                    {"name": "inception", "type": "TEXT"},
                    {"name": "movement", "type": "TEXT"},
                    {"name": "genre", "type": "TEXT"},
                    {"name": "img_path", "type": "TEXT"},
                ],
            },
            {
                "name": "painting_images",
                "kind": "image_collection",
                "path": "painting_images",
                "columns": ["img_path", "image"],
            },
        ],
    )


# --- rotowire ------------------------------------------------------------------

def _build_rotowire(root: Path, seed: int) -> None:
    root.mkdir(parents=True, exist_ok=True)
    reports_dir = root / "game_reports"
    reports_dir.mkdir(exist_ok=True)

    rng = random.Random(seed * 7919 + 2)
    teams = []
    for i, name in enumerate(TEAM_NAMES):
        conference = "East" if i < 3 else "West"
        divisions = _CONFERENCES[conference]
        teams.append(
            {
                "name": name,
                "conference": conference,
                "division": divisions[i % 2],
                "city": _CITIES[i],
            }
        )

    players = []
    for i in range(12):
        players.append(
            {
                "name": f"{_FIRST_NAMES[i]} {_LAST_NAMES[i]}",
                "team": TEAM_NAMES[i % len(TEAM_NAMES)],
                "height_cm": rng.randrange(178, 221),
                "nationality": _NATIONALITIES[rng.randrange(len(_NATIONALITIES))],
            }
        )

    games = _make_schedule(seed)

    annotations: dict[str, dict[str, str]] = {}
    for game in games:
        lines = [
            f"Game {game['game_id']} was played in {game['city']}.",
            f"The {game['home']} hosted the {game['away']} tonight.",
            f"The {game['home']} scored {game['points'][game['home']]} points while "
            f"the {game['away']} put up {game['points'][game['away']]}.",
            f"In the end the {game['winner']} won and the {game['loser']} lost the game.",
        ]
        (reports_dir / f"{game['game_id']}.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
        entry: dict[str, str] = {}
        for team in TEAM_NAMES:
            participant = team in game["points"]
            entry[points_question(team)] = str(game["points"][team]) if participant else "unknown"
            entry[lose_question(team)] = (
                ("yes" if game["loser"] == team else "no") if participant else "unknown"
            )
            entry[win_question(team)] = (
                ("yes" if game["winner"] == team else "no") if participant else "unknown"
            )
        annotations[f"{game['game_id']}.txt"] = entry

    _write_csv(
        root / "teams.csv",
        ["name", "conference", "division", "city"],
        [[t["name"], t["conference"], t["division"], t["city"]] for t in teams],
    )
    _write_csv(
        root / "players.csv",
        ["name", "team", "height_cm", "nationality"],
        [[p["name"], p["team"], str(p["height_cm"]), p["nationality"]] for p in players],
    )
    _write_json(reports_dir / "annotations.json", annotations)
    _write_json(
        root / "catalog.json",
        [
            {"name": "teams", "kind": "table", "path": "teams.csv"},
            {"name": "players", "kind": "table", "path": "players.csv"},
            {
                "name": "game_reports",
                "kind": "text_collection",
                "path": "game_reports",
                "columns": ["game_id", "report"],
            },
        ],
    )


def _make_schedule(seed: int) -> list[dict]:
    """10 games over 6 teams; every team plays and loses at least once."""
    pairs = [
        (a, b)
        for i, a in enumerate(TEAM_NAMES)
        for b in TEAM_NAMES[i + 1 :]
    ]
    for attempt in range(1000):
        rng = random.Random(seed * 7919 + 3 + attempt)
        chosen = rng.sample(pairs, 10)
        games = []
        losses = {team: 0 for team in TEAM_NAMES}
        played = {team: 0 for team in TEAM_NAMES}
        for i, (home, away) in enumerate(chosen):
            hp = rng.randrange(80, 131)
            ap = rng.randrange(80, 131)
            if hp == ap:
                hp += 1
            winner, loser = (home, away) if hp > ap else (away, home)
            losses[loser] += 1
            played[home] += 1
            played[away] += 1
            games.append(
                {
                    "game_id": f"game_{i:03d}",
                    "home": home,
                    "away": away,
                    "city": _CITIES[TEAM_NAMES.index(home)],
                    "points": {home: hp, away: ap},
                    "winner": winner,
                    "loser": loser,
                }
            )
        if all(n > 0 for n in played.values()) and all(n > 0 for n in losses.values()):
            return games
    raise AssertionError("could not build a schedule satisfying the fixture constraints")


# --- shared writers --------------------------------------------------------------

def _write_csv(path: Path, header: list[str], rows: list[list[str]]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _write_json(path: Path, payload) -> None:
    path.write_text(
        json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=True) + "\n",
        encoding="utf-8",
    )
