"""Declarative plot output: a JSON-serializable spec plus a deterministic SVG.

The SVG is intentionally simple (fixed 640x400 canvas, linear scales, no
fonts beyond the SVG defaults) so two runs over the same data are
byte-identical.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

CANVAS_W = 640
CANVAS_H = 400
MARGIN_LEFT = 60
MARGIN_RIGHT = 20
MARGIN_TOP = 40
MARGIN_BOTTOM = 50

PLOT_KINDS = ("bar", "line", "scatter")


class PlotError(Exception):
    pass


@dataclass(frozen=True)
class PlotSpec:
    kind: str
    x: str
    y: str
    title: str
    data: tuple[tuple[object, object], ...]  # (x, y) pairs, sorted by x

    def __post_init__(self) -> None:
        if self.kind not in PLOT_KINDS:
            raise PlotError(f"unknown plot kind {self.kind!r}")

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "x": self.x,
            "y": self.y,
            "title": self.title,
            "data": [[x, y] for x, y in self.data],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, separators=(",", ":"))


def _fmt(value: float) -> str:
    return f"{value:.2f}".rstrip("0").rstrip(".")


def _fmt_tick(value: object) -> str:
    if isinstance(value, float) and value.is_integer():
        return str(int(value))
    return str(value)


def render_svg(spec: PlotSpec) -> str:
    """Render the spec to a standalone SVG document string."""
    plot_w = CANVAS_W - MARGIN_LEFT - MARGIN_RIGHT
    plot_h = CANVAS_H - MARGIN_TOP - MARGIN_BOTTOM
    x0, y0 = MARGIN_LEFT, MARGIN_TOP + plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{CANVAS_W}" height="{CANVAS_H}" '
        f'viewBox="0 0 {CANVAS_W} {CANVAS_H}">',
        f'<rect x="0" y="0" width="{CANVAS_W}" height="{CANVAS_H}" fill="white"/>',
        f'<text x="{CANVAS_W // 2}" y="24" text-anchor="middle" font-size="16">{_esc(spec.title)}</text>',
        f'<line x1="{x0}" y1="{y0}" x2="{x0 + plot_w}" y2="{y0}" stroke="black"/>',
        f'<line x1="{x0}" y1="{MARGIN_TOP}" x2="{x0}" y2="{y0}" stroke="black"/>',
        f'<text x="{x0 + plot_w // 2}" y="{CANVAS_H - 10}" text-anchor="middle" font-size="12">{_esc(spec.x)}</text>',
        f'<text x="16" y="{MARGIN_TOP + plot_h // 2}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 16 {MARGIN_TOP + plot_h // 2})">{_esc(spec.y)}</text>',
    ]

    points = [(x, y) for x, y in spec.data if y is not None and x is not None]
    if points:
        ys = [float(y) for _, y in points]
        y_max = max(max(ys), 0.0)
        y_min = min(min(ys), 0.0)
        span = (y_max - y_min) or 1.0

        def y_px(value: float) -> float:
            return y0 - (value - y_min) / span * plot_h

        numeric_x = all(isinstance(x, (int, float)) and not isinstance(x, bool) for x, _ in points)
        n = len(points)
        slot = plot_w / n

        parts.append(
            f'<text x="{x0 - 6}" y="{MARGIN_TOP + 4}" text-anchor="end" font-size="10">{_fmt(y_max)}</text>'
        )
        parts.append(
            f'<text x="{x0 - 6}" y="{y0 + 4}" text-anchor="end" font-size="10">{_fmt(y_min)}</text>'
        )

        if spec.kind == "bar":
            bar_w = max(slot * 0.6, 1.0)
            for i, (x, y) in enumerate(points):
                left = x0 + slot * i + (slot - bar_w) / 2
                top = y_px(float(y))
                height = abs(y_px(0.0) - top)
                top = min(top, y_px(0.0))
                parts.append(
                    f'<rect x="{_fmt(left)}" y="{_fmt(top)}" width="{_fmt(bar_w)}" '
                    f'height="{_fmt(height)}" fill="steelblue"/>'
                )
                parts.append(
                    f'<text x="{_fmt(left + bar_w / 2)}" y="{y0 + 14}" text-anchor="middle" '
                    f'font-size="10">{_esc(_fmt_tick(x))}</text>'
                )
        else:
            if numeric_x:
                xs = [float(x) for x, _ in points]
                x_min, x_max = min(xs), max(xs)
                x_span = (x_max - x_min) or 1.0

                def x_px(value: float) -> float:
                    return x0 + (value - x_min) / x_span * plot_w

                coords = [(x_px(float(x)), y_px(float(y))) for x, y in points]
            else:
                coords = [(x0 + slot * i + slot / 2, y_px(float(y))) for i, (_, y) in enumerate(points)]
            if spec.kind == "line" and len(coords) > 1:
                path = " ".join(f"{_fmt(cx)},{_fmt(cy)}" for cx, cy in coords)
                parts.append(f'<polyline points="{path}" fill="none" stroke="steelblue" stroke-width="2"/>')
            for (cx, cy), (x, _) in zip(coords, points):
                parts.append(f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="3" fill="steelblue"/>')
            for (cx, _), (x, _) in zip(coords, points):
                parts.append(
                    f'<text x="{_fmt(cx)}" y="{y0 + 14}" text-anchor="middle" font-size="10">'
                    f"{_esc(_fmt_tick(x))}</text>"
                )

    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _esc(text: str) -> str:
    return (
        str(text)
        .replace("&", "&amp;")
        .replace("<", "&lt;")
        .replace(">", "&gt;")
        .replace('"', "&quot;")
    )
