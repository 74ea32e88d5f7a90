"""SVG visualization of a page and a predicted reading order.

With a prediction, each token box is numbered by its predicted rank and drawn
green when that rank matches the gold position, red otherwise (gray for tokens
the prediction never emits). Without a prediction, boxes are numbered by gold
order and connected by arrows.
"""

from __future__ import annotations

from xml.sax.saxutils import escape

from .core import OrderPrediction, Page

CORRECT_COLOR = "green"
WRONG_COLOR = "red"
OMITTED_COLOR = "gray"
ARROW_COLOR = "blue"


def _box_element(x0: int, y0: int, width: int, height: int, color: str, title: str) -> str:
    return (
        f'<rect x="{x0}" y="{y0}" width="{width}" height="{height}" '
        f'fill="{color}" fill-opacity="0.15" stroke="{color}" stroke-width="1">'
        f"<title>{escape(title)}</title></rect>"
    )


def _label_element(x: int, y: int, size: int, color: str, text: str) -> str:
    return f'<text x="{x}" y="{y}" font-size="{size}" fill="{color}">{escape(text)}</text>'


def render_svg(page: Page, prediction: OrderPrediction | None = None) -> str:
    """Render a page as an SVG document string."""
    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{page.width}" '
        f'height="{page.height}" viewBox="0 0 {page.width} {page.height}">',
        f'<rect x="0" y="0" width="{page.width}" height="{page.height}" '
        'fill="white" stroke="none"/>',
    ]
    if prediction is not None:
        prediction.validate_against(page)
        rank: dict[int, int] = {}
        for pos, idx in enumerate(prediction.indices):
            rank.setdefault(idx, pos)
        for i, token in enumerate(page.tokens):
            box = token.bbox
            pos = rank.get(i)
            if pos is None:
                color, label = OMITTED_COLOR, "-"
            else:
                color = CORRECT_COLOR if pos == i else WRONG_COLOR
                label = str(pos)
            size = max(6, box.height - 2)
            parts.append(_box_element(box.x0, box.y0, box.width, box.height, color, token.word))
            parts.append(_label_element(box.x0 + 1, box.y1 - 1, size, color, label))
    else:
        parts.append(
            "<defs>"
            f'<marker id="arrow" markerWidth="6" markerHeight="6" refX="5" refY="3" '
            f'orient="auto"><path d="M0,0 L6,3 L0,6 z" fill="{ARROW_COLOR}"/></marker>'
            "</defs>"
        )
        centers = []
        for i, token in enumerate(page.tokens):
            box = token.bbox
            size = max(6, box.height - 2)
            parts.append(_box_element(box.x0, box.y0, box.width, box.height, "black", token.word))
            parts.append(_label_element(box.x0 + 1, box.y1 - 1, size, "black", str(i)))
            cx, cy = box.center()
            centers.append((f"{cx:g}", f"{cy:g}"))
        for (x1, y1), (x2, y2) in zip(centers, centers[1:]):
            parts.append(
                f'<line x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}" '
                f'stroke="{ARROW_COLOR}" stroke-width="0.8" marker-end="url(#arrow)"/>'
            )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_svg(path: str, page: Page, prediction: OrderPrediction | None = None) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(render_svg(page, prediction))
