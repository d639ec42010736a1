"""Zoom-dependent drawing styles for road categories.

Style sizes are given in screen pixels; map coordinates are projected
metres, converted with the zoom's metres-per-pixel scale.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

ZOOM_SCALE = {15: 4.773, 16: 2.387, 17: 1.193}


@dataclass(frozen=True)
class CategoryStyle:
    stroke_px: float
    color: str
    font_px: float
    rank: int
    min_zoom: int


DEFAULT_CATEGORIES: dict[str, CategoryStyle] = {
    "motorway": CategoryStyle(12.0, "#e892a2", 10.0, 6, 15),
    "trunk": CategoryStyle(11.0, "#f9b29c", 10.0, 5, 15),
    "primary": CategoryStyle(10.0, "#fcd6a4", 10.0, 4, 15),
    "secondary": CategoryStyle(9.0, "#f7fabf", 10.0, 3, 15),
    "tertiary": CategoryStyle(8.0, "#ffffff", 9.0, 2, 16),
    "residential": CategoryStyle(7.0, "#ffffff", 8.0, 1, 16),
    "service": CategoryStyle(5.0, "#ffffff", 7.0, 0, 17),
}


@dataclass(frozen=True)
class StyleConfig:
    zoom: int = 16
    categories: dict[str, CategoryStyle] = field(default_factory=lambda: dict(DEFAULT_CATEGORIES))
    scale: float | None = None

    def __post_init__(self):
        if self.scale is None:
            if self.zoom not in ZOOM_SCALE:
                raise ValueError(f"no scale known for zoom {self.zoom}; pass one explicitly")
            object.__setattr__(self, "scale", ZOOM_SCALE[self.zoom])

    def included(self, category: str) -> bool:
        c = self.categories.get(category)
        return c is not None and c.min_zoom <= self.zoom

    def visible_categories(self) -> set[str]:
        return {k for k in self.categories if self.included(k)}

    def stroke(self, category: str) -> float:
        return self.categories[category].stroke_px * self.scale

    def font(self, category: str) -> float:
        return self.categories[category].font_px * self.scale

    def color(self, category: str) -> str:
        return self.categories[category].color

    def rank(self, category: str) -> int:
        return self.categories[category].rank

    def px(self, value: float) -> float:
        return value * self.scale

    def at_zoom(self, zoom: int) -> StyleConfig:
        return StyleConfig(zoom, dict(self.categories))

    @classmethod
    def load(cls, path: str | Path, zoom: int = 16) -> StyleConfig:
        data = json.loads(Path(path).read_text())
        cats = {
            name: CategoryStyle(
                float(d["stroke"]),
                str(d.get("color", "#ffffff")),
                float(d["font"]),
                int(d.get("rank", 0)),
                int(d.get("min_zoom", 0)),
            )
            for name, d in data["categories"].items()
        }
        return cls(int(data.get("zoom", zoom)), cats, data.get("scale"))
