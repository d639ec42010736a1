"""Glyph advance widths used to turn road names into label lengths."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path


@dataclass(frozen=True)
class FontMetrics:
    """Advance widths as multiples of the font size.

    Glyphs missing from ``glyphs`` use ``default``.
    """

    default: float = 0.6
    glyphs: dict[str, float] = field(default_factory=lambda: {"W": 1.0})

    def advance(self, ch: str, font: float) -> float:
        return self.glyphs.get(ch, self.default) * font

    def text_length(self, text: str, font: float) -> float:
        return sum(self.advance(ch, font) for ch in text)

    def w_width(self, font: float) -> float:
        return self.advance("W", font)

    @classmethod
    def load(cls, path: str | Path) -> FontMetrics:
        data = json.loads(Path(path).read_text())
        glyphs = {"W": 1.0}
        glyphs.update({str(k): float(v) for k, v in data.get("glyphs", {}).items()})
        return cls(default=float(data.get("default", 0.6)), glyphs=glyphs)


DEFAULT_METRICS = FontMetrics()
