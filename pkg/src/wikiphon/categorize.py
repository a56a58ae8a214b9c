"""Keyword classification of table headers and captions."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

from .structure import HeaderLayout, Orientation, classify_shape
from .table_grid import TableGrid


class Kind(enum.Enum):
    GRAPHEME = "grapheme"
    PHONEME = "phoneme"
    FEATURE = "features"
    EXAMPLE_WORD = "example_word"
    TRANSCRIPTION = "transcription"
    UNCLASSIFIED = "unclassified"


@dataclass(frozen=True)
class Category:
    kind: Kind
    header: Optional[str] = None  # verbatim header text, Unclassified only

    @classmethod
    def unclassified(cls, header: str) -> "Category":
        return cls(Kind.UNCLASSIFIED, header)

    def __repr__(self):
        if self.kind is Kind.UNCLASSIFIED:
            return f"Unclassified({self.header!r})"
        return self.kind.name.title().replace("_", "")


GRAPHEME = Category(Kind.GRAPHEME)
PHONEME = Category(Kind.PHONEME)
FEATURE = Category(Kind.FEATURE)
EXAMPLE_WORD = Category(Kind.EXAMPLE_WORD)
TRANSCRIPTION = Category(Kind.TRANSCRIPTION)

# Multi-match headers resolve in this order ("IPA transcription" is a transcription).
PRIORITY = (Kind.TRANSCRIPTION, Kind.GRAPHEME, Kind.EXAMPLE_WORD, Kind.FEATURE, Kind.PHONEME)

DEFAULT_HEADER_KEYWORDS = {
    Kind.GRAPHEME: ("letter", "grapheme", "alphabet", "written"),
    Kind.PHONEME: ("ipa", "pronunciation"),
    Kind.FEATURE: ("description",),
    Kind.EXAMPLE_WORD: ("example", "word"),
    Kind.TRANSCRIPTION: ("transcription",),
}
DEFAULT_CAPTION_KEYWORDS = ("vowel", "consonant")

# Category names accepted in keyword override files.
_FILE_NAMES = {
    "grapheme": Kind.GRAPHEME,
    "phoneme": Kind.PHONEME,
    "feature": Kind.FEATURE,
    "features": Kind.FEATURE,
    "pronfeature": Kind.FEATURE,
    "example_word": Kind.EXAMPLE_WORD,
    "exampleword": Kind.EXAMPLE_WORD,
    "example": Kind.EXAMPLE_WORD,
    "transcription": Kind.TRANSCRIPTION,
}


@dataclass(frozen=True)
class KeywordTable:
    header_keywords: dict = field(default_factory=lambda: dict(DEFAULT_HEADER_KEYWORDS))
    caption_keywords: tuple = DEFAULT_CAPTION_KEYWORDS

    def __post_init__(self):
        lowered = {k: tuple(w.lower() for w in v) for k, v in self.header_keywords.items()}
        object.__setattr__(self, "header_keywords", lowered)
        object.__setattr__(self, "caption_keywords", tuple(w.lower() for w in self.caption_keywords))

    def ordered(self):
        """(kind, keywords) pairs in match priority order."""
        return [(k, self.header_keywords.get(k, ())) for k in PRIORITY]

    def merged(self, extra_header: dict, extra_caption=()) -> "KeywordTable":
        header = {k: list(v) for k, v in self.header_keywords.items()}
        for kind, words in extra_header.items():
            bucket = header.setdefault(kind, [])
            bucket.extend(w.lower() for w in words if w.lower() not in bucket)
        caption = list(self.caption_keywords)
        caption.extend(w.lower() for w in extra_caption if w.lower() not in caption)
        return KeywordTable({k: tuple(v) for k, v in header.items()}, tuple(caption))

    @classmethod
    def from_file(cls, path: Union[str, Path], base: Optional["KeywordTable"] = None) -> "KeywordTable":
        """Merge ``category<TAB>keyword`` lines over ``base`` (the defaults).

        The category ``caption`` adds a caption keyword. Blank lines and
        lines starting with ``#`` are ignored.
        """
        base = base or cls()
        extra: dict = {}
        caption = []
        for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            name, sep, word = line.partition("\t")
            word = word.strip()
            if not sep or not word:
                raise ValueError(f"{path}:{lineno}: expected 'category<TAB>keyword'")
            name = name.strip().lower()
            if name == "caption":
                caption.append(word)
            elif name in _FILE_NAMES:
                extra.setdefault(_FILE_NAMES[name], []).append(word)
            else:
                raise ValueError(f"{path}:{lineno}: unknown category {name!r}")
        return base.merged(extra, caption)


DEFAULT_KEYWORDS = KeywordTable()


def classify_header(text: str, table: KeywordTable = DEFAULT_KEYWORDS) -> Category:
    """Case-insensitive substring match of ``text`` against the keyword table."""
    lowered = text.lower()
    for kind, words in table.ordered():
        if any(w in lowered for w in words):
            return Category(kind)
    return Category.unclassified(text)


def classify_caption(caption: Optional[str], table: KeywordTable = DEFAULT_KEYWORDS) -> Optional[str]:
    if not caption:
        return None
    lowered = caption.lower()
    for word in table.caption_keywords:
        if word in lowered:
            return word
    return None


def band_text(grid: TableGrid, layout: HeaderLayout, index: int, orientation: Orientation) -> str:
    """Header text for one data column (horizontal) or data row (vertical).

    Multi-layer header bands are joined with single spaces; span copies of
    the same source cell contribute once.
    """
    if orientation is Orientation.HORIZONTAL:
        cells = [grid[r, index] for r in layout.header_rows]
    else:
        cells = [grid[index, c] for c in layout.header_cols]
    parts, last_origin = [], None
    for cell in cells:
        if cell.origin != last_origin and cell.text:
            parts.append(cell.text)
        last_origin = cell.origin
    return " ".join(parts)


def classify_columns(
    grid: TableGrid, layout: HeaderLayout, table: KeywordTable = DEFAULT_KEYWORDS
) -> list[Category]:
    """One category per data column (headers on top) or data row (headers on the side)."""
    shape = classify_shape(layout, grid)
    if shape.orientation is Orientation.HORIZONTAL:
        indices = layout.data_cols(grid)
    elif shape.orientation is Orientation.VERTICAL:
        indices = layout.data_rows(grid)
    else:
        raise ValueError(f"classify_columns needs a Type A table, got {shape.kind.name}")
    return [classify_header(band_text(grid, layout, i, shape.orientation), table) for i in indices]
