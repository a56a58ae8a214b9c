"""Turn classified table grids into pronunciation records."""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .categorize import (
    DEFAULT_KEYWORDS,
    Category,
    Kind,
    KeywordTable,
    band_text,
    classify_caption,
    classify_columns,
)
from .structure import (
    Axis,
    HeaderLayout,
    Orientation,
    ShapeKind,
    classify_shape,
    find_header_bands,
    split_repeated,
)
from .table_grid import TableGrid

log = logging.getLogger(__name__)

_ISO_RE = re.compile(r"^[a-z]{2,3}$")


class TableStructureError(ValueError):
    """A table's categories do not line up with its data extent."""


@dataclass(frozen=True)
class PronEntry:
    grapheme: Optional[str] = None
    phoneme: Optional[str] = None
    features: tuple[str, ...] = ()
    example_word: Optional[str] = None
    transcription: Optional[str] = None
    unclassified: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        if len(set(self.features)) != len(self.features) or "" in self.features:
            raise ValueError(f"features must be distinct and non-empty: {self.features!r}")

    def is_empty(self) -> bool:
        return not (
            self.grapheme or self.phoneme or self.features or self.example_word
            or self.transcription or self.unclassified
        )


@dataclass
class LanguageDoc:
    page_title: str
    source_url: str
    iso_code: Optional[str] = None
    entries: list[PronEntry] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    n_tables: int = 0

    def __post_init__(self):
        if self.iso_code is not None and not _ISO_RE.match(self.iso_code):
            raise ValueError(f"not an ISO 639 code: {self.iso_code!r}")


class _EntryBuilder:
    """Accumulates one entry; a second value for a filled field goes to unclassified."""

    _SINGLE = {
        Kind.GRAPHEME: "grapheme",
        Kind.PHONEME: "phoneme",
        Kind.EXAMPLE_WORD: "example_word",
        Kind.TRANSCRIPTION: "transcription",
    }

    def __init__(self):
        self.fields: dict = {}
        self.features: list[str] = []
        self.unclassified: list[tuple[str, str]] = []

    def add(self, category: Category, header: str, value: str):
        if category.kind is Kind.UNCLASSIFIED:
            self.unclassified.append((category.header, value))
        elif category.kind is Kind.FEATURE:
            self.add_feature(value)
        else:
            name = self._SINGLE[category.kind]
            if name in self.fields:
                self.unclassified.append((header, value))
            else:
                self.fields[name] = value

    def add_feature(self, value: Optional[str]):
        if value and value not in self.features:
            self.features.append(value)

    def build(self) -> PronEntry:
        return PronEntry(
            features=tuple(self.features), unclassified=tuple(self.unclassified), **self.fields
        )


def extract_type_a(
    grid: TableGrid, layout: HeaderLayout, categories: Sequence[Category]
) -> list[PronEntry]:
    """One entry per data row (headers on top) or data column (headers on the side).

    Multi-item cells are kept verbatim. Column-span copies of one source cell
    contribute to an entry once.
    """
    shape = classify_shape(layout, grid)
    if shape.kind is not ShapeKind.TYPE_A:
        raise TableStructureError(f"expected a Type A table, got {shape.kind.name}")
    horizontal = shape.orientation is Orientation.HORIZONTAL
    if horizontal:
        lines, slots = layout.data_rows(grid), layout.data_cols(grid)
    else:
        lines, slots = layout.data_cols(grid), layout.data_rows(grid)
    if len(categories) != len(slots):
        raise TableStructureError(
            f"{len(categories)} categories for {len(slots)} data "
            f"{'columns' if horizontal else 'rows'} in a {grid.n_rows}x{grid.n_cols} table"
            + (f" ({grid.caption!r})" if grid.caption else "")
        )
    headers = [band_text(grid, layout, s, shape.orientation) for s in slots]
    entries = []
    for line in lines:
        builder, seen = _EntryBuilder(), set()
        for slot, category, header in zip(slots, categories, headers):
            cell = grid[line, slot] if horizontal else grid[slot, line]
            if not cell.text or cell.origin in seen:
                continue
            seen.add(cell.origin)
            builder.add(category, header, cell.text)
        entry = builder.build()
        if not entry.is_empty():
            entries.append(entry)
    return entries


def header_path(
    grid: TableGrid, layout: HeaderLayout, index: int, axis: Axis = Axis.COLUMNS
) -> list[str]:
    """Header texts labelling data column ``index`` (or data row, for ``Axis.ROWS``).

    Walks every header band outward-in, top-to-bottom for columns and
    left-to-right for rows, skipping span copies and empty texts.
    """
    if axis is Axis.COLUMNS:
        cells = [grid[r, index] for r in layout.header_rows]
    else:
        cells = [grid[index, c] for c in layout.header_cols]
    path, last_origin = [], None
    for cell in cells:
        if cell.origin != last_origin and cell.text and cell.text not in path:
            path.append(cell.text)
        last_origin = cell.origin
    return path


def extract_type_b(
    grid: TableGrid, layout: HeaderLayout, caption_feature: Optional[str] = None
) -> list[PronEntry]:
    """Each data-cell token is a phoneme described by its column and row headers."""
    entries = []
    col_paths = {c: header_path(grid, layout, c, Axis.COLUMNS) for c in layout.data_cols(grid)}
    for r in layout.data_rows(grid):
        row_path = header_path(grid, layout, r, Axis.ROWS)
        for c, col_path in col_paths.items():
            tokens = grid[r, c].text.split()
            if not tokens:
                continue
            features = []
            for f in [*col_path, *row_path, caption_feature]:
                if f and f not in features:
                    features.append(f)
            entries.extend(PronEntry(phoneme=t, features=tuple(features)) for t in tokens)
    return entries


def extract_unrecognized(grid: TableGrid) -> list[PronEntry]:
    """Fallback for tables without header bands.

    Each row becomes one entry of (header, value) pairs, where the header is
    the nearest header cell above in the same column, else the caption.
    """
    entries = []
    for r in range(grid.n_rows):
        pairs, seen = [], set()
        for c in range(grid.n_cols):
            cell = grid[r, c]
            if cell.is_header or not cell.text or cell.origin in seen:
                continue
            seen.add(cell.origin)
            header = next(
                (grid[above, c].text for above in range(r - 1, -1, -1) if grid[above, c].is_header),
                grid.caption or "",
            )
            pairs.append((header, cell.text))
        if pairs:
            entries.append(PronEntry(unclassified=tuple(pairs)))
    return entries


def extract_table(grid: TableGrid, keywords: KeywordTable = DEFAULT_KEYWORDS) -> list[PronEntry]:
    """Extract one table: split repeated headers, then dispatch on shape."""
    entries = []
    caption_feature = classify_caption(grid.caption, keywords)
    for seg in split_repeated(grid):
        layout = find_header_bands(seg)
        shape = classify_shape(layout, seg)
        if shape.kind is ShapeKind.TYPE_A:
            found = extract_type_a(seg, layout, classify_columns(seg, layout, keywords))
            if caption_feature:
                found = [
                    e if caption_feature in e.features
                    else PronEntry(e.grapheme, e.phoneme, (*e.features, caption_feature),
                                   e.example_word, e.transcription, e.unclassified)
                    for e in found
                ]
        elif shape.kind is ShapeKind.TYPE_B:
            found = extract_type_b(seg, layout, caption_feature)
        else:
            found = extract_unrecognized(seg)
        entries.extend(found)
    return entries


def extract_language(
    page_title: str,
    source_url: str,
    grids: Sequence[TableGrid],
    keywords: KeywordTable = DEFAULT_KEYWORDS,
    iso_code: Optional[str] = None,
) -> LanguageDoc:
    doc = LanguageDoc(page_title, source_url, iso_code, n_tables=len(grids))
    for i, grid in enumerate(grids):
        try:
            doc.entries.extend(extract_table(grid, keywords))
        except (TableStructureError, ValueError, IndexError) as exc:
            msg = f"{page_title}: table {i}: {exc}"
            log.warning(msg)
            doc.warnings.append(msg)
    return doc
