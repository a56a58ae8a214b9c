"""Header band detection, Type A / Type B classification, repeated headers."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

from .table_grid import TableGrid

HEADER_FRACTION = 0.8
MIN_HEADER_CELLS = 2


class Axis(enum.Enum):
    ROWS = "rows"
    COLUMNS = "columns"


class Orientation(enum.Enum):
    HORIZONTAL = "horizontal"  # headers on top
    VERTICAL = "vertical"  # headers on the side


@dataclass(frozen=True)
class HeaderLayout:
    header_rows: tuple[int, ...] = ()
    header_cols: tuple[int, ...] = ()

    def data_rows(self, grid: TableGrid) -> list[int]:
        return [r for r in range(grid.n_rows) if r not in self.header_rows]

    def data_cols(self, grid: TableGrid) -> list[int]:
        return [c for c in range(grid.n_cols) if c not in self.header_cols]


class ShapeKind(enum.Enum):
    TYPE_A = "A"
    TYPE_B = "B"
    UNRECOGNIZED = "unrecognized"


@dataclass(frozen=True)
class TableShape:
    kind: ShapeKind
    orientation: Optional[Orientation] = None

    def __post_init__(self):
        if (self.kind is ShapeKind.TYPE_A) != (self.orientation is not None):
            raise ValueError("only Type A shapes carry an orientation")


TYPE_A_HORIZONTAL = TableShape(ShapeKind.TYPE_A, Orientation.HORIZONTAL)
TYPE_A_VERTICAL = TableShape(ShapeKind.TYPE_A, Orientation.VERTICAL)
TYPE_B = TableShape(ShapeKind.TYPE_B)
UNRECOGNIZED = TableShape(ShapeKind.UNRECOGNIZED)


@dataclass(frozen=True)
class RepetitionPattern:
    axis: Axis
    period: int

    def __post_init__(self):
        if self.period < 2:
            raise ValueError(f"repetition period must be >= 2, got {self.period}")


def _is_band(cells, other_extent: int) -> bool:
    n_header = sum(cell.is_header for cell in cells)
    if not cells or n_header / len(cells) < HEADER_FRACTION:
        return False
    return n_header >= MIN_HEADER_CELLS or other_extent == 1


def find_header_bands(grid: TableGrid) -> HeaderLayout:
    """Rows (columns) whose cells are at least 80% header cells.

    A band also needs two header cells unless the grid is a single column
    (row) wide, so that one stray ``!`` cell does not make a header.
    """
    rows = tuple(r for r in range(grid.n_rows) if _is_band(grid.row(r), grid.n_cols))
    cols = tuple(c for c in range(grid.n_cols) if _is_band(grid.column(c), grid.n_rows))
    return HeaderLayout(rows, cols)


def classify_shape(layout: HeaderLayout, grid: TableGrid = None) -> TableShape:
    if layout.header_rows and layout.header_cols:
        return TYPE_B
    if layout.header_rows:
        return TYPE_A_HORIZONTAL
    if layout.header_cols:
        return TYPE_A_VERTICAL
    return UNRECOGNIZED


def _uniform_period(indices: tuple[int, ...], extent: int) -> Optional[int]:
    if len(indices) < 2 or indices[0] != 0:
        return None
    period = indices[1]
    if period < 2:
        return None
    return period if list(indices) == list(range(0, extent, period)) else None


def detect_repetition(layout: HeaderLayout, grid: TableGrid) -> Optional[RepetitionPattern]:
    """Header bands recurring every N rows (checked first) or N columns."""
    period = _uniform_period(layout.header_rows, grid.n_rows)
    if period:
        return RepetitionPattern(Axis.ROWS, period)
    period = _uniform_period(layout.header_cols, grid.n_cols)
    if period:
        return RepetitionPattern(Axis.COLUMNS, period)
    return None


def segment_bands(grid: TableGrid, pattern: RepetitionPattern) -> list[TableGrid]:
    """Cut ``grid`` into consecutive bands of ``pattern.period`` rows or columns.

    A trailing band consisting of the header alone is dropped. Cells keep
    their original origins, so span copies remain recognisable.
    """
    n = pattern.period
    out = []
    if pattern.axis is Axis.ROWS:
        for start in range(0, grid.n_rows, n):
            band = grid.cells[start:start + n]
            if len(band) > 1:
                out.append(grid.with_cells(band))
    else:
        for start in range(0, grid.n_cols, n):
            if grid.n_cols - start > 1:
                out.append(grid.with_cells([row[start:start + n] for row in grid.cells]))
    return out


def split_repeated(grid: TableGrid) -> list[TableGrid]:
    """Segment repeatedly until no segment shows a repetition pattern.

    Cutting along one axis can expose a pattern on the other (column header
    fractions change when rows are removed), hence the recursion.
    """
    pattern = detect_repetition(find_header_bands(grid), grid)
    if pattern is None:
        return [grid]
    return [leaf for seg in segment_bands(grid, pattern) for leaf in split_repeated(seg)]
