"""Parse wikitext and rendered HTML tables into span-resolved grids.

Both parsers produce the same :class:`TableGrid` representation: a
rectangular matrix of :class:`Cell` objects whose text has been reduced to
plain text by :func:`clean_cell_text`.
"""

from __future__ import annotations

import enum
import html
import logging
import re
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

log = logging.getLogger(__name__)


class CellKind(enum.Enum):
    HEADER = "header"
    DATA = "data"


@dataclass(frozen=True)
class RawCell:
    """A cell as written in the source, before span expansion."""

    kind: CellKind
    text: str
    rowspan: int = 1
    colspan: int = 1

    def __post_init__(self):
        if self.rowspan < 1 or self.colspan < 1:
            raise ValueError(f"spans must be positive, got {self.rowspan}x{self.colspan}")


@dataclass(frozen=True)
class Cell:
    kind: CellKind
    text: str
    origin: tuple[int, int]

    @property
    def is_header(self) -> bool:
        return self.kind is CellKind.HEADER


@dataclass(frozen=True)
class TableGrid:
    cells: tuple[tuple[Cell, ...], ...]
    caption: Optional[str] = None
    source_url: Optional[str] = None

    def __post_init__(self):
        widths = {len(row) for row in self.cells}
        if len(widths) > 1:
            raise ValueError(f"grid rows have unequal lengths: {sorted(widths)}")

    @property
    def n_rows(self) -> int:
        return len(self.cells)

    @property
    def n_cols(self) -> int:
        return len(self.cells[0]) if self.cells else 0

    def __getitem__(self, pos: tuple[int, int]) -> Cell:
        r, c = pos
        return self.cells[r][c]

    def row(self, r: int) -> tuple[Cell, ...]:
        return self.cells[r]

    def column(self, c: int) -> tuple[Cell, ...]:
        return tuple(row[c] for row in self.cells)

    def texts(self) -> list[list[str]]:
        return [[cell.text for cell in row] for row in self.cells]

    def kinds(self) -> list[list[CellKind]]:
        return [[cell.kind for cell in row] for row in self.cells]

    def with_cells(self, cells: Sequence[Sequence[Cell]]) -> "TableGrid":
        return TableGrid(tuple(tuple(r) for r in cells), self.caption, self.source_url)


# ---------------------------------------------------------------------------
# Span resolution


def resolve_spans(
    raw: Sequence[Sequence[RawCell]],
    caption: Optional[str] = None,
    source_url: Optional[str] = None,
) -> TableGrid:
    """Expand row/column spans into a rectangular grid.

    Each spanning cell is copied into every position it covers. Rowspans
    running past the last row are clipped; when two cells claim the same
    position the one placed first (row-major) keeps it. Short rows are
    padded on the right with empty data cells.
    """
    n_rows = len(raw)
    placed: dict[tuple[int, int], Cell] = {}
    n_cols = 0
    for r, row in enumerate(raw):
        c = 0
        for rc in row:
            while (r, c) in placed:
                c += 1
            cell = Cell(rc.kind, rc.text, (r, c))
            for dr in range(min(rc.rowspan, n_rows - r)):
                for dc in range(rc.colspan):
                    placed.setdefault((r + dr, c + dc), cell)
            c += rc.colspan
        n_cols = max(n_cols, c)
    if placed:
        n_cols = max(n_cols, max(c for _, c in placed) + 1)
    cells = tuple(
        tuple(placed.get((r, c)) or Cell(CellKind.DATA, "", (r, c)) for c in range(n_cols))
        for r in range(n_rows)
    )
    return TableGrid(cells, caption, source_url)


# ---------------------------------------------------------------------------
# Cell text cleaning

# Templates whose content is a footnote or citation rather than cell payload.
_NOTE_TEMPLATES = {
    "efn", "efn-la", "efn-lr", "efn-ua", "sfn", "sfnp", "refn", "ref", "r", "rp",
    "cn", "citation needed", "fact", "harvnb", "harv", "notetag", "note", "citation",
    "cite web", "cite book", "cite journal",
}
_MEDIA_PREFIXES = ("file:", "image:", "category:", "media:")
_BLOCK_TAGS = {"br", "p", "div", "li", "ul", "ol", "tr", "td", "th", "hr", "dd", "dt", "dl"}

_COMMENT_RE = re.compile(r"<!--.*?(-->|$)", re.S)
_REF_RE = re.compile(r"<ref\b[^>/]*/>|<ref\b[^>]*>.*?</ref\s*>", re.S | re.I)
_SUP_REF_RE = re.compile(
    r"<sup\b[^>]*class\s*=\s*[\"'][^\"']*\breference\b[^\"']*[\"'][^>]*>.*?</sup\s*>", re.S | re.I
)
_HIDDEN_RE = re.compile(r"<(style|script)\b[^>]*>.*?</\1\s*>", re.S | re.I)
_LINK_RE = re.compile(r"\[\[([^\[\]]*)\]\]")
_TEMPLATE_RE = re.compile(r"\{\{([^{}]*)\}\}")
_EXT_LINK_RE = re.compile(r"\[(?:https?:)?//[^\s\]]+(?:\s+([^\]]*))?\]")
_TAG_RE = re.compile(r"</?([a-zA-Z][a-zA-Z0-9]*)\b[^<>]*/?>")
_QUOTES_RE = re.compile(r"'{2,}")


def _link_label(m: re.Match) -> str:
    target, _, label = m.group(1).partition("|")
    if target.strip().lower().lstrip(":").startswith(_MEDIA_PREFIXES) and not target.lstrip().startswith(":"):
        return ""
    if label:
        # [[File:...|thumb|caption]]-style links keep only the last segment.
        return label.rsplit("|", 1)[-1]
    return target.lstrip().removeprefix(":")  # [[:Category:X]] renders as "Category:X"


def _template_value(m: re.Match) -> str:
    name, *args = m.group(1).split("|")
    if name.strip().lower() in _NOTE_TEMPLATES:
        return ""
    positional = [a for a in args if not re.match(r"^\s*[\w\s-]+=", a)]
    return positional[-1] if positional else ""


def clean_cell_text(raw_text: str) -> str:
    """Reduce wikitext or HTML cell content to single-line plain text."""
    s = _COMMENT_RE.sub("", raw_text)
    s = _REF_RE.sub("", s)
    s = _SUP_REF_RE.sub("", s)
    s = _HIDDEN_RE.sub("", s)
    while True:
        t = _LINK_RE.sub(_link_label, s)
        t = _TEMPLATE_RE.sub(_template_value, t)
        if t == s:
            break
        s = t
    s = _EXT_LINK_RE.sub(lambda m: m.group(1) or "", s)
    s = _TAG_RE.sub(lambda m: " " if m.group(1).lower() in _BLOCK_TAGS else "", s)
    s = _QUOTES_RE.sub("", s)
    # Unbalanced leftovers lose their delimiters.
    for delim in ("[[", "]]", "{{", "}}"):
        s = s.replace(delim, " ")
    s = s.replace("|", " ")
    s = html.unescape(s)
    return " ".join(s.split())


def flatten_text(grid: TableGrid) -> str:
    """Plain-text rendering of a whole table, used for nested tables."""
    parts = [grid.caption] if grid.caption else []
    seen = set()
    for row in grid.cells:
        for cell in row:
            if cell.origin not in seen and cell.text:
                seen.add(cell.origin)
                parts.append(cell.text)
    return " ".join(parts)


# ---------------------------------------------------------------------------
# Wikitext

_SPAN_RE = {
    name: re.compile(rf"\b{name}\s*=\s*[\"']?\s*(\d+)", re.I) for name in ("rowspan", "colspan")
}


def _span(attrs: str, name: str) -> int:
    m = _SPAN_RE[name].search(attrs)
    if not m:
        return 1
    return max(1, int(m.group(1)))


def _split_top(s: str, seps: Iterable[str]) -> list[str]:
    """Split on any separator occurring outside ``[[...]]`` and ``{{...}}``."""
    seps = tuple(seps)
    parts, buf, depth, i = [], [], 0, 0
    while i < len(s):
        two = s[i:i + 2]
        if two in ("[[", "{{"):
            depth += 1
            buf.append(two)
            i += 2
        elif two in ("]]", "}}") and depth:
            depth -= 1
            buf.append(two)
            i += 2
        elif depth == 0 and two in seps:
            parts.append("".join(buf))
            buf = []
            i += 2
        else:
            buf.append(s[i])
            i += 1
    parts.append("".join(buf))
    return parts


def _split_attrs(segment: str) -> tuple[str, str]:
    """Separate ``attrs | content``; returns ("", segment) if no attributes."""
    depth, i = 0, 0
    while i < len(segment):
        two = segment[i:i + 2]
        if two in ("[[", "{{"):
            depth += 1
            i += 2
        elif two in ("]]", "}}") and depth:
            depth -= 1
            i += 2
        elif depth == 0 and segment[i] == "|":
            return segment[:i], segment[i + 1:]
        else:
            i += 1
    return "", segment


class _WikiTableBuilder:
    def __init__(self):
        self.rows: list[list[list]] = []
        self.current: Optional[list[list]] = None
        self.caption: Optional[list[str]] = None
        self.last: Optional[list] = None  # the text holder receiving continuation lines

    def new_row(self):
        self.current = None
        self.last = None

    def add_cells(self, kind: CellKind, segments: list[str]):
        if self.current is None:
            self.current = []
            self.rows.append(self.current)
        for seg in segments:
            attrs, content = _split_attrs(seg)
            cell = [kind, [content], _span(attrs, "rowspan"), _span(attrs, "colspan")]
            self.current.append(cell)
            self.last = cell[1]

    def set_caption(self, segment: str):
        _, content = _split_attrs(segment)
        self.caption = [content]
        self.last = self.caption

    def append_text(self, text: str):
        if self.last is not None:
            self.last.append(text)

    def build(self, source_url: Optional[str]) -> Optional[TableGrid]:
        raw = [
            [RawCell(kind, clean_cell_text("\n".join(parts)), rs, cs) for kind, parts, rs, cs in row]
            for row in self.rows
            if row
        ]
        if not raw:
            return None
        caption = clean_cell_text("\n".join(self.caption)) if self.caption is not None else None
        return resolve_spans(raw, caption or None, source_url)


def _is_start(line: str) -> bool:
    return line.lstrip().startswith("{|")


def _is_end(line: str) -> bool:
    return line.lstrip().startswith("|}")


def _table_blocks(lines: list[str], warnings: list[str]) -> list[list[str]]:
    blocks, depth, current = [], 0, []
    for line in lines:
        if _is_start(line):
            depth += 1
        if depth:
            current.append(line)
            if _is_end(line):
                depth -= 1
                if depth == 0:
                    blocks.append(current)
                    current = []
    if depth:
        warnings.append(f"unterminated table starting with {current[0].strip()[:40]!r}; skipped")
    return blocks


def _parse_block(lines: list[str], source_url: Optional[str]) -> Optional[TableGrid]:
    b = _WikiTableBuilder()
    body = lines[1:-1] if _is_end(lines[-1]) else lines[1:]
    i = 0
    while i < len(body):
        line = body[i]
        stripped = line.lstrip()
        if _is_start(line):
            depth, nested = 0, []
            while i < len(body):
                nested.append(body[i])
                if _is_start(body[i]):
                    depth += 1
                elif _is_end(body[i]):
                    depth -= 1
                    if depth == 0:
                        break
                i += 1
            inner = _parse_block(nested, None)
            if inner is not None:
                if b.last is None:
                    b.add_cells(CellKind.DATA, [""])
                b.append_text(flatten_text(inner))
        elif stripped.startswith("|-"):
            b.new_row()
        elif stripped.startswith("|+"):
            b.set_caption(stripped[2:])
        elif stripped.startswith("!"):
            b.add_cells(CellKind.HEADER, _split_top(stripped[1:], ("!!", "||")))
        elif stripped.startswith("|"):
            b.add_cells(CellKind.DATA, _split_top(stripped[1:], ("||",)))
        else:
            b.append_text(line)
        i += 1
    return b.build(source_url)


def parse_wikitext_tables(
    text: str, warnings: Optional[list[str]] = None, source_url: Optional[str] = None
) -> list[TableGrid]:
    """Parse every top-level ``{| ... |}`` table in page wikitext.

    Nested tables are flattened to plain text inside their parent cell.
    Unterminated tables are skipped; a message is appended to ``warnings``
    when a list is supplied.
    """
    sink = warnings if warnings is not None else []
    grids = []
    for block in _table_blocks(text.split("\n"), sink):
        grid = _parse_block(block, source_url)
        if grid is None:
            sink.append("table with no rows dropped")
            continue
        grids.append(grid)
    if warnings is None and sink:
        for w in sink:
            log.warning(w)
    return grids


# ---------------------------------------------------------------------------
# HTML


def _has_class(tag, wanted: Optional[str]) -> bool:
    if wanted is None:
        return True
    classes = tag.get("class") or []
    if isinstance(classes, str):
        classes = classes.split()
    return wanted in classes


def _owning_table(tag):
    return tag.find_parent("table")


def _int_attr(value) -> int:
    m = re.match(r"\s*(\d+)", str(value or ""))
    return max(1, int(m.group(1))) if m else 1


def _html_table_grid(table, source_url: Optional[str]) -> Optional[TableGrid]:
    from bs4 import NavigableString

    raw = []
    for tr in table.find_all("tr"):
        if _owning_table(tr) is not table:
            continue
        row = []
        for cell in tr.find_all(["th", "td"], recursive=False):
            for nested in cell.find_all("table"):
                if nested.parent is None or _owning_table(nested) is not table:
                    # already replaced along with an enclosing nested table
                    continue
                inner = _html_table_grid(nested, None)
                nested.replace_with(NavigableString(f" {flatten_text(inner)} " if inner else " "))
            kind = CellKind.HEADER if cell.name == "th" else CellKind.DATA
            row.append(
                RawCell(
                    kind,
                    clean_cell_text(cell.decode_contents()),
                    _int_attr(cell.get("rowspan")),
                    _int_attr(cell.get("colspan")),
                )
            )
        if row:
            raw.append(row)
    if not raw:
        return None
    caption = None
    cap = table.find("caption")
    if cap is not None and _owning_table(cap) is table:
        caption = clean_cell_text(cap.decode_contents()) or None
    return resolve_spans(raw, caption, source_url)


def parse_html_tables(
    html_text: str,
    warnings: Optional[list[str]] = None,
    source_url: Optional[str] = None,
    table_class: Optional[str] = "wikitable",
) -> list[TableGrid]:
    """Parse ``<table>`` elements carrying ``table_class`` from rendered HTML.

    ``table_class=None`` accepts every table. Tables nested inside another
    selected table are flattened into the enclosing cell.
    """
    from bs4 import BeautifulSoup

    sink = warnings if warnings is not None else []
    soup = BeautifulSoup(html_text, "html5lib")
    selected = [t for t in soup.find_all("table") if _has_class(t, table_class)]
    top = []
    for t in selected:
        parent = t.find_parent("table")
        while parent is not None and not _has_class(parent, table_class):
            parent = parent.find_parent("table")
        if parent is None:
            top.append(t)
    grids = []
    for t in top:
        grid = _html_table_grid(t, source_url)
        if grid is None:
            sink.append("table with no rows dropped")
            continue
        grids.append(grid)
    if warnings is None and sink:
        for w in sink:
            log.warning(w)
    return grids


def sniff_format(body: str) -> str:
    """Guess whether a page body is ``"html"`` or ``"wikitext"``."""
    has_wiki = re.search(r"^\s*\{\|", body, re.M) is not None
    has_html = re.search(r"<table\b", body, re.I) is not None
    if has_wiki and not has_html:
        return "wikitext"
    if has_html and not has_wiki:
        return "html"
    return "html" if re.match(r"\s*<(!doctype|html|head|body)\b", body, re.I) else "wikitext"


def parse_tables(
    body: str,
    fmt: str = "auto",
    warnings: Optional[list[str]] = None,
    source_url: Optional[str] = None,
) -> list[TableGrid]:
    if fmt == "auto":
        fmt = sniff_format(body)
    if fmt == "html":
        return parse_html_tables(body, warnings, source_url)
    if fmt == "wikitext":
        return parse_wikitext_tables(body, warnings, source_url)
    raise ValueError(f"unknown table format {fmt!r}")
