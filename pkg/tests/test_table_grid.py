import pytest
from hypothesis import given, settings

from wikiphon.table_grid import (
    Cell,
    CellKind,
    RawCell,
    TableGrid,
    clean_cell_text,
    parse_html_tables,
    parse_tables,
    parse_wikitext_tables,
    resolve_spans,
    sniff_format,
)

from strategies import raw_tables

H, D = CellKind.HEADER, CellKind.DATA


def layout(grid):
    return [[(c.kind, c.text) for c in row] for row in grid.cells]


def span_oracle(raw):
    """Occupancy-matrix layout written independently of resolve_spans.

    Grows a list-of-lists board row by row; a cell claims every free slot
    in its rectangle and never overwrites an earlier claim.
    """
    n_rows = len(raw)
    board = [[] for _ in range(n_rows)]

    def free(r, c):
        return c >= len(board[r]) or board[r][c] is None

    def claim(r, c, value):
        while len(board[r]) <= c:
            board[r].append(None)
        if board[r][c] is None:
            board[r][c] = value

    for r, row in enumerate(raw):
        c = 0
        for rc in row:
            while not free(r, c):
                c += 1
            for rr in range(r, min(r + rc.rowspan, n_rows)):
                for cc in range(c, c + rc.colspan):
                    claim(rr, cc, (rc.kind, rc.text, (r, c)))
            c += rc.colspan
    width = max((len(b) for b in board), default=0)
    return [
        [(b[c] if c < len(b) and b[c] is not None else (D, "", (r, c))) for c in range(width)]
        for r, b in enumerate(board)
    ]


class TestWikitext:
    def test_simple_table(self):
        (grid,) = parse_wikitext_tables("{|\n! IPA !! Letter\n|-\n| b || B\n|}")
        assert layout(grid) == [[(H, "IPA"), (H, "Letter")], [(D, "b"), (D, "B")]]

    def test_empty_text(self):
        assert parse_wikitext_tables("") == []

    def test_caption_and_colspan(self):
        (grid,) = parse_wikitext_tables('{|\n|+ Consonants\n! colspan="2" | Labial\n|-\n| p || b\n|}')
        assert grid.caption == "Consonants"
        assert grid.row(0) == (Cell(H, "Labial", (0, 0)), Cell(H, "Labial", (0, 0)))
        assert layout(grid)[1] == [(D, "p"), (D, "b")]

    def test_attributes_stripped(self):
        (grid,) = parse_wikitext_tables(
            '{| class="wikitable"\n|-\n! style="width:5em" | Letter\n| style="color:red" | [[a|A]]\n|}'
        )
        assert layout(grid) == [[(H, "Letter"), (D, "A")]]

    def test_one_cell_per_line_and_continuations(self):
        text = "{|\n! a\n! b\n|-\n| x\ncontinued\n| y\n|}"
        (grid,) = parse_wikitext_tables(text)
        assert grid.texts() == [["a", "b"], ["x continued", "y"]]

    def test_pipes_inside_links_do_not_split(self):
        (grid,) = parse_wikitext_tables("{|\n| [[x|y]] || {{IPA|/z/}}\n|}")
        assert grid.texts() == [["y", "/z/"]]

    def test_document_order_and_prose_ignored(self):
        text = "intro\n{|\n| 1\n|}\nmiddle\n{|\n| 2\n|}\nend"
        assert [g.texts() for g in parse_wikitext_tables(text)] == [[["1"]], [["2"]]]

    def test_nested_table_flattens_into_cell(self):
        text = "{|\n| outer\n{|\n! in1 !! in2\n|-\n| v\n|}\n| next\n|}"
        (grid,) = parse_wikitext_tables(text)
        assert grid.texts() == [["outer in1 in2 v", "next"]]

    def test_unterminated_table_skipped_with_warning(self):
        warnings = []
        grids = parse_wikitext_tables("{|\n| ok\n|}\n{|\n| never closed", warnings)
        assert [g.texts() for g in grids] == [[["ok"]]]
        assert len(warnings) == 1 and "unterminated" in warnings[0]

    def test_header_line_with_double_pipe(self):
        (grid,) = parse_wikitext_tables("{|\n! a || b\n|}")
        assert layout(grid) == [[(H, "a"), (H, "b")]]

    def test_short_rows_pad_right(self):
        (grid,) = parse_wikitext_tables("{|\n| a || b || c\n|-\n| d\n|}")
        assert layout(grid)[1] == [(D, "d"), (D, ""), (D, "")]
        assert grid[1, 2].origin == (1, 2)


class TestHtml:
    def test_simple_table(self):
        html = ('<table class="wikitable"><tr><th>IPA</th><th>Example</th></tr>'
                "<tr><td>m</td><td>mata</td></tr></table>")
        (grid,) = parse_html_tables(html)
        assert layout(grid) == [[(H, "IPA"), (H, "Example")], [(D, "m"), (D, "mata")]]

    def test_class_filter(self):
        assert parse_html_tables("<table><tr><td>x</td></tr></table>") == []
        assert len(parse_html_tables("<table><tr><td>x</td></tr></table>", table_class=None)) == 1

    def test_rowspan(self):
        html = ('<table class="wikitable"><tr><td rowspan="2">a</td><td>b</td></tr>'
                "<tr><td>c</td></tr></table>")
        (grid,) = parse_html_tables(html)
        assert grid.texts() == [["a", "b"], ["a", "c"]]
        assert grid[1, 0].origin == (0, 0)

    def test_caption_references_and_tbody(self):
        html = ('<table class="wikitable sortable"><caption>Vowels<sup class="reference">[2]</sup></caption>'
                '<tbody><tr><th>Letter</th></tr><tr><td>a<sup class="reference"><a>[1]</a></sup></td></tr>'
                "</tbody></table>")
        (grid,) = parse_html_tables(html)
        assert grid.caption == "Vowels"
        assert grid.texts() == [["Letter"], ["a"]]

    def test_empty_table_dropped_with_warning(self):
        warnings = []
        assert parse_html_tables('<table class="wikitable"></table>', warnings) == []
        assert warnings

    def test_tag_soup(self):
        html = '<table class="wikitable"><tr><th>a<th>b<tr><td>1<td>2</table>'
        (grid,) = parse_html_tables(html)
        assert grid.texts() == [["a", "b"], ["1", "2"]]

    def test_nested_table_flattens(self):
        html = ('<table class="wikitable"><tr><td>x<table><tr><td>in</td></tr></table></td>'
                "<td>y</td></tr></table>")
        (grid,) = parse_html_tables(html)
        assert grid.texts() == [["x in", "y"]]


class TestResolveSpans:
    def test_identity(self):
        grid = resolve_spans([[RawCell(D, "A")]])
        assert grid.cells == ((Cell(D, "A", (0, 0)),),)

    def test_colspan(self):
        grid = resolve_spans([[RawCell(D, "A", colspan=2)], [RawCell(D, "B"), RawCell(D, "C")]])
        assert grid.texts() == [["A", "A"], ["B", "C"]]

    def test_rowspan_clipped(self):
        grid = resolve_spans([[RawCell(D, "A", rowspan=3)]])
        assert grid.texts() == [["A"]]

    def test_conflict_earlier_cell_wins(self):
        # B's rowspan claims (1,1) before C's colspan reaches it.
        raw = [
            [RawCell(D, "A"), RawCell(D, "B", rowspan=2)],
            [RawCell(D, "C", colspan=2)],
        ]
        grid = resolve_spans(raw)
        assert grid.texts() == [["A", "B"], ["C", "B"]]

    def test_invalid_span_rejected(self):
        with pytest.raises(ValueError):
            RawCell(D, "x", rowspan=0)

    @settings(max_examples=300)
    @given(raw_tables())
    def test_matches_oracle(self, raw):
        grid = resolve_spans(raw)
        expected = span_oracle(raw)
        assert [[(c.kind, c.text, c.origin) for c in row] for row in grid.cells] == expected

    @settings(max_examples=300)
    @given(raw_tables())
    def test_rectangular_and_conserving(self, raw):
        grid = resolve_spans(raw)
        assert len({len(row) for row in grid.cells}) <= 1
        n_raw = sum(len(row) for row in raw)
        assert grid.n_rows * grid.n_cols >= n_raw or n_raw == 0
        origins = {c.origin: c for row in grid.cells for c in row}
        for row in grid.cells:
            for c in row:
                r0, c0 = c.origin
                assert grid[r0, c0] == c


class TestCleanCellText:
    @pytest.mark.parametrize("raw, expected", [
        ("[[International Phonetic Alphabet|IPA]]", "IPA"),
        ("plain", "plain"),
        ("{{IPA|/b/}}", "/b/"),
        ("[[Amarasi language]]", "Amarasi language"),
        ("[[:Category:Languages of Timor]]", "Category:Languages of Timor"),
        ("{{IPA-all|[[x|y]]}}", "y"),
        ("{{lang|ady|Аа}}", "Аа"),
        ("{{nowrap}}", ""),
        ("a<ref name=x>note</ref>b", "ab"),
        ('a<ref name="y" />', "a"),
        ("x{{efn|a footnote}}", "x"),
        ("line<br />break", "line break"),
        ("tab\there\nnewline", "tab here newline"),
        ("&lt;b&gt; &amp; &nbsp;x", "<b> & x"),
        ("''italic'' '''bold'''", "italic bold"),
        ("[https://example.org label]", "label"),
        ("[[File:Map.png|thumb|caption]]", ""),
        ("<!-- hidden -->shown", "shown"),
        ("{{IPA|/b/", "IPA /b/"),
        ("[[broken", "broken"),
        ("<span class=\"IPA\">/ŋ/</span>", "/ŋ/"),
    ])
    def test_cases(self, raw, expected):
        assert clean_cell_text(raw) == expected

    @given(raw_tables())
    def test_clean_output_has_no_delimiters(self, raw):
        for row in raw:
            for cell in row:
                s = clean_cell_text("[[" + cell.text + "|{{x|" + cell.text + "\t}}\n")
                assert "\t" not in s and "\n" not in s and "|" not in s
                assert "[[" not in s and "{{" not in s


EQUIVALENT_PAIRS = [
    (
        "{|\n! Letter !! [[International Phonetic Alphabet|IPA]]\n|-\n| a || {{IPA|/a/}}\n|}",
        '<table class="wikitable"><tr><th>Letter</th><th><a href="/wiki/IPA">IPA</a></th></tr>'
        '<tr><td>a</td><td><span class="IPA">/a/</span></td></tr></table>',
    ),
    (
        '{|\n|+ Consonants\n!\n! colspan="2" | Labial\n|-\n! Stop\n| p || b\n|}',
        '<table class="wikitable"><caption>Consonants</caption><tr><th></th><th colspan="2">Labial</th></tr>'
        "<tr><th>Stop</th><td>p</td><td>b</td></tr></table>",
    ),
    (
        '{|\n! rowspan="2" | Place !! Voiceless\n|-\n! Voiced\n|-\n| x || y\n|}',
        '<table class="wikitable"><tr><th rowspan="2">Place</th><th>Voiceless</th></tr>'
        "<tr><th>Voiced</th></tr><tr><td>x</td><td>y</td></tr></table>",
    ),
    (
        "{|\n| ''kaka''<ref>n</ref> || &amp;\n|}",
        '<table class="wikitable"><tr><td><i>kaka</i><sup class="reference">[1]</sup></td>'
        "<td>&amp;</td></tr></table>",
    ),
]


@pytest.mark.parametrize("wikitext, html", EQUIVALENT_PAIRS)
def test_parser_agreement(wikitext, html):
    (w,) = parse_wikitext_tables(wikitext)
    (h,) = parse_html_tables(html)
    assert w == h


def test_sniff_and_dispatch():
    assert sniff_format("{|\n| a\n|}") == "wikitext"
    assert sniff_format('<html><table class="wikitable"><tr><td>a</td></tr></table></html>') == "html"
    assert sniff_format("<!DOCTYPE html><p>no tables</p>") == "html"
    assert parse_tables("{|\n| a\n|}")[0].texts() == [["a"]]
    with pytest.raises(ValueError):
        parse_tables("x", fmt="pdf")


def test_grid_rejects_ragged_rows():
    with pytest.raises(ValueError):
        TableGrid(((Cell(D, "", (0, 0)),), ()))
