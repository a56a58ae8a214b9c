import pytest
from hypothesis import given, settings

from wikiphon.categorize import EXAMPLE_WORD, GRAPHEME, PHONEME, TRANSCRIPTION, Category
from wikiphon.extract import (
    LanguageDoc,
    PronEntry,
    TableStructureError,
    extract_language,
    extract_table,
    extract_type_a,
    extract_type_b,
    header_path,
)
from wikiphon.structure import (
    Axis,
    HeaderLayout,
    ShapeKind,
    classify_shape,
    detect_repetition,
    find_header_bands,
    segment_bands,
)
from wikiphon.table_grid import CellKind, parse_html_tables, parse_wikitext_tables

from strategies import recognized_grids, repeated_grids

U = Category.unclassified
TOP = HeaderLayout((0,), ())


def wiki(text):
    (grid,) = parse_wikitext_tables(text)
    return grid


class TestTypeA:
    def test_grapheme_phoneme(self):
        g = wiki("{|\n! Letter !! IPA\n|-\n| b || /b/\n|}")
        assert extract_type_a(g, TOP, [GRAPHEME, PHONEME]) == [PronEntry(grapheme="b", phoneme="/b/")]

    def test_example_and_transcription(self):
        g = wiki("{|\n! Example !! Transcription\n|-\n| mata || [ˈma.ta]\n|}")
        assert extract_type_a(g, TOP, [EXAMPLE_WORD, TRANSCRIPTION]) == [
            PronEntry(example_word="mata", transcription="[ˈma.ta]")
        ]

    def test_unclassified_only(self):
        g = wiki("{|\n! Meaning !! x\n|-\n| water ||\n|}")
        assert extract_type_a(g, TOP, [U("Meaning"), U("x")]) == [
            PronEntry(unclassified=(("Meaning", "water"),))
        ]

    def test_empty_rows_skipped(self):
        g = wiki("{|\n! Letter !! IPA\n|-\n| ||\n|-\n| a || /a/\n|}")
        assert len(extract_type_a(g, TOP, [GRAPHEME, PHONEME])) == 1

    def test_collision_goes_to_unclassified(self):
        g = wiki("{|\n! IPA !! Pronunciation\n|-\n| /a/ || [a]\n|}")
        assert extract_type_a(g, TOP, [PHONEME, PHONEME]) == [
            PronEntry(phoneme="/a/", unclassified=(("Pronunciation", "[a]"),))
        ]

    def test_vertical(self):
        g = wiki("{|\n! Letter\n| a || e\n|-\n! IPA\n| /a/ || /e/\n|}")
        layout = HeaderLayout((), (0,))
        assert extract_type_a(g, layout, [GRAPHEME, PHONEME]) == [
            PronEntry(grapheme="a", phoneme="/a/"),
            PronEntry(grapheme="e", phoneme="/e/"),
        ]

    def test_multi_item_cells_verbatim(self):
        g = wiki("{|\n! Letter !! IPA\n|-\n| b bh || /b/ /bʱ/\n|}")
        assert extract_type_a(g, TOP, [GRAPHEME, PHONEME]) == [PronEntry(grapheme="b bh", phoneme="/b/ /bʱ/")]

    def test_length_mismatch(self):
        g = wiki("{|\n! Letter !! IPA\n|-\n| a || /a/\n|}")
        with pytest.raises(TableStructureError, match="1 categories for 2 data columns"):
            extract_type_a(g, TOP, [GRAPHEME])

    def test_colspan_copies_counted_once(self):
        g = wiki('{|\n! Meaning !! Notes\n|-\n| colspan="2" | both\n|}')
        assert extract_type_a(g, TOP, [U("Meaning"), U("Notes")]) == [
            PronEntry(unclassified=(("Meaning", "both"),))
        ]


ALEKANO = """{|
|+ Consonants
! !! Bilabial !! Alveolar
|-
! Nasal
| m || n
|-
! Plosive
| p b ||
|}"""


class TestTypeB:
    def test_features_and_tokens(self):
        g = wiki(ALEKANO)
        entries = extract_type_b(g, HeaderLayout((0,), (0,)), "consonant")
        assert entries == [
            PronEntry(phoneme="m", features=("Bilabial", "Nasal", "consonant")),
            PronEntry(phoneme="n", features=("Alveolar", "Nasal", "consonant")),
            PronEntry(phoneme="p", features=("Bilabial", "Plosive", "consonant")),
            PronEntry(phoneme="b", features=("Bilabial", "Plosive", "consonant")),
        ]

    def test_empty_cell_no_entry(self):
        g = wiki("{|\n! !! A\n|-\n! B\n|\n|}")
        assert extract_type_b(g, HeaderLayout((0,), (0,))) == []


MULTI = """{|
! rowspan="2" | !! colspan="2" | Stops !! Nasal
|-
! Voiced !! Voiceless !!
|-
! Labial
| b || p || m
|}"""


class TestHeaderPath:
    def test_multi_layer(self):
        g = wiki(MULTI)
        layout = find_header_bands(g)
        assert layout == HeaderLayout((0, 1), (0,))
        assert header_path(g, layout, 1) == ["Stops", "Voiced"]
        assert header_path(g, layout, 2) == ["Stops", "Voiceless"]
        assert header_path(g, layout, 3) == ["Nasal"]
        assert header_path(g, layout, 2, Axis.ROWS) == ["Labial"]

    def test_single_layer(self):
        g = wiki(ALEKANO)
        assert header_path(g, HeaderLayout((0,), (0,)), 1) == ["Bilabial"]

    def test_span_copy(self):
        g = wiki('{|\n! !! colspan="2" | Stops\n|-\n! x\n| p || b\n|}')
        layout = HeaderLayout((0,), (0,))
        assert header_path(g, layout, 1) == header_path(g, layout, 2) == ["Stops"]


class TestExtractLanguage:
    def test_g2p_page(self):
        g = wiki("{|\n! Amarasi Alphabet !! IPA\n|-\n| a || /a/\n|-\n| b || /b/\n|}")
        doc = extract_language("Amarasi language", "https://en.wikipedia.org/wiki/Amarasi_language", [g],
                               iso_code="aaz")
        assert [(e.grapheme, e.phoneme) for e in doc.entries] == [("a", "/a/"), ("b", "/b/")]
        assert doc.warnings == []

    def test_no_tables(self):
        doc = extract_language("X", "https://x", [])
        assert doc.entries == [] and doc.warnings == []

    def test_type_b_and_unrecognized(self):
        b = wiki(ALEKANO)
        unrec = wiki("{|\n|+ Words\n| padi || friend\n|-\n! Kin\n| pikin\n|}")
        doc = extract_language("X", "https://x", [b, unrec])
        assert len(doc.entries) == 4 + 2
        assert doc.entries[-2:] == [
            PronEntry(unclassified=(("Words", "padi"), ("Words", "friend"))),
            PronEntry(unclassified=(("Words", "pikin"),)),
        ]
        assert classify_shape(find_header_bands(unrec)).kind is ShapeKind.UNRECOGNIZED

    def test_repeated_rows(self):
        g = wiki("{|\n! a !! b\n|-\n| /a/ || /b/\n|-\n! c !! d\n|-\n| /c/ || /d/\n|}")
        doc = extract_language("X", "https://x", [g])
        assert [e.unclassified for e in doc.entries] == [
            (("a", "/a/"), ("b", "/b/")),
            (("c", "/c/"), ("d", "/d/")),
        ]

    def test_caption_feature_on_type_a(self):
        g = wiki("{|\n|+ Vowels\n! Letter !! IPA\n|-\n| a || /a/\n|}")
        assert extract_table(g) == [PronEntry("a", "/a/", ("vowel",))]

    def test_table_failure_becomes_warning(self, monkeypatch):
        import wikiphon.extract as ex

        good = wiki("{|\n! Letter !! IPA\n|-\n| a || /a/\n|}")
        calls = []

        def flaky(grid, keywords):
            calls.append(grid)
            if len(calls) == 1:
                raise TableStructureError("boom")
            return [PronEntry(grapheme="a")]

        monkeypatch.setattr(ex, "extract_table", flaky)
        doc = ex.extract_language("Page", "https://x", [good, good])
        assert doc.entries == [PronEntry(grapheme="a")]
        assert doc.warnings == ["Page: table 0: boom"]

    def test_iso_code_validated(self):
        with pytest.raises(ValueError):
            LanguageDoc("X", "https://x", "ISO-1")
        LanguageDoc("Albanian", "https://x", "sq")


def test_pron_entry_invariants():
    with pytest.raises(ValueError):
        PronEntry(features=("a", "a"))
    with pytest.raises(ValueError):
        PronEntry(features=("",))
    assert PronEntry().is_empty()


def data_tokens(grid):
    """Brute-force walk: tokens of every data cell outside the header bands."""
    layout = find_header_bands(grid)
    shape = classify_shape(layout)
    out = []
    for r, row in enumerate(grid.cells):
        for c, cell in enumerate(row):
            if cell.kind is not CellKind.DATA or not cell.text:
                continue
            if shape.kind is not ShapeKind.UNRECOGNIZED and (r in layout.header_rows or c in layout.header_cols):
                continue
            out.append(cell.text.split())
    return out


def doc_tokens(doc):
    found = set()
    for e in doc.entries:
        for v in (e.grapheme, e.phoneme, e.example_word, e.transcription, *e.features,
                  *(val for _, val in e.unclassified)):
            if v:
                found.update(v.split())
    return found


@settings(max_examples=200)
@given(recognized_grids())
def test_no_data_loss(grid):
    doc = extract_language("X", "https://x", [grid])
    found = doc_tokens(doc)
    for tokens in data_tokens(grid):
        assert set(tokens) <= found


@settings(max_examples=200)
@given(recognized_grids())
def test_entry_counts(grid):
    layout = find_header_bands(grid)
    shape = classify_shape(layout)
    if detect_repetition(layout, grid) is not None:
        return
    entries = extract_table(grid)
    if shape.kind is ShapeKind.TYPE_B:
        expected = sum(len(grid[r, c].text.split()) for r in layout.data_rows(grid) for c in layout.data_cols(grid))
        assert len(entries) == expected
        for e in entries:
            assert e.features[-1] in ("vowel", "consonant") or grid.caption in (None, "Orthography")
    elif shape.kind is ShapeKind.TYPE_A and shape.orientation.value == "horizontal":
        expected = sum(any(grid[r, c].text for c in range(grid.n_cols)) for r in layout.data_rows(grid))
        assert len(entries) == expected


@settings(max_examples=200)
@given(repeated_grids())
def test_segmentation_equivalence(grid):
    pattern = detect_repetition(find_header_bands(grid), grid)
    whole = extract_table(grid)
    if pattern is None:
        return
    pieces = [e for seg in segment_bands(grid, pattern) for e in extract_table(seg)]
    assert whole == pieces


def test_feature_order_is_column_then_row_then_caption():
    html = ('<table class="wikitable"><caption>Vowels</caption>'
            "<tr><th></th><th>Front</th></tr><tr><th>Close</th><td>i</td></tr></table>")
    (g,) = parse_html_tables(html)
    assert extract_table(g) == [PronEntry(phoneme="i", features=("Front", "Close", "vowel"))]
