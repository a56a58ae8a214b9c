"""TSV serialization of mined entries, the links manifest, and corpus statistics.

File layout: a header line, then one line per entry with six tab-separated
columns. Absent fields hold the literal ``(n/a)``. Inside a column,
features are joined with ``", "`` and unclassified pairs are written as
``header=value`` joined with ``"; "``. Values that themselves contain
those separators do not survive a round trip.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Iterable, Optional, Union

from .extract import LanguageDoc, PronEntry

log = logging.getLogger(__name__)

NA = "(n/a)"
COLUMNS = ("grapheme", "phoneme", "features", "example_word", "transcription", "unclassified")
HEADER_LINE = "\t".join(COLUMNS)
FEATURE_SEP = ", "
PAIR_SEP = "; "
LINKS_FILE = "links.txt"


class TsvParseError(ValueError):
    def __init__(self, message: str, line: int, path: Optional[Path] = None):
        where = f"{path}:" if path else "line "
        super().__init__(f"{where}{line}: {message}")
        self.line = line
        self.path = path


class TsvInvariantError(AssertionError):
    """An entry value still contains a tab or newline after cleaning."""


@dataclass(frozen=True)
class TsvRow:
    grapheme: Optional[str] = None
    phoneme: Optional[str] = None
    features: Optional[str] = None
    example_word: Optional[str] = None
    transcription: Optional[str] = None
    unclassified: Optional[str] = None

    @classmethod
    def from_entry(cls, entry: PronEntry) -> "TsvRow":
        return cls(
            entry.grapheme or None,
            entry.phoneme or None,
            FEATURE_SEP.join(entry.features) or None,
            entry.example_word or None,
            entry.transcription or None,
            PAIR_SEP.join(f"{h}={v}" for h, v in entry.unclassified) or None,
        )

    def to_entry(self) -> PronEntry:
        features = tuple(self.features.split(FEATURE_SEP)) if self.features else ()
        pairs = []
        if self.unclassified:
            for item in self.unclassified.split(PAIR_SEP):
                header, _, value = item.partition("=")
                pairs.append((header, value))
        return PronEntry(
            self.grapheme, self.phoneme, features, self.example_word, self.transcription, tuple(pairs)
        )

    def values(self) -> tuple[Optional[str], ...]:
        return tuple(getattr(self, f.name) for f in fields(self))

    def only_unclassified(self) -> bool:
        return self.unclassified is not None and all(v is None for v in self.values()[:-1])


def _check(value: str) -> str:
    if "\t" in value or "\n" in value or "\r" in value:
        raise TsvInvariantError(f"field contains a tab or newline: {value!r}")
    return value


def format_row(row: TsvRow) -> str:
    return "\t".join(NA if v is None else _check(v) for v in row.values())


def emit_tsv(doc: LanguageDoc) -> str:
    lines = [HEADER_LINE]
    lines.extend(format_row(TsvRow.from_entry(e)) for e in doc.entries)
    return "\n".join(lines) + "\n"


def parse_tsv(text: str, path: Optional[Path] = None) -> list[TsvRow]:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0] != HEADER_LINE:
        raise TsvParseError("missing header line", 1, path)
    rows = []
    for lineno, line in enumerate(lines[1:], 2):
        parts = line.split("\t")
        if len(parts) != len(COLUMNS):
            raise TsvParseError(f"expected {len(COLUMNS)} columns, found {len(parts)}", lineno, path)
        rows.append(TsvRow(*(None if p == NA else p for p in parts)))
    return rows


# ---------------------------------------------------------------------------
# Corpus files


@dataclass
class WriteReport:
    files: list[Path] = field(default_factory=list)
    collisions: list[str] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)


def sanitize_title(title: str) -> str:
    name = re.sub(r"[^\w.-]+", "_", title.strip(), flags=re.UNICODE).strip("._")
    return name or "untitled"


def write_corpus(docs: Iterable[LanguageDoc], out_dir: Union[str, Path]) -> WriteReport:
    """Write ``<iso>.tsv`` (or ``<title>.tsv``) per doc plus a global ``links.txt``.

    Docs are written in the order given; a name already used in this call
    gets ``-2``, ``-3``, ... appended.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    report = WriteReport()
    used: set[str] = set()
    urls = set()
    for doc in docs:
        urls.add(doc.source_url)
        stem = doc.iso_code or sanitize_title(doc.page_title)
        name, n = stem, 1
        while name.lower() in used:
            n += 1
            name = f"{stem}-{n}"
        if n > 1:
            report.collisions.append(f"{doc.source_url}: {stem}.tsv taken, wrote {name}.tsv")
        used.add(name.lower())
        path = out / f"{name}.tsv"
        try:
            path.write_text(emit_tsv(doc), encoding="utf-8", newline="\n")
        except (OSError, TsvInvariantError) as exc:
            report.errors.append(f"{path}: {exc}")
            log.error("failed to write %s: %s", path, exc)
            continue
        report.files.append(path)
    links = out / LINKS_FILE
    try:
        links.write_text("".join(f"{u}\n" for u in sorted(urls)), encoding="utf-8", newline="\n")
        report.files.append(links)
    except OSError as exc:
        report.errors.append(f"{links}: {exc}")
    return report


@dataclass(frozen=True)
class CorpusStats:
    n_languages: int = 0
    n_with_phonemes: int = 0
    n_with_g2p: int = 0
    n_unclassified_only: int = 0
    n_parse_failures: int = 0
    failed_files: tuple[str, ...] = ()

    def counts(self) -> tuple[int, int, int, int]:
        return (self.n_languages, self.n_with_phonemes, self.n_with_g2p, self.n_unclassified_only)


def stats_from_rows(per_language: Iterable[list[TsvRow]]) -> CorpusStats:
    n = phon = g2p = unc = 0
    for rows in per_language:
        n += 1
        phon += any(r.phoneme is not None for r in rows)
        g2p += any(r.phoneme is not None and r.grapheme is not None for r in rows)
        unc += bool(rows) and all(r.only_unclassified() for r in rows)
    return CorpusStats(n, phon, g2p, unc)


def corpus_stats(directory: Union[str, Path]) -> CorpusStats:
    """Language counts over every ``*.tsv`` in ``directory``.

    A language with no rows counts toward ``n_languages`` only. Files that
    fail to parse are excluded and listed in ``failed_files``.
    """
    parsed, failed = [], []
    for path in sorted(Path(directory).glob("*.tsv")):
        try:
            parsed.append(parse_tsv(path.read_text(encoding="utf-8"), path))
        except (TsvParseError, UnicodeDecodeError, OSError) as exc:
            log.warning("skipping %s: %s", path, exc)
            failed.append(path.name)
    stats = stats_from_rows(parsed)
    return CorpusStats(*stats.counts(), len(failed), tuple(failed))
