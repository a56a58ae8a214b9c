"""Command-line entry point: ``wikiphon extract | crawl | stats``.

Exit status is 0 on success (warnings allowed) and 2 on fatal
configuration or I/O errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from .categorize import DEFAULT_KEYWORDS, KeywordTable
from .discovery import (
    DEFAULT_CATEGORY_URLS,
    DEFAULT_DELAY,
    DEFAULT_MAX_DEPTH,
    FixtureFetcher,
    LiveFetcher,
    Origin,
    PageRef,
    Page,
    PipelineError,
    Throttle,
    ThrottledFetcher,
    discover_from_categories,
    discover_from_iso,
    ensure_writable,
    merge_refs,
    page_to_doc,
    read_code_list,
    read_iso_mapping,
    run_pipeline,
    title_from_url,
)
from .tsv_io import corpus_stats, write_corpus

log = logging.getLogger("wikiphon")

EXIT_OK = 0
EXIT_FATAL = 2
PAGE_SUFFIXES = {".html", ".htm", ".wiki", ".wikitext", ".mediawiki", ".txt"}
SIDECAR_NAME = "manifest.tsv"
REPORT_NAME = "run_report.json"


class Fatal(Exception):
    pass


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--out", required=True, type=Path, help="output directory for TSVs and links.txt")
    p.add_argument(
        "--format", choices=("auto", "wikitext", "html"), default="auto",
        help="page format; auto sniffs for '{|' versus '<table' (default: auto)",
    )
    p.add_argument("--keywords", type=Path, help="keyword overrides, 'category<TAB>keyword' per line")
    p.add_argument("--iso-map", type=Path, help="title-to-ISO mapping, 'title<TAB>code' per line")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wikiphon",
        description="Mine pronunciation tables from Wikipedia language pages into TSV files.",
    )
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more logging (repeatable)")
    parser.add_argument("-q", "--quiet", action="store_true", help="only log errors")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND", help="extract, crawl or stats")

    ex = sub.add_parser("extract", help="extract tables from saved pages")
    ex.add_argument("--input", required=True, type=Path, help="a saved page or a directory of pages")
    ex.add_argument(
        "--manifest", type=Path,
        help=f"sidecar 'url<TAB>relative_path[<TAB>iso]' lines (default: {SIDECAR_NAME} in the input dir)",
    )
    _add_common(ex)

    cr = sub.add_parser("crawl", help="discover pages, fetch them and extract")
    _add_common(cr)
    cr.add_argument("--fixtures", type=Path, help="serve pages from a 'url<TAB>path' manifest instead of HTTP")
    cr.add_argument("--iso-list", type=Path, help="file of ISO 639 codes to probe, one per line")
    cr.add_argument("--category", action="append", default=[], metavar="URL", help="category page to walk (repeatable)")
    cr.add_argument(
        "--default-categories", action="store_true",
        help="walk Languages by country and Language phonologies",
    )
    cr.add_argument("--max-depth", type=int, default=DEFAULT_MAX_DEPTH, help="subcategory depth cap (default: 3)")
    cr.add_argument(
        "--rate-limit", type=int, metavar="MS",
        help=f"minimum milliseconds between requests (default: {int(DEFAULT_DELAY * 1000)} live, 0 with --fixtures)",
    )
    cr.add_argument("--concurrency", type=int, default=1, help="parallel page fetches (default: 1)")

    st = sub.add_parser("stats", help="corpus statistics over a directory of TSVs")
    st.add_argument("dir", type=Path, help="directory of TSV files")
    st.add_argument("--json", action="store_true", help="print one JSON object")
    return parser


def _keywords(path: Optional[Path]) -> KeywordTable:
    if path is None:
        return DEFAULT_KEYWORDS
    try:
        return KeywordTable.from_file(path)
    except (OSError, ValueError) as exc:
        raise Fatal(f"cannot read keywords: {exc}") from exc


def _mapping(path: Optional[Path]) -> Optional[dict]:
    if path is None:
        return None
    try:
        return read_iso_mapping(path)
    except (OSError, ValueError) as exc:
        raise Fatal(f"cannot read ISO mapping: {exc}") from exc


def _read_sidecar(path: Path) -> dict[Path, tuple[str, Optional[str]]]:
    """Map resolved file path -> (url, iso hint)."""
    entries = {}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split("\t")]
        if len(parts) < 2:
            raise Fatal(f"{path}:{lineno}: expected 'url<TAB>relative_path[<TAB>iso]'")
        iso = parts[2].lower() if len(parts) > 2 and parts[2] else None
        entries[(path.parent / parts[1]).resolve()] = (parts[0], iso)
    return entries


def cmd_extract(args) -> int:
    source: Path = args.input
    if source.is_dir():
        files = sorted(p for p in source.iterdir() if p.is_file() and p.suffix.lower() in PAGE_SUFFIXES)
    elif source.is_file():
        files = [source]
    else:
        raise Fatal(f"input not found: {source}")
    keywords, mapping = _keywords(args.keywords), _mapping(args.iso_map)
    sidecar_path = args.manifest
    if sidecar_path is None and source.is_dir() and (source / SIDECAR_NAME).is_file():
        sidecar_path = source / SIDECAR_NAME
    try:
        sidecar = _read_sidecar(sidecar_path) if sidecar_path else {}
    except OSError as exc:
        raise Fatal(f"cannot read manifest: {exc}") from exc
    out = ensure_writable(args.out)

    docs, warnings, n_tables = [], [], 0
    for path in files:
        url, iso = sidecar.get(path.resolve(), (path.resolve().as_uri(), None))
        title = title_from_url(url) if url in {u for u, _ in sidecar.values()} else path.stem.replace("_", " ")
        try:
            body = path.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as exc:
            warnings.append(f"{path.name}: unreadable page skipped ({exc})")
            continue
        ref = PageRef(title, url, iso, Origin.MANUAL)
        try:
            doc = page_to_doc(ref, Page(url, body), keywords, mapping, args.format)
        except Exception as exc:  # isolate per-page failures
            warnings.append(f"{path.name}: {type(exc).__name__}: {exc}")
            continue
        docs.append(doc)
        n_tables += doc.n_tables
        warnings.extend(doc.warnings)
    if not docs:
        for w in warnings:
            log.warning(w)
        raise Fatal(f"no pages processed from {source}")
    docs.sort(key=lambda d: d.source_url)
    written = write_corpus(docs, out)
    warnings.extend(written.collisions)
    for w in warnings:
        log.warning(w)
    print(
        f"pages: {len(docs)}  tables: {n_tables}  "
        f"entries: {sum(len(d.entries) for d in docs)}  warnings: {len(warnings)}"
    )
    if written.errors:
        for e in written.errors:
            log.error(e)
    return EXIT_OK


def cmd_crawl(args, parser: argparse.ArgumentParser) -> int:
    categories = list(args.category)
    if args.default_categories:
        categories.extend(u for u in DEFAULT_CATEGORY_URLS if u not in categories)
    if not categories and args.iso_list is None:
        parser.error("crawl needs --category, --default-categories or --iso-list")
    keywords, mapping = _keywords(args.keywords), _mapping(args.iso_map)
    try:
        codes = read_code_list(args.iso_list) if args.iso_list else []
    except OSError as exc:
        raise Fatal(f"cannot read ISO list: {exc}") from exc
    out = ensure_writable(args.out)

    if args.fixtures is not None:
        try:
            fetcher = FixtureFetcher(args.fixtures)
        except (OSError, ValueError) as exc:
            raise Fatal(f"cannot read fixture manifest: {exc}") from exc
        if args.rate_limit:
            fetcher = ThrottledFetcher(fetcher, Throttle(args.rate_limit / 1000))
    else:
        delay = DEFAULT_DELAY if args.rate_limit is None else args.rate_limit / 1000
        fetcher = LiveFetcher(delay=delay)

    found = discover_from_categories(fetcher, categories, args.max_depth) if categories else None
    iso = discover_from_iso(fetcher, codes) if codes else None
    refs = merge_refs(found.refs if found else [], iso.refs if iso else [])
    report = run_pipeline(
        fetcher, refs, out, keywords, mapping, args.format, concurrency=args.concurrency
    )
    if found:
        report.warnings[:0] = found.warnings
    if iso:
        report.skipped = list(iso.skipped)
    (out / REPORT_NAME).write_text(
        json.dumps(report.to_dict(out), indent=2, sort_keys=True, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
    for w in report.warnings:
        log.warning(w)
    print(
        f"pages: {report.pages}  failed: {report.pages_failed}  tables: {report.tables}  "
        f"entries: {report.entries}  skipped codes: {len(report.skipped)}"
    )
    return EXIT_OK


def cmd_stats(args) -> int:
    if not args.dir.is_dir():
        raise Fatal(f"not a directory: {args.dir}")
    stats = corpus_stats(args.dir)
    if args.json:
        print(json.dumps({
            "n_languages": stats.n_languages,
            "n_with_phonemes": stats.n_with_phonemes,
            "n_with_g2p": stats.n_with_g2p,
            "n_unclassified_only": stats.n_unclassified_only,
            "n_parse_failures": stats.n_parse_failures,
            "failed_files": list(stats.failed_files),
        }, sort_keys=True))
    else:
        rows = [
            ("languages", stats.n_languages),
            ("with phonemes", stats.n_with_phonemes),
            ("with G2P", stats.n_with_g2p),
            ("unclassified only", stats.n_unclassified_only),
            ("parse failures", stats.n_parse_failures),
        ]
        for label, value in rows:
            print(f"{label:<18} {value:>6}")
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.ERROR if args.quiet else (logging.WARNING, logging.INFO, logging.DEBUG)[min(args.verbose, 2)]
    logging.basicConfig(level=level, format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        if args.command == "extract":
            return cmd_extract(args)
        if args.command == "crawl":
            return cmd_crawl(args, parser)
        return cmd_stats(args)
    except (Fatal, PipelineError) as exc:
        print(f"wikiphon: error: {exc}", file=sys.stderr)
        return EXIT_FATAL


if __name__ == "__main__":
    sys.exit(main())
