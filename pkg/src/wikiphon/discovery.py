"""Find language pages, fetch them, and run extraction over the results.

Fetching goes through a small fetcher interface with two implementations:
:class:`LiveFetcher` (HTTP with a global rate limit and retry/backoff) and
:class:`FixtureFetcher` (a manifest mapping URLs to local files).
"""

from __future__ import annotations

import enum
import logging
import os
import re
import tempfile
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Optional, Protocol, Sequence, Union
from urllib.parse import unquote, urljoin, urlsplit

from .categorize import DEFAULT_KEYWORDS, KeywordTable
from .extract import LanguageDoc, extract_language
from .table_grid import parse_tables
from .tsv_io import CorpusStats, WriteReport, corpus_stats, write_corpus

log = logging.getLogger(__name__)

WIKI_BASE = "https://en.wikipedia.org/wiki/"
ISO_URL_PREFIX = WIKI_BASE + "ISO_639:"
DEFAULT_CATEGORY_URLS = (
    WIKI_BASE + "Category:Languages_by_country",
    WIKI_BASE + "Category:Language_phonologies",
)
DEFAULT_MAX_DEPTH = 3
DEFAULT_DELAY = 1.0
DEFAULT_USER_AGENT = "wikiphon/0.1 (pronunciation table miner; set WIKIPHON_USER_AGENT to add contact details)"
USER_AGENT_ENV = "WIKIPHON_USER_AGENT"
RETRY_STATUSES = (429, 503)

_ISO_RE = re.compile(r"^[a-z]{2,3}$")
_NON_ARTICLE_NS = {
    "file", "image", "template", "help", "wikipedia", "portal", "talk", "special",
    "user", "module", "draft", "mediawiki", "book", "timedtext",
}


class Origin(enum.Enum):
    CATEGORY_CRAWL = "category"
    ISO_LOOKUP = "iso"
    MANUAL = "manual"


@dataclass(frozen=True)
class PageRef:
    title: str
    url: str
    iso_hint: Optional[str] = None
    origin: Origin = Origin.MANUAL

    def __post_init__(self):
        if not urlsplit(self.url).scheme:
            raise ValueError(f"page url must be absolute: {self.url!r}")
        if self.origin is Origin.CATEGORY_CRAWL and self.iso_hint is not None:
            raise ValueError("category-crawled pages carry no ISO hint")
        if self.origin is Origin.ISO_LOOKUP and self.iso_hint is None:
            raise ValueError("ISO lookups must record the code")


@dataclass(frozen=True)
class Page:
    url: str
    body: str
    final_url: Optional[str] = None

    @property
    def resolved_url(self) -> str:
        return self.final_url or self.url


class FetchError(Exception):
    reason = "error"

    def __init__(self, url: str, detail: str = ""):
        super().__init__(f"{self.reason}: {url}" + (f" ({detail})" if detail else ""))
        self.url = url


class NotFound(FetchError):
    reason = "not-found"


class NetworkError(FetchError):
    reason = "network"


class RateLimited(FetchError):
    reason = "rate-limited"


class Fetcher(Protocol):
    def fetch(self, url: str) -> Page: ...


class Throttle:
    """Keeps consecutive calls to :meth:`wait` at least ``delay`` seconds apart.

    Shared across threads; the lock is held while sleeping so the limit is
    global rather than per worker.
    """

    def __init__(
        self,
        delay: float,
        clock: Optional[Callable[[], float]] = None,
        sleep: Optional[Callable[[float], None]] = None,
    ):
        self.delay = delay
        self.clock = clock or time.monotonic
        self.sleep = sleep or time.sleep
        self._last: Optional[float] = None
        self._lock = threading.Lock()

    def wait(self):
        with self._lock:
            if self._last is not None and self.delay > 0:
                remaining = self._last + self.delay - self.clock()
                if remaining > 0:
                    self.sleep(remaining)
            self._last = self.clock()


def title_from_url(url: str) -> str:
    path = urlsplit(url).path
    name = path.rsplit("/wiki/", 1)[-1] if "/wiki/" in path else path.rsplit("/", 1)[-1]
    return unquote(name).replace("_", " ")


_CANONICAL_RE = re.compile(
    r"<link\b[^>]*\brel=[\"']canonical[\"'][^>]*\bhref=[\"']([^\"']+)[\"']", re.I
)


def canonical_url(body: str) -> Optional[str]:
    m = _CANONICAL_RE.search(body[:20000])
    return m.group(1) if m else None


class LiveFetcher:
    """HTTP GET with a descriptive user agent, a global rate limit and backoff.

    Responses 429 and 503 are retried after ``backoff_base * 2**attempt``
    seconds (or ``Retry-After`` when larger), up to ``max_retries`` times.
    """

    def __init__(
        self,
        user_agent: Optional[str] = None,
        delay: float = DEFAULT_DELAY,
        max_retries: int = 3,
        backoff_base: float = 2.0,
        timeout: float = 30.0,
        session=None,
        clock: Optional[Callable[[], float]] = None,
        sleep: Optional[Callable[[float], None]] = None,
    ):
        import requests

        self.user_agent = user_agent or os.environ.get(USER_AGENT_ENV) or DEFAULT_USER_AGENT
        self.max_retries = max_retries
        self.backoff_base = backoff_base
        self.timeout = timeout
        self.session = session or requests.Session()
        self.throttle = Throttle(delay, clock, sleep)
        self._sleep = self.throttle.sleep
        self._request_error = requests.RequestException

    def _backoff(self, attempt: int, retry_after: Optional[str]) -> float:
        wait = self.backoff_base * 2 ** attempt
        if retry_after and retry_after.strip().isdigit():
            wait = max(wait, float(retry_after))
        return wait

    def fetch(self, url: str) -> Page:
        for attempt in range(self.max_retries + 1):
            self.throttle.wait()
            try:
                resp = self.session.get(
                    url, headers={"User-Agent": self.user_agent}, timeout=self.timeout
                )
            except self._request_error as exc:
                if attempt == self.max_retries:
                    raise NetworkError(url, str(exc)) from exc
                self._sleep(self._backoff(attempt, None))
                continue
            if resp.status_code == 404:
                raise NotFound(url)
            if resp.status_code in RETRY_STATUSES:
                if attempt == self.max_retries:
                    raise RateLimited(url, f"HTTP {resp.status_code}")
                log.info("HTTP %s for %s, backing off", resp.status_code, url)
                self._sleep(self._backoff(attempt, resp.headers.get("Retry-After")))
                continue
            if resp.status_code >= 400:
                raise NetworkError(url, f"HTTP {resp.status_code}")
            final = getattr(resp, "url", None) or url
            return Page(url, resp.text, canonical_url(resp.text) or final)
        raise RateLimited(url)  # pragma: no cover - loop always returns or raises


class FixtureFetcher:
    """Serves pages from disk according to a ``url<TAB>relative_path`` manifest.

    Paths are relative to the manifest's directory. An optional third column
    names the URL the request redirects to. URLs missing from the manifest
    are :class:`NotFound`.
    """

    def __init__(self, manifest: Union[str, Path]):
        self.manifest = Path(manifest)
        self.root = self.manifest.parent
        self.paths: dict[str, Path] = {}
        self.redirects: dict[str, str] = {}
        for lineno, line in enumerate(self.manifest.read_text(encoding="utf-8").splitlines(), 1):
            if not line.strip() or line.startswith("#"):
                continue
            parts = [p.strip() for p in line.split("\t")]
            if len(parts) < 2 or not parts[1]:
                raise ValueError(f"{self.manifest}:{lineno}: expected 'url<TAB>path[<TAB>final_url]'")
            self.paths[parts[0]] = self.root / parts[1]
            if len(parts) > 2 and parts[2]:
                self.redirects[parts[0]] = parts[2]
        self.requested: list[str] = []

    def fetch(self, url: str) -> Page:
        self.requested.append(url)
        path = self.paths.get(url)
        if path is None or not path.is_file():
            raise NotFound(url)
        try:
            body = path.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as exc:
            raise NetworkError(url, str(exc)) from exc
        return Page(url, body, self.redirects.get(url) or canonical_url(body))


class ThrottledFetcher:
    """Applies a :class:`Throttle` in front of another fetcher."""

    def __init__(self, inner: Fetcher, throttle: Throttle):
        self.inner = inner
        self.throttle = throttle

    def fetch(self, url: str) -> Page:
        self.throttle.wait()
        return self.inner.fetch(url)


# ---------------------------------------------------------------------------
# Discovery


@dataclass
class CategoryListing:
    subcategories: list[str] = field(default_factory=list)
    members: list[str] = field(default_factory=list)
    next_pages: list[str] = field(default_factory=list)


def _namespace(url: str) -> Optional[str]:
    title = title_from_url(url)
    if ":" in title:
        return title.split(":", 1)[0].strip().lower()
    return None


def parse_category_page(body: str, base_url: str) -> CategoryListing:
    """Links from a rendered category page.

    Reads the ``mw-subcategories`` and ``mw-pages`` sections when present,
    otherwise every link on the page; "next page" links are pagination.
    """
    from bs4 import BeautifulSoup

    soup = BeautifulSoup(body, "html.parser")
    sections = [s for s in (soup.find(id="mw-subcategories"), soup.find(id="mw-pages")) if s]
    listing = CategoryListing()
    seen = set()
    for section in sections or [soup]:
        for a in section.find_all("a", href=True):
            url = urljoin(base_url, a["href"]).split("#", 1)[0]
            if a.get_text(" ", strip=True).lower() == "next page":
                if url not in listing.next_pages:
                    listing.next_pages.append(url)
                continue
            if "/wiki/" not in urlsplit(url).path or urlsplit(url).query or url in seen:
                continue
            seen.add(url)
            ns = _namespace(url)
            if ns == "category":
                listing.subcategories.append(url)
            elif ns is None or (ns not in _NON_ARTICLE_NS and not ns.startswith("iso 639")):
                listing.members.append(url)
    return listing


@dataclass
class CategoryDiscovery:
    refs: list[PageRef] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)


def discover_from_categories(
    fetcher: Fetcher,
    category_urls: Sequence[str] = DEFAULT_CATEGORY_URLS,
    max_depth: int = DEFAULT_MAX_DEPTH,
) -> CategoryDiscovery:
    """Breadth-first walk of category pages collecting member articles."""
    result = CategoryDiscovery()
    queue = [(url, 0) for url in category_urls]
    visited, members = set(), set()
    while queue:
        url, depth = queue.pop(0)
        if url in visited:
            continue
        visited.add(url)
        try:
            page = fetcher.fetch(url)
        except FetchError as exc:
            result.warnings.append(f"category {url}: {exc}")
            continue
        listing = parse_category_page(page.body, page.resolved_url)
        for member in listing.members:
            if member not in members:
                members.add(member)
                result.refs.append(
                    PageRef(title_from_url(member), member, None, Origin.CATEGORY_CRAWL)
                )
        queue.extend((nxt, depth) for nxt in listing.next_pages)
        if depth < max_depth:
            queue.extend((sub, depth + 1) for sub in listing.subcategories)
    return result


@dataclass
class IsoDiscovery:
    refs: list[PageRef] = field(default_factory=list)
    skipped: list[tuple[str, str]] = field(default_factory=list)  # (code, reason)


def discover_from_iso(
    fetcher: Fetcher, iso_codes: Iterable[str], url_prefix: str = ISO_URL_PREFIX
) -> IsoDiscovery:
    """Probe ``ISO_639:<code>`` for each code; redirects resolve to the article."""
    result = IsoDiscovery()
    for raw in iso_codes:
        code = raw.strip().lower()
        if not _ISO_RE.match(code):
            result.skipped.append((raw, "invalid-code"))
            continue
        try:
            page = fetcher.fetch(url_prefix + code)
        except FetchError as exc:
            result.skipped.append((code, exc.reason))
            continue
        url = page.resolved_url
        result.refs.append(PageRef(title_from_url(url), url, code, Origin.ISO_LOOKUP))
    return result


def read_code_list(path: Union[str, Path]) -> list[str]:
    codes = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            codes.append(line)
    return codes


def read_iso_mapping(path: Union[str, Path]) -> dict[str, str]:
    """``title<TAB>code`` lines into a dict."""
    mapping = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        title, sep, code = line.partition("\t")
        if not sep or not code.strip():
            raise ValueError(f"{path}:{lineno}: expected 'title<TAB>code'")
        mapping[title.strip()] = code.strip().lower()
    return mapping


def resolve_iso(page: PageRef, mapping: Optional[dict[str, str]] = None) -> Optional[str]:
    if page.iso_hint:
        return page.iso_hint
    if not mapping:
        return None
    title = page.title.strip()
    code = mapping.get(title)
    if code is None and title.lower().endswith(" language"):
        code = mapping.get(title[: -len(" language")].strip())
    return code if code and _ISO_RE.match(code) else None


def merge_refs(*groups: Iterable[PageRef]) -> list[PageRef]:
    """Deduplicate by URL (keeping a ref that carries an ISO hint) and sort by URL."""
    by_url: dict[str, PageRef] = {}
    for group in groups:
        for ref in group:
            held = by_url.get(ref.url)
            if held is None or (held.iso_hint is None and ref.iso_hint is not None):
                by_url[ref.url] = ref
    return [by_url[u] for u in sorted(by_url)]


# ---------------------------------------------------------------------------
# Pipeline


class PipelineError(Exception):
    """Fatal configuration or output-directory problem."""


@dataclass
class PipelineReport:
    pages: int = 0
    pages_failed: int = 0
    tables: int = 0
    entries: int = 0
    warnings: list[str] = field(default_factory=list)
    skipped: list[tuple[str, str]] = field(default_factory=list)
    written: WriteReport = field(default_factory=WriteReport)
    stats: CorpusStats = field(default_factory=CorpusStats)

    def to_dict(self, out_dir: Optional[Path] = None) -> dict:
        def rel(p: Path) -> str:
            return p.name if out_dir is None else str(Path(p).relative_to(out_dir))

        return {
            "pages": self.pages,
            "pages_failed": self.pages_failed,
            "tables": self.tables,
            "entries": self.entries,
            "files": [rel(p) for p in self.written.files],
            "collisions": list(self.written.collisions),
            "write_errors": list(self.written.errors),
            "warnings": list(self.warnings),
            "skipped": [{"code": c, "reason": r} for c, r in self.skipped],
            "stats": {
                "n_languages": self.stats.n_languages,
                "n_with_phonemes": self.stats.n_with_phonemes,
                "n_with_g2p": self.stats.n_with_g2p,
                "n_unclassified_only": self.stats.n_unclassified_only,
                "n_parse_failures": self.stats.n_parse_failures,
            },
        }


def ensure_writable(out_dir: Union[str, Path]) -> Path:
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        with tempfile.NamedTemporaryFile(dir=out, prefix=".probe-"):
            pass
    except OSError as exc:
        raise PipelineError(f"output directory {out} is not writable: {exc}") from exc
    return out


def page_to_doc(
    ref: PageRef,
    page: Page,
    keywords: KeywordTable = DEFAULT_KEYWORDS,
    mapping: Optional[dict[str, str]] = None,
    fmt: str = "auto",
) -> LanguageDoc:
    parse_warnings: list[str] = []
    url = page.resolved_url
    grids = parse_tables(page.body, fmt, parse_warnings, url)
    doc = extract_language(ref.title, url, grids, keywords, resolve_iso(ref, mapping))
    doc.warnings[:0] = [f"{ref.title}: {w}" for w in parse_warnings]
    return doc


def run_pipeline(
    fetcher: Fetcher,
    refs: Iterable[PageRef],
    out_dir: Union[str, Path],
    keywords: KeywordTable = DEFAULT_KEYWORDS,
    mapping: Optional[dict[str, str]] = None,
    fmt: str = "auto",
    concurrency: int = 1,
) -> PipelineReport:
    """Fetch, parse and extract every ref, then write the corpus and its stats.

    Pages are processed in URL order. A failing page becomes a warning and
    never affects the others.
    """
    out = ensure_writable(out_dir)
    ordered = merge_refs(refs)
    report = PipelineReport()

    def fetch(ref: PageRef):
        try:
            return fetcher.fetch(ref.url)
        except FetchError as exc:
            return exc

    with ThreadPoolExecutor(max_workers=max(1, concurrency)) as pool:
        fetched = list(pool.map(fetch, ordered))

    docs = []
    for ref, page in zip(ordered, fetched):
        if isinstance(page, FetchError):
            report.pages_failed += 1
            report.warnings.append(f"{ref.title}: {page}")
            continue
        try:
            doc = page_to_doc(ref, page, keywords, mapping, fmt)
        except Exception as exc:  # one bad page must not abort the run
            log.exception("failed to process %s", ref.url)
            report.pages_failed += 1
            report.warnings.append(f"{ref.title}: {type(exc).__name__}: {exc}")
            continue
        report.pages += 1
        report.tables += doc.n_tables
        report.entries += len(doc.entries)
        report.warnings.extend(doc.warnings)
        docs.append(doc)
    report.written = write_corpus(docs, out)
    report.stats = corpus_stats(out)
    return report
