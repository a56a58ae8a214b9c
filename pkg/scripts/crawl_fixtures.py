"""Offline crawl over the fixture category pages and ISO list.

Runs discovery and the pipeline twice against the fixture fetcher, checks
that both output directories are byte-identical, and prints the run
report and corpus statistics.

    python3 scripts/crawl_fixtures.py [--out DIR] [--concurrency N]
"""

import argparse
import json
import sys
import tempfile
from pathlib import Path

from wikiphon.cli import main as wikiphon_main

ROOT = Path(__file__).resolve().parents[1]
CRAWL = ROOT / "tests" / "fixtures" / "crawl"


def crawl(out: Path, concurrency: int) -> int:
    return wikiphon_main([
        "-q", "crawl",
        "--fixtures", str(CRAWL / "manifest.tsv"),
        "--default-categories",
        "--iso-list", str(CRAWL / "codes.txt"),
        "--iso-map", str(CRAWL / "iso_map.tsv"),
        "--concurrency", str(concurrency),
        "--out", str(out),
    ])


def snapshot(directory: Path) -> dict:
    return {p.name: p.read_bytes() for p in sorted(directory.iterdir())}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="Offline fixture crawl")
    parser.add_argument("--out", type=Path, help="keep the first run's output here")
    parser.add_argument("--concurrency", type=int, default=2, help="parallel fetches (default: 2)")
    args = parser.parse_args(argv)

    with tempfile.TemporaryDirectory() as tmp:
        first = args.out or Path(tmp) / "first"
        second = Path(tmp) / "second"
        if crawl(first, args.concurrency) or crawl(second, 1):
            return 2
        same = snapshot(first) == snapshot(second)
        report = json.loads((first / "run_report.json").read_text(encoding="utf-8"))
        print(json.dumps({k: report[k] for k in ("pages", "pages_failed", "skipped", "stats")}, indent=2))
        print(f"runs byte-identical: {same}")
        return 0 if same else 1


if __name__ == "__main__":
    sys.exit(main())
