"""Re-extract the fixture pages and compare against (or overwrite) the golden TSVs.

    python3 scripts/regenerate_golden.py            # report differences only
    python3 scripts/regenerate_golden.py --write    # replace the golden files

Review every changed file by hand before committing a --write run.
"""

import argparse
import difflib
import shutil
import sys
import tempfile
from pathlib import Path

from wikiphon.cli import main as wikiphon_main

ROOT = Path(__file__).resolve().parents[1]
PAGES = ROOT / "tests" / "fixtures" / "pages"
GOLDEN = ROOT / "tests" / "fixtures" / "golden"


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--write", action="store_true", help="overwrite the golden directory")
    args = parser.parse_args(argv)

    with tempfile.TemporaryDirectory() as tmp:
        out = Path(tmp)
        if wikiphon_main(["-q", "extract", "--input", str(PAGES), "--out", str(out)]) != 0:
            return 2
        fresh = {p.name: p.read_text(encoding="utf-8") for p in out.iterdir()}
        old = {p.name: p.read_text(encoding="utf-8") for p in GOLDEN.iterdir()} if GOLDEN.is_dir() else {}
        changed = sorted(n for n in fresh.keys() | old.keys() if fresh.get(n) != old.get(n))
        for name in changed:
            diff = difflib.unified_diff(
                old.get(name, "").splitlines(keepends=True),
                fresh.get(name, "").splitlines(keepends=True),
                f"golden/{name}", f"fresh/{name}",
            )
            sys.stdout.writelines(diff)
        print(f"{len(fresh)} files, {len(changed)} differ from golden")
        if args.write and changed:
            shutil.rmtree(GOLDEN, ignore_errors=True)
            shutil.copytree(out, GOLDEN)
            print(f"wrote {GOLDEN}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
