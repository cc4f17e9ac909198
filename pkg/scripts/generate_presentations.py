"""Regenerate the built-in presentation files.

    python scripts/generate_presentations.py [--check]

With --check, exit non-zero if any shipped file differs from a fresh build.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from diffko.builtins import all_builtin_documents

TARGET = Path(__file__).resolve().parent.parent / "src" / "diffko" / "data" / "presentations"


def render(doc: dict) -> str:
    return json.dumps(doc, indent=1, sort_keys=False) + "\n"


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--check", action="store_true")
    args = parser.parse_args(argv)
    stale = []
    for name, doc in all_builtin_documents().items():
        path = TARGET / f"{name}.json"
        text = render(doc)
        if args.check:
            if not path.exists() or path.read_text() != text:
                stale.append(name)
        else:
            path.write_text(text)
    if stale:
        print("stale:", ", ".join(stale))
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
