#!/usr/bin/env python3
"""End-to-end demo on the bundled 200-post fixture corpus.

Runs the whole pipeline with the deterministic stub scorer into ./demo_out/
and prints the association summary. Useful as a smoke test and as a worked
example of the CLI surface.
"""

import sys
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))

from stereokg.cli import main  # noqa: E402

if __name__ == "__main__":
    out_dir = REPO / "demo_out"
    code = main([
        "run-all",
        "--backend", "stub",
        "--in", str(REPO / "tests" / "data" / "posts_200.jsonl"),
        "--out-dir", str(out_dir),
    ])
    if code == 0:
        code = main([
            "analyze", "pmi",
            "--in", str(out_dir / "kg.jsonl"),
            "--out", str(out_dir / "association.tsv"),
        ])
    sys.exit(code)
