#!/usr/bin/env python3
"""Generate the synthetic fixture corpora used by the offline test suite.

Usage:
    python scripts/build_fixture_corpus.py <out_root> [--which paper|blitz|midjourney|snow|all]

Each corpus lands in <out_root>/<name>/ with manifest.jsonl, images/ and
replies/ (canned model output keyed by image sha256), plus the consensus
score CSV for the assessment fixture.
"""

import argparse
from pathlib import Path

from screenintel.fixtures import (build_blitz_corpus, build_midjourney_corpus,
                                  build_paper_corpus, build_snow_corpus,
                                  write_table3_consensus_csv)

BUILDERS = {
    "paper": build_paper_corpus,
    "blitz": build_blitz_corpus,
    "midjourney": build_midjourney_corpus,
    "snow": build_snow_corpus,
}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("out_root", type=Path)
    ap.add_argument("--which", choices=[*BUILDERS, "all"], default="all")
    args = ap.parse_args()

    names = list(BUILDERS) if args.which == "all" else [args.which]
    for name in names:
        manifest = BUILDERS[name](args.out_root / name)
        print(f"{name}: {manifest}")
    if args.which in ("all", "paper"):
        csv_path = write_table3_consensus_csv(args.out_root / "consensus_scores.csv")
        print(f"consensus: {csv_path}")


if __name__ == "__main__":
    main()
