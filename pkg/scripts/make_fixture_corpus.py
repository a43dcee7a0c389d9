#!/usr/bin/env python3
"""
Write the synthetic fixture corpus used by the end-to-end tests.

Usage:
    python scripts/make_fixture_corpus.py [output_dir] [subjects] [samples]
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent))

from texprint.fixtures import synthesize_corpus


def main():
    output_dir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("./fixtures/corpus")
    subjects = int(sys.argv[2]) if len(sys.argv) > 2 else 4
    samples = int(sys.argv[3]) if len(sys.argv) > 3 else 4

    paths = synthesize_corpus(output_dir, subjects=subjects, samples=samples)
    print(f"Wrote {len(paths)} images to {output_dir}")
    print(f"Run: texprint pipeline --root {output_dir} --out ./results")


if __name__ == "__main__":
    main()
