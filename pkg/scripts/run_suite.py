#!/usr/bin/env python3
"""Run every experiment with default parameters and collect artifacts.

Usage: python scripts/run_suite.py [outdir]
"""

import sys

from stablepgf.cli import main

if __name__ == "__main__":
    outdir = sys.argv[1] if len(sys.argv) > 1 else "artifacts"
    sys.exit(main(["suite", "--out", outdir]))
