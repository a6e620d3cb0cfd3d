#!/usr/bin/env python3
"""Regenerate the bundled example inputs under fixtures/."""

import sys

from sedm.cli import main

if __name__ == "__main__":
    sys.exit(main(["fixtures", "--out-dir", "fixtures", "--seed", "7"]))
