#!/usr/bin/env python3
"""Render a sweep CSV as a figure; see `python3 plot.py --help`."""

import sys

from selfheal.plots import main

if __name__ == "__main__":
    sys.exit(main())
