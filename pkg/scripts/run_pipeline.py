#!/usr/bin/env python3
"""Run the bundled end-to-end experiment into runs/default/."""

import sys

from dnsids.cli import main

if __name__ == "__main__":
    sys.exit(main(["pipeline", "--out", "runs/default"]))
