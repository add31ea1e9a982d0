#!/usr/bin/env python3
"""Hidden-width sweep on the bundled dataset (generates it if missing)."""

import sys
from pathlib import Path

from dnsids.cli import main

DATASET = Path("runs/default/dataset.csv")

if __name__ == "__main__":
    if not DATASET.exists():
        rc = main(["simulate", "--out", "runs/default"])
        rc = rc or main(["features", "--traces", "runs/default/traces",
                         "--out", "runs/default"])
        if rc:
            sys.exit(rc)
    sys.exit(main(["sweep", "--dataset", str(DATASET), "--out", "runs/sweep"]))
