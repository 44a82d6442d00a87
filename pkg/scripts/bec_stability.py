#!/usr/bin/env python3
"""
Run the bec-stability CLI from a checkout without installing the package.

Usage:
  python scripts/bec_stability.py critical --model local --a-s -0.005
  python scripts/bec_stability.py validate --out out/validation.json --log INFO
"""

from __future__ import annotations

import sys
from pathlib import Path

# Allow running without installing the package
sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from bec_stability.cli import main  # noqa: E402

if __name__ == "__main__":
    raise SystemExit(main())
