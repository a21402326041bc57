#!/usr/bin/env python
"""Run OptionZero commands (train, eval, analyze, oracle-check)."""

import sys
from pathlib import Path

# Add the repository root to path
sys.path.insert(0, str(Path(__file__).parent))

from src.cli import main

if __name__ == "__main__":
    sys.exit(main())
