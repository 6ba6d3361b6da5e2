#!/usr/bin/env python3
"""
Citation Network Analytics
==========================

Main entry point; equivalent to the ``citenet`` console script.
"""

import sys
from pathlib import Path

# Add the repository root to the Python path
sys.path.insert(0, str(Path(__file__).parent))

from src.app import main

if __name__ == "__main__":
    sys.exit(main())
