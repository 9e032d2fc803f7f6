#!/usr/bin/env python3
"""
Select, generate and rank container implementations for a property specification
"""

import sys

from src.main import main


if __name__ == "__main__":
    sys.exit(main())
