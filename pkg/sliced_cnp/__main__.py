"""Allow running the command line tool as ``python -m sliced_cnp``."""

import sys

from .cli import main

if __name__ == "__main__":
    sys.exit(main())
