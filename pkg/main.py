"""
Convenience launcher: `python main.py <subcommand> ...` is `python -m skipsnn ...`.
"""
import sys

from skipsnn.cli.main import main

if __name__ == "__main__":
    sys.exit(main())
