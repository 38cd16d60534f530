"""Development entry point; equivalent to `python -m soficlab`."""

import sys

from soficlab.main import main

if __name__ == "__main__":
    sys.exit(main())
