"""Allow ``python -m mapf_lab`` as an alias for the ``mapf-lab`` script."""

import sys

from .cli import main

if __name__ == "__main__":
    sys.exit(main())
