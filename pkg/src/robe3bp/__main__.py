"""Allow ``python -m robe3bp``."""

import sys

from .cli import main

sys.exit(main())
