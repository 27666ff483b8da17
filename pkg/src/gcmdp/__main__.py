"""Allow ``python -m gcmdp``."""

import sys

from gcmdp.cli.main import main

sys.exit(main())
