import sys

from fraccal.cli import main

sys.exit(main())
