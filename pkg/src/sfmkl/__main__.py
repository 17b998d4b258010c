import sys

from sfmkl.cli import main

sys.exit(main())
