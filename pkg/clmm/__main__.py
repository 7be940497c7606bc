import sys

from clmm.cli import main

sys.exit(main())
