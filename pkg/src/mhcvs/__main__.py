import sys

from mhcvs.cli import main

sys.exit(main())
