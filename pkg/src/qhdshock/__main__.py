import sys

from qhdshock.cli import main

sys.exit(main())
