import sys

from qrecover.cli import main

sys.exit(main())
