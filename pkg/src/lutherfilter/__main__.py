import sys

from lutherfilter.cli import main

sys.exit(main())
