import sys

from tailsep.cli import main

sys.exit(main())
