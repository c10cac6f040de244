import sys

from udint.cli import main

sys.exit(main())
