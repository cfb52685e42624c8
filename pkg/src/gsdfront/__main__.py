import sys

from gsdfront.cli import main

sys.exit(main())
