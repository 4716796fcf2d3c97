import sys

from microdss.cli import main

sys.exit(main())
