import sys

from rsspline.cli import main

sys.exit(main())
