import sys

from sketchlink.cli import main

sys.exit(main())
