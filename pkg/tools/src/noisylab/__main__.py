import sys

from noisylab.cli import main

sys.exit(main())
