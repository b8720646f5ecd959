import sys

from skipsnn.cli.main import main

sys.exit(main())
