import sys

from pldnn.cli import main

sys.exit(main())
