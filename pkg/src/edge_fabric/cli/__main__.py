import sys

from edge_fabric.cli.main import main

sys.exit(main())
