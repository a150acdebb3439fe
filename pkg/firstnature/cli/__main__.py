import sys

from firstnature.cli.main import main

sys.exit(main())
