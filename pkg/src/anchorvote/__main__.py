import sys

from anchorvote.cli import main

sys.exit(main())
