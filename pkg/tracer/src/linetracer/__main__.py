import sys

from .tracer import main

sys.exit(main())
