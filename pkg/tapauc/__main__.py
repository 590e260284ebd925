import sys

from tapauc.main import main

sys.exit(main())
