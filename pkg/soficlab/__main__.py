import sys

from soficlab.main import main

sys.exit(main())
