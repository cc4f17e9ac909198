import sys
from diffko.cli import main

sys.exit(main())
