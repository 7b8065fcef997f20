#!/usr/bin/env python3
import sys

try:
    from stadium_entropy import main

    # Run the command line front end
    sys.exit(main.main(sys.argv))
except ImportError as e:
    print("Unable to import stadium_entropy.main:", e)
    sys.exit(2)
