import sys

# Check that we're not running on an unsupported Python version.
if sys.version_info < (3, 10):
    print("stadium_entropy requires Python 3.10 or above.")
    sys.exit(1)

__version__ = "1.0.0"
