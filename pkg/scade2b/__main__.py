import sys

from scade2b.cli import main


if __name__ == "__main__":
    sys.exit(main())
