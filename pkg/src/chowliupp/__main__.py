import sys

from chowliupp.cli import main

sys.exit(main())
