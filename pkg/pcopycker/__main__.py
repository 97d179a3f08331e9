#!/usr/bin/env python3

"""
Main entry point, ``python -m pcopycker <command>``
"""


import os.path
import sys

from pcopycker.main import main


if sys.argv[0].endswith("__main__.py"):
    # usage messages then show how the program was called
    sys.argv[0] = "{} -m pcopycker".format(os.path.basename(sys.executable))

main()
