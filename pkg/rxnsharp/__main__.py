"""
rxnsharp.__main__
=================

Command-line entry point for the `rxnsharp` package.

Usage
-----
Run the package directly:

    $ python -m rxnsharp analyze gene --K 0,25,50

Or, if installed as a script:

    $ rxnsharp simulate schlogl --K 10 --cells 2000
"""

from rxnsharp.main import execute

execute()
