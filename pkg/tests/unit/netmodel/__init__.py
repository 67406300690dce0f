"""
Unit tests for the `rxnsharp.netmodel` module.

Usage
-----
Run pytest in the project root to execute these tests:
    $ pytest tests/unit/netmodel
    or
    $ python -m pytest tests/unit/netmodel
"""
