"""
Unit tests for the `rxnsharp.netparse` module.

Usage
-----
Run pytest in the project root to execute these tests:
    $ pytest tests/unit/netparse
    or
    $ python -m pytest tests/unit/netparse
"""
