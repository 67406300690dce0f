"""
Unit tests for the `rxnsharp.oracle` module.

Usage
-----
Run pytest in the project root to execute these tests:
    $ pytest tests/unit/oracle
    or
    $ python -m pytest tests/unit/oracle
"""
