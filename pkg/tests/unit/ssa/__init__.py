"""
Unit tests for the `rxnsharp.ssa` module.

Usage
-----
Run pytest in the project root to execute these tests:
    $ pytest tests/unit/ssa
    or
    $ python -m pytest tests/unit/ssa
"""
