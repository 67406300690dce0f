"""
Unit tests for the `rxnsharp.main` module.

Usage
-----
Run pytest in the project root to execute these tests:
    $ pytest tests/unit/main
    or
    $ python -m pytest tests/unit/main
"""
