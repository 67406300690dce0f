"""
Unit tests for the `rxnsharp.report` module.

Usage
-----
Run pytest in the project root to execute these tests:
    $ pytest tests/unit/report
    or
    $ python -m pytest tests/unit/report
"""
