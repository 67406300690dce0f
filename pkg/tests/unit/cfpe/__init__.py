"""
Unit tests for the `rxnsharp.cfpe` module.

Usage
-----
Run pytest in the project root to execute these tests:
    $ pytest tests/unit/cfpe
    or
    $ python -m pytest tests/unit/cfpe
"""
