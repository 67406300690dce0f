"""
Unit tests for the `rxnsharp.sharpness` module.

Usage
-----
Run pytest in the project root to execute these tests:
    $ pytest tests/unit/sharpness
    or
    $ python -m pytest tests/unit/sharpness
"""
