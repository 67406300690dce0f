"""
rxnsharp.deps
=============

Centralized registry for external utility APIs used by rxnsharp.

This module consolidates imports from `genericlib` into a single
namespace. By exposing functions and modules here, it provides a stable
API surface for the rest of the package and keeps the coupling to the
utility library in one place.

Notes
-----
- Utility imports from `genericlib` are aliased here rather than imported
  directly in consuming modules.
- Aliases follow the convention ``<package>_<ObjectName>`` to avoid naming
  conflicts and clarify origin.
- Numerical libraries (`numpy`, `scipy`) are imported directly where they
  are used.
"""

##############################
# GenericLib dependencies API
##############################

# Module imports
# File reading for `.rxn` sources and shell helpers for package metadata.
import genericlib.file as genericlib_file_module        # noqa
import genericlib.shell as genericlib_shell_module      # noqa

# Utility functions
# Process exit with message, framed console output and text dedenting.
from genericlib.misc import sys_exit as genericlib_sys_exit                                  # noqa
from genericlib.text import decorate_list_of_line as genericlib_decorate_list_of_line        # noqa
from genericlib.text import dedent_and_strip as genericlib_dedent_and_strip                  # noqa

# Versioning
# Provides version metadata for GenericLib.
from genericlib import version as genericlib_version    # noqa
