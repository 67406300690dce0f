"""
rxnsharp.exceptions
===================

Custom exception classes for the rxnsharp library.

This module defines application-specific exceptions that provide clearer
error reporting across parsing, analysis, simulation, and the exact CME
oracle. By centralizing exception definitions, the library keeps error
handling consistent for both library callers and the command-line
interface.

Purpose
-------
- Provide meaningful exception types for parse, validation, analysis and
  oracle failures.
- Carry a machine-readable ``kind`` so reports and exit codes can be
  derived without string matching.

Notes
-----
- All custom exceptions inherit from `RxnSharpError` to allow consistent
  catching at a higher level.
- Truncation of the CME state space is advisory and is reported through
  `warnings.warn` with `TruncationWarning`, not raised.
"""


class RxnSharpError(Exception):
    """
    Base class for all errors raised by rxnsharp.

    Attributes
    ----------
    kind : str
        Short machine-readable category of the failure.
    """
    kind = 'error'


class ParseError(RxnSharpError):
    """
    Raised when a `.rxn` source cannot be turned into a valid network.

    Parameters
    ----------
    line : int
        1-based line number of the offending token.
    column : int
        1-based column of the offending token.
    message : str
        Human-readable description.
    kind : str
        One of ``syntax``, ``nonaffine_rate``, ``unknown_identifier``,
        ``range``.
    """
    kinds = ('syntax', 'nonaffine_rate', 'unknown_identifier', 'range')

    def __init__(self, line: int, column: int, message: str, kind: str = 'syntax'):
        if kind not in self.kinds:
            raise ValueError(f"unknown parse error kind {kind!r}")
        self.line = int(line)
        self.column = int(column)
        self.message = str(message)
        self.kind = kind
        super().__init__(f"line {self.line}, column {self.column}: {self.message}")


class NetworkValidationError(RxnSharpError):
    """
    Raised when a reaction network violates its structural invariants.

    Attributes
    ----------
    violations : list
        The validation report produced by `netmodel.validate_network`.
    """
    kind = 'validation'

    def __init__(self, violations):
        self.violations = list(violations)
        lines = '; '.join(str(v) for v in self.violations)
        super().__init__(f"invalid network: {lines}")


class KRangeError(RxnSharpError):
    """Raised when a control parameter value lies outside the declared range."""
    kind = 'range'


class AnalysisError(RxnSharpError):
    """
    Base class for failures of the CFPE and sharpness analyses.
    """
    kind = 'analysis'


class DiffusionNonpositiveError(AnalysisError):
    """Raised when B(x) <= 0 somewhere on the analysis grid."""
    kind = 'diffusion_nonpositive'


class TailMassError(AnalysisError):
    """Raised when no admissible x_max makes the boundary density negligible."""
    kind = 'tail_mass_error'


class DegenerateRootError(AnalysisError):
    """Raised when the drift touches zero tangentially, leaving modality ill-defined."""
    kind = 'degenerate_root'


class NoPeaksError(AnalysisError):
    """Raised when the stationary density has no peak on [0, x_max]."""
    kind = 'no_peaks'


class ZeroPeakDensityError(AnalysisError):
    """Raised when the density at a peak underflows to zero."""
    kind = 'zero_peak_density'


class LemmaViolationError(AnalysisError):
    """Raised when a check needs a K-free drift and the drift depends on K."""
    kind = 'lemma1_violated'


class OracleError(RxnSharpError):
    """Base class for failures of the exact CME solver."""
    kind = 'oracle'


class SingularSystemError(OracleError):
    """Raised when the truncated chain has more than one closed class."""
    kind = 'singular_system'


class TruncationWarning(UserWarning):
    """Emitted when the truncated CME keeps non-negligible mass at its boundary."""
    kind = 'truncation_warning'


class ConfigError(RxnSharpError):
    """Raised when command-line values or inline overrides cannot be resolved."""
    kind = 'config'
