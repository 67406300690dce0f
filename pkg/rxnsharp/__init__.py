"""
rxnsharp.__init__
=================

Top-level module for the `rxnsharp` package.

This module exposes the reaction network model, the CFPE analysis of peak
sharpness, the stochastic simulator and the exact CME oracle under one
namespace.

Notes
-----
Keeping all primary exports in `__init__.py` simplifies imports and
ensures a consistent public API for end-users.
"""

from rxnsharp.netmodel import Convention
from rxnsharp.netmodel import RateExpr
from rxnsharp.netmodel import Reaction
from rxnsharp.netmodel import ReactionNetwork
from rxnsharp.netmodel import propensity
from rxnsharp.netmodel import rate_eval
from rxnsharp.netmodel import validate_network
from rxnsharp.netparse import load_network
from rxnsharp.netparse import parse_network
from rxnsharp.netparse import serialize_network
from rxnsharp.cfpe import build_diffusion
from rxnsharp.cfpe import build_drift
from rxnsharp.cfpe import find_extrema
from rxnsharp.cfpe import stationary_density
from rxnsharp.sharpness import check_theorem1
from rxnsharp.sharpness import g_profile
from rxnsharp.sharpness import lambda_profile
from rxnsharp.sharpness import perturb_analysis
from rxnsharp.sharpness import verify_monotonicity
from rxnsharp.ssa import ensemble_histogram
from rxnsharp.ssa import simulate_end_state
from rxnsharp.ssa import time_series
from rxnsharp.oracle import cme_stationary
from rxnsharp.oracle import cme_transient
from rxnsharp.oracle import compare_distributions
from rxnsharp.config import version
from rxnsharp.config import edition

__version__ = version
__edition__ = edition

__all__ = [
    'Convention',
    'RateExpr',
    'Reaction',
    'ReactionNetwork',
    'propensity',
    'rate_eval',
    'validate_network',
    'load_network',
    'parse_network',
    'serialize_network',
    'build_drift',
    'build_diffusion',
    'find_extrema',
    'stationary_density',
    'check_theorem1',
    'g_profile',
    'lambda_profile',
    'perturb_analysis',
    'verify_monotonicity',
    'ensemble_histogram',
    'simulate_end_state',
    'time_series',
    'cme_stationary',
    'cme_transient',
    'compare_distributions',
    'version',
    'edition',
]
