"""
Shared helpers for the rxnsharp unit tests.

Networks used across test modules are built here so the reference files
and the small toy systems stay identical everywhere.
"""

from rxnsharp.config import Data
from rxnsharp.netmodel import RateExpr
from rxnsharp.netmodel import Reaction
from rxnsharp.netmodel import ReactionNetwork
from rxnsharp.netparse import load_network


def gene_network() -> ReactionNetwork:
    """Shipped gene-expression network (K in [0, 50])."""
    return load_network(Data.network_path('gene'))


def schlogl_network() -> ReactionNetwork:
    """Shipped controlled Schlogl network (K in [0, 10])."""
    return load_network(Data.network_path('schlogl'))


def birth_death(a: float = 10.0, b: float = 1.0, k_range=(0.0, 0.0)) -> ReactionNetwork:
    """Immigration-death toy ``0 -> 1 @ a``, ``1 -> 0 @ b``; stationary law Poisson(a/b)."""
    return ReactionNetwork(
        name='birth_death',
        reactions=(Reaction(0, 1, RateExpr(a)), Reaction(1, -1, RateExpr(b))),
        k_range=k_range,
    )


def pure_birth(rate: float = 10.0) -> ReactionNetwork:
    """Single production reaction ``0 -> 1 @ rate``."""
    return ReactionNetwork(name='pure_birth', reactions=(Reaction(0, 1, RateExpr(rate)),))


def network_of(*reactions, k_range=(0.0, 0.0), k_default=0.0, initial_state=None,
               name='toy') -> ReactionNetwork:
    """
    Build a network from ``(s, product, base, slope)`` tuples.

    Examples
    --------
    >>> network_of((0, 1, 0.0, 1.0), (1, 0, 2.0, 0.0), k_range=(0, 5))
    """
    items = tuple(Reaction(s, t - s, RateExpr(base, slope)) for s, t, base, slope in reactions)
    return ReactionNetwork(name=name, reactions=items, k_range=k_range,
                           k_default=k_default, initial_state=initial_state)
