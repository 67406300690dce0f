"""
rxnsharp.netmodel
=================

Domain types for univariate stochastic reaction networks.

A network is a list of reactions ``s X -> (s + r) X`` whose rate constants
are affine in a single control parameter ``K``. Propensities are available
under two conventions:

- ``exact``: the combinatorial (falling factorial) form
  ``k / s! * x (x - 1) ... (x - s + 1)``, which defines the chemical master
  equation and drives the stochastic simulator.
- ``continuous``: the power-law form ``k * x**s / s!`` used by the
  continuous-state (Fokker-Planck) analysis.

Notes
-----
- All types are frozen dataclasses and can be shared between workers.
- Reaction indices are 0-based everywhere in the package.
"""

from dataclasses import dataclass
from dataclasses import field
from dataclasses import replace
from enum import Enum
from math import factorial
from typing import Optional

import numpy as np
from numpy.polynomial import polynomial as P

from rxnsharp.exceptions import KRangeError
from rxnsharp.exceptions import NetworkValidationError

# Slack for K values produced by linspace at the ends of the declared range.
K_SLACK = 1e-12


class Convention(str, Enum):
    """Propensity convention: falling factorial or power law."""
    EXACT = 'exact'
    CONTINUOUS = 'continuous'

    @classmethod
    def coerce(cls, value) -> 'Convention':
        """Accept a `Convention` or its string value."""
        if isinstance(value, cls):
            return value
        return cls(str(value).lower())


@dataclass(frozen=True)
class RateExpr:
    """
    Rate constant affine in the control parameter: ``base + slope * K``.

    Attributes
    ----------
    base : float
        Value at K = 0.
    slope : float
        Coefficient of K.
    k_range : tuple of float or None
        Control range of the owning network, stamped when the expression
        is placed in a `ReactionNetwork`. Ignored by equality.
    """
    base: float
    slope: float = 0.0
    k_range: Optional[tuple] = field(default=None, compare=False, repr=False)

    def evaluate(self, k: float) -> float:
        """Return ``base + slope * k`` without range checking."""
        return self.base + self.slope * k

    @property
    def depends_on_k(self) -> bool:
        return self.slope != 0.0


@dataclass(frozen=True)
class Reaction:
    """
    One reaction ``s X -> (s + r) X`` with rate ``rate``.

    Attributes
    ----------
    s : int
        Reactant copy count.
    r : int
        Net change of the copy number, nonzero.
    rate : RateExpr
        Rate constant as a function of K.
    """
    s: int
    r: int
    rate: RateExpr

    @property
    def product(self) -> int:
        return self.s + self.r

    def __str__(self):
        return f"{self.s} -> {self.product} @ {self.rate.base:g}{self.rate.slope:+g}*K"


@dataclass(frozen=True)
class ReactionNetwork:
    """
    A univariate reaction network with one control parameter.

    Attributes
    ----------
    name : str
        Network name, used for default protocols and file names.
    reactions : tuple of Reaction
        Reactions in declaration order.
    k_range : tuple of float
        Closed interval ``(K_lo, K_hi)`` of admissible control values.
    k_default : float
        Control value used when none is requested.
    params : tuple of (str, float)
        Named constants the rate expressions were built from, sorted by name.
    initial_state : int or None
        Declared initial copy number, if any.
    """
    name: str
    reactions: tuple
    k_range: tuple = (0.0, 0.0)
    k_default: float = 0.0
    params: tuple = field(default=())
    initial_state: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, 'reactions', tuple(self.reactions))
        object.__setattr__(self, 'k_range', (float(self.k_range[0]), float(self.k_range[1])))
        object.__setattr__(self, 'k_default', float(self.k_default))
        object.__setattr__(self, 'params', tuple(sorted((str(n), float(v)) for n, v in self.params)))
        stamped = tuple(replace(rxn, rate=replace(rxn.rate, k_range=self.k_range)) for rxn in self.reactions)
        object.__setattr__(self, 'reactions', stamped)

    @property
    def param_map(self) -> dict:
        return dict(self.params)

    @property
    def size(self) -> int:
        return len(self.reactions)

    @property
    def s_vector(self) -> np.ndarray:
        return np.array([rxn.s for rxn in self.reactions], dtype=np.int64)

    @property
    def r_vector(self) -> np.ndarray:
        return np.array([rxn.r for rxn in self.reactions], dtype=np.int64)

    def contains_k(self, k: float) -> bool:
        lo, hi = self.k_range
        return lo - K_SLACK <= k <= hi + K_SLACK

    def check_k(self, k: float) -> float:
        """
        Return ``k`` as float, raising `KRangeError` when it lies outside
        the declared control range.
        """
        k = float(k)
        if not self.contains_k(k):
            lo, hi = self.k_range
            raise KRangeError(f"K={k:g} outside declared range [{lo:g}, {hi:g}] of network {self.name!r}")
        return k

    def rate_vector(self, k: float) -> np.ndarray:
        """Rate constants ``k_i(K)`` of all reactions at a checked K."""
        k = self.check_k(k)
        return np.array([rxn.rate.evaluate(k) for rxn in self.reactions], dtype=float)

    def with_perturbations(self, perturbations: dict) -> 'ReactionNetwork':
        """
        Return a copy with base rates shifted per reaction index.

        Parameters
        ----------
        perturbations : dict
            Mapping of 0-based reaction index to the amount added to the
            base rate.

        Raises
        ------
        IndexError
            If an index does not name a reaction.
        """
        reactions = list(self.reactions)
        for index, amount in perturbations.items():
            index = int(index)
            if not 0 <= index < len(reactions):
                raise IndexError(f"reaction index {index} out of range 0..{len(reactions) - 1}")
            rxn = reactions[index]
            rate = RateExpr(rxn.rate.base + float(amount), rxn.rate.slope)
            reactions[index] = replace(rxn, rate=rate)
        return replace(self, reactions=tuple(reactions))

    def require_valid(self) -> 'ReactionNetwork':
        """Return self, or raise `NetworkValidationError` with the report."""
        report = validate_network(self)
        if report:
            raise NetworkValidationError(report)
        return self


@dataclass(frozen=True)
class Violation:
    """
    One broken network invariant.

    Attributes
    ----------
    rule : str
        Identifier of the violated rule, e.g. ``"r >= -s"``.
    message : str
        Details, e.g. ``"rate negative at K=60"``.
    reaction_index : int or None
        0-based index of the offending reaction, when applicable.
    """
    rule: str
    message: str
    reaction_index: Optional[int] = None

    def __str__(self):
        where = '' if self.reaction_index is None else f"reaction {self.reaction_index}: "
        return f"{where}{self.rule} ({self.message})"


def rate_eval(expr: RateExpr, k: float, k_range: Optional[tuple] = None) -> float:
    """
    Evaluate a rate expression at a control value.

    Parameters
    ----------
    expr : RateExpr
        The rate expression.
    k : float
        Control parameter value.
    k_range : tuple of float, optional
        Range to check K against. Defaults to the range stamped on
        `expr` by its network; bare expressions are not checked.

    Returns
    -------
    float
        ``expr.base + expr.slope * k``.

    Raises
    ------
    KRangeError
        If a range applies and `k` lies outside it.
    """
    k = float(k)
    if k_range is None:
        k_range = expr.k_range
    if k_range is not None:
        lo, hi = k_range
        if not lo - K_SLACK <= k <= hi + K_SLACK:
            raise KRangeError(f"K={k:g} outside declared range [{lo:g}, {hi:g}]")
    return expr.evaluate(k)


def propensity_polynomial(s: int, convention=Convention.EXACT) -> np.ndarray:
    """
    Ascending coefficients of the state factor of a propensity.

    Returns the coefficients of ``x (x-1) ... (x-s+1) / s!`` for the exact
    convention and of ``x**s / s!`` for the continuous convention.
    """
    convention = Convention.coerce(convention)
    if convention is Convention.EXACT:
        coeffs = P.polyfromroots(np.arange(s, dtype=float)) if s else np.array([1.0])
    else:
        coeffs = np.zeros(s + 1)
        coeffs[s] = 1.0
    return coeffs / factorial(s)


def propensity(rxn: Reaction, x: int, k: float, convention=Convention.EXACT,
               k_range: Optional[tuple] = None) -> float:
    """
    Propensity of one reaction at state ``x``.

    Parameters
    ----------
    rxn : Reaction
        The reaction.
    x : int
        Nonnegative copy number.
    k : float
        Control parameter value.
    convention : Convention or str, default "exact"
        ``exact`` for the falling factorial, ``continuous`` for the power law.
    k_range : tuple of float, optional
        Declared control range to check `k` against; defaults to the
        range of the network owning `rxn`.

    Returns
    -------
    float
        The propensity; zero under the exact convention when ``x < s``.
    """
    convention = Convention.coerce(convention)
    rate = rate_eval(rxn.rate, k, k_range)
    if convention is Convention.EXACT:
        if x < rxn.s:
            return 0.0
        value = 1.0
        for i in range(rxn.s):
            value *= (x - i)
        return rate * value / factorial(rxn.s)
    return rate * float(x) ** rxn.s / factorial(rxn.s)


def propensity_vector(net: ReactionNetwork, states, k: float) -> np.ndarray:
    """
    Exact propensities of every reaction for an array of states.

    Parameters
    ----------
    net : ReactionNetwork
        The network.
    states : array_like of int
        Copy numbers, any shape ``S``.
    k : float
        Control parameter value.

    Returns
    -------
    numpy.ndarray
        Array of shape ``S + (n_reactions,)``.
    """
    x = np.asarray(states, dtype=float)
    coef = net.rate_vector(k) / np.array([factorial(rxn.s) for rxn in net.reactions], dtype=float)
    out = np.empty(x.shape + (net.size,), dtype=float)
    cache = {}
    for j, rxn in enumerate(net.reactions):
        if rxn.s not in cache:
            value = np.ones_like(x)
            for i in range(rxn.s):
                value = value * np.maximum(x - i, 0.0)
            cache[rxn.s] = value
        out[..., j] = coef[j] * cache[rxn.s]
    return out


def validate_network(net: ReactionNetwork) -> list:
    """
    Check the structural invariants of a network.

    Rules
    -----
    - ``reactions``: at least one reaction.
    - ``s >= 0``: reactant counts are nonnegative.
    - ``r != 0``: every reaction changes the copy number.
    - ``r >= -s``: no firing can produce a negative count.
    - ``rate nonnegative``: every rate is nonnegative over the K range.
    - ``k range``: ``K_lo <= K_hi`` and the default lies inside.
    - ``state 0 absorbing``: some reaction produces from zero, or an
      initial state is declared.

    Returns
    -------
    list of Violation
        Empty when the network is valid.
    """
    report = []
    lo, hi = net.k_range
    if not net.reactions:
        report.append(Violation('reactions', 'network has no reactions'))
    if lo > hi:
        report.append(Violation('k range', f'lower bound {lo:g} exceeds upper bound {hi:g}'))
    elif not lo <= net.k_default <= hi:
        report.append(Violation('k range', f'default K={net.k_default:g} outside [{lo:g}, {hi:g}]'))
    if net.initial_state is not None and net.initial_state < 0:
        report.append(Violation('initial state', f'initial state {net.initial_state} is negative'))

    for index, rxn in enumerate(net.reactions):
        if rxn.s < 0:
            report.append(Violation('s >= 0', f's={rxn.s} is negative', index))
        if rxn.r == 0:
            report.append(Violation('r != 0', 'reaction does not change the copy number', index))
        if rxn.r < -rxn.s:
            report.append(Violation('r >= -s', f'r={rxn.r} below -s={-rxn.s}', index))
        for k in (lo, hi):
            if rxn.rate.evaluate(k) < 0:
                report.append(Violation('rate nonnegative', f'rate negative at K={k:g}', index))

    produces_from_zero = any(rxn.s == 0 and rxn.r > 0 for rxn in net.reactions)
    if net.reactions and not produces_from_zero and net.initial_state is None:
        report.append(Violation('state 0 absorbing',
                                'no reaction fires from x=0 and no initial state is declared'))
    return report
