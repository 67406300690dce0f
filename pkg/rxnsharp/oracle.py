"""
rxnsharp.oracle
===============

Exact stationary and transient distributions of the truncated chemical
master equation.

The chain is restricted to ``0..x_max_trunc`` with reflecting truncation:
jumps that would leave the range are deleted. The stationary vector is the
solution of ``p Q = 0, sum(p) = 1``, solved as a bordered dense system.
It is the reference the stochastic ensembles and the CFPE densities are
compared against.

Ensembles that have not relaxed by their horizon are compared against
`cme_transient`, the law of the truncated chain at that same time.
"""

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import lu_factor
from scipy.linalg import lu_solve
from scipy.sparse import coo_matrix
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from rxnsharp.cfpe import PeakStructure
from rxnsharp.cfpe import resolve_x_max
from rxnsharp.config import Data
from rxnsharp.exceptions import OracleError
from rxnsharp.exceptions import SingularSystemError
from rxnsharp.exceptions import TruncationWarning
from rxnsharp.netmodel import ReactionNetwork
from rxnsharp.netmodel import propensity_vector

import logging
logger = logging.getLogger(__file__)


class _TruncatedLaw:
    """Moments of a probability vector over ``0..x_max_trunc``."""

    @property
    def states(self) -> np.ndarray:
        return np.arange(self.x_max_trunc + 1)

    @property
    def mean(self) -> float:
        return float(np.dot(self.states, self.probs))

    @property
    def std(self) -> float:
        return math.sqrt(max(float(np.dot((self.states - self.mean) ** 2, self.probs)), 0.0))

    @property
    def truncated(self) -> bool:
        """True when the last kept state holds non-negligible mass."""
        return float(self.probs[-1]) > Data.truncation_mass


@dataclass(frozen=True, eq=False)
class StationaryVector(_TruncatedLaw):
    """
    Stationary probabilities over ``0..x_max_trunc``.

    Attributes
    ----------
    probs : numpy.ndarray
        Nonnegative probabilities summing to one.
    x_max_trunc : int
        Largest state kept.
    residual : float
        Max-norm of ``p Q`` at the solution.
    k : float
        Control value.
    """
    probs: np.ndarray
    x_max_trunc: int
    residual: float
    k: float = 0.0

    def to_dict(self) -> dict:
        return dict(x_max_trunc=self.x_max_trunc, residual=self.residual, K=self.k,
                    mean=self.mean, std=self.std, truncated=self.truncated)


@dataclass(frozen=True, eq=False)
class TransientVector(_TruncatedLaw):
    """
    Law of the truncated chain at time `t` after starting in `x0`.

    Attributes
    ----------
    probs : numpy.ndarray
        Nonnegative probabilities summing to one.
    x_max_trunc : int
        Largest state kept.
    t : float
        Observation time.
    x0 : int
        Initial state.
    k : float
        Control value.
    """
    probs: np.ndarray
    x_max_trunc: int
    t: float
    x0: int = 0
    k: float = 0.0

    def to_dict(self) -> dict:
        return dict(x_max_trunc=self.x_max_trunc, t=self.t, x0=self.x0, K=self.k,
                    mean=self.mean, std=self.std, truncated=self.truncated)


def sparse_generator(net: ReactionNetwork, k: float, x_max_trunc: int) -> csr_matrix:
    """
    Generator ``Q`` of the truncated chain in CSR form.

    ``Q[x, y]`` is the total rate of jumps from ``x`` to ``y``; the diagonal
    holds minus the outflow that stays inside ``0..x_max_trunc``.
    """
    k = net.check_k(k)
    size = int(x_max_trunc) + 1
    states = np.arange(size)
    rates = propensity_vector(net, states, k)
    src, dst, jumps = [np.zeros(0, dtype=np.int64)], [np.zeros(0, dtype=np.int64)], [np.zeros(0)]
    for j, rxn in enumerate(net.reactions):
        target = states + rxn.r
        keep = (target >= 0) & (target < size) & (rates[:, j] > 0)
        src.append(states[keep])
        dst.append(target[keep])
        jumps.append(rates[keep, j])
    src, dst, jumps = np.concatenate(src), np.concatenate(dst), np.concatenate(jumps)
    outflow = np.bincount(src, weights=jumps, minlength=size)
    data = np.concatenate([jumps, -outflow])
    q = coo_matrix((data, (np.concatenate([src, states]), np.concatenate([dst, states]))),
                   shape=(size, size))
    return q.tocsr()


def generator_matrix(net: ReactionNetwork, k: float, x_max_trunc: int) -> np.ndarray:
    """Dense form of `sparse_generator`."""
    return sparse_generator(net, k, x_max_trunc).toarray()


def _closed_classes(q: np.ndarray) -> int:
    graph = csr_matrix((q > 0) & ~np.eye(len(q), dtype=bool))
    count, labels = connected_components(graph, directed=True, connection='strong')
    rows, cols = graph.nonzero()
    leaving = np.zeros(count, dtype=bool)
    leaving[labels[rows][labels[rows] != labels[cols]]] = True
    return int(np.count_nonzero(~leaving))


def default_truncation(net: ReactionNetwork, k: float) -> int:
    """Truncation from the CFPE tail policy on a unit grid."""
    return int(math.ceil(resolve_x_max(net, k, h=1.0)))


def cme_stationary(net: ReactionNetwork, k: float,
                   x_max_trunc: Optional[int] = None) -> StationaryVector:
    """
    Stationary distribution of the truncated CME.

    The balance row of state 0 is replaced by the normalization row and the
    system is solved by dense LU. Negative round-off is clamped to zero and
    the vector renormalized.

    Parameters
    ----------
    net : ReactionNetwork
        A valid network.
    k : float
        Control value.
    x_max_trunc : int, optional
        Largest state kept; chosen from the CFPE tail policy when omitted.

    Returns
    -------
    StationaryVector

    Raises
    ------
    SingularSystemError
        If the truncated chain has more than one closed class.

    Warns
    -----
    TruncationWarning
        If the last kept state holds more than ``1e-8`` of the mass.
    """
    k = net.check_k(k)
    if x_max_trunc is None:
        x_max_trunc = default_truncation(net, k)
    x_max_trunc = int(x_max_trunc)
    if x_max_trunc < 1:
        raise ValueError(f"x_max_trunc must be at least 1, got {x_max_trunc}")
    q = generator_matrix(net, k, x_max_trunc)
    closed = _closed_classes(q)
    if closed != 1:
        raise SingularSystemError(
            f"truncated chain at K={k:g} has {closed} closed classes; the stationary law is not unique"
        )

    system = q.T.copy()
    system[0, :] = 1.0
    rhs = np.zeros(len(q))
    rhs[0] = 1.0
    probs = lu_solve(lu_factor(system), rhs)
    probs = np.where(probs < 0, 0.0, probs)
    probs = probs / probs.sum()
    residual = float(np.max(np.abs(probs @ q)))

    vector = StationaryVector(probs=probs, x_max_trunc=x_max_trunc, residual=residual, k=k)
    if vector.truncated:
        message = (f"truncated CME keeps {probs[-1]:.3g} probability at x={x_max_trunc}; "
                   f"increase x_max_trunc")
        logger.warning(message)
        warnings.warn(message, TruncationWarning, stacklevel=2)
    return vector


def cme_transient(net: ReactionNetwork, k: float, t: float, x0: Optional[int] = None,
                  x_max_trunc: Optional[int] = None) -> TransientVector:
    """
    Law of the truncated CME at time `t`.

    Integrates ``dp/dt = p Q`` from a point mass at `x0` with the stiff BDF
    scheme and the sparse generator as Jacobian. This is the reference for
    an ensemble observed at a finite horizon that has not relaxed.

    Parameters
    ----------
    net : ReactionNetwork
        A valid network.
    k : float
        Control value.
    t : float
        Nonnegative observation time.
    x0 : int, optional
        Initial state; the network's declared initial state or 0.
    x_max_trunc : int, optional
        Largest state kept; at least the stationary truncation and `x0`.

    Returns
    -------
    TransientVector

    Raises
    ------
    OracleError
        If the integrator fails.

    Warns
    -----
    TruncationWarning
        If the last kept state holds more than ``1e-8`` of the mass at `t`.
    """
    k = net.check_k(k)
    t = float(t)
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t:g}")
    if x0 is None:
        x0 = net.initial_state if net.initial_state is not None else Data.default_x0
    x0 = int(x0)
    if x0 < 0:
        raise ValueError(f"initial state must be nonnegative, got {x0}")
    if x_max_trunc is None:
        x_max_trunc = max(default_truncation(net, k), x0 + 1)
    x_max_trunc = int(x_max_trunc)
    if x_max_trunc < max(x0, 1):
        raise ValueError(f"x_max_trunc={x_max_trunc} must cover x0={x0} and be at least 1")

    probs = np.zeros(x_max_trunc + 1)
    probs[x0] = 1.0
    if t > 0:
        flow = sparse_generator(net, k, x_max_trunc).T.tocsr()
        solution = solve_ivp(lambda _, p: flow @ p, (0.0, t), probs, method='BDF', jac=flow,
                             t_eval=[t], rtol=Data.transient_rtol, atol=Data.transient_atol)
        if not solution.success:
            raise OracleError(f"transient CME at K={k:g} failed: {solution.message}")
        probs = np.where(solution.y[:, -1] < 0, 0.0, solution.y[:, -1])
        probs = probs / probs.sum()
        logger.debug('transient CME at K=%g to t=%g: %d right-hand side evaluations', k, t, solution.nfev)

    vector = TransientVector(probs=probs, x_max_trunc=x_max_trunc, t=t, x0=x0, k=k)
    if vector.truncated:
        message = (f"transient CME keeps {probs[-1]:.3g} probability at x={x_max_trunc} "
                   f"at t={t:g}; increase x_max_trunc")
        logger.warning(message)
        warnings.warn(message, TruncationWarning, stacklevel=2)
    return vector


def _as_probs(dist) -> np.ndarray:
    if isinstance(dist, _TruncatedLaw):
        return dist.probs
    if hasattr(dist, 'pmf') and hasattr(dist, 'counts'):
        return dist.pmf(max(dist.counts, default=0) + 1)
    return np.asarray(dist, dtype=float).ravel()


def discrete_extrema(sv) -> PeakStructure:
    """
    Peaks and valleys of a distribution over consecutive integers.

    A peak strictly exceeds both neighbours, a valley is strictly below
    both; state 0 is a peak when ``P(0) > P(1)``. Values below ``1e-14`` of
    the maximum count as zero, so flat tails yield neither.

    Parameters
    ----------
    sv : StationaryVector or array_like
        The distribution.
    """
    p = _as_probs(sv).copy()
    if p.size == 0:
        return PeakStructure(peaks=(), valleys=(), x_max=0.0)
    p[p < Data.dust_floor * p.max()] = 0.0
    inner = np.arange(1, len(p) - 1)
    left, mid, right = p[:-2], p[1:-1], p[2:]
    peaks = [float(x) for x in inner[(mid > left) & (mid > right)]]
    valleys = [float(x) for x in inner[(mid < left) & (mid < right)]]
    boundary_peak = len(p) > 1 and p[0] > p[1]
    if boundary_peak:
        peaks.insert(0, 0.0)
    while valleys and peaks and valleys[-1] > peaks[-1]:
        valleys.pop()
    while valleys and peaks and valleys[0] < peaks[0]:
        valleys.pop(0)
    return PeakStructure(peaks=tuple(peaks), valleys=tuple(valleys),
                         x_max=float(len(p) - 1), boundary_peak=bool(boundary_peak))


def _region_slice(size: int, lo: float, hi: float) -> slice:
    start = max(0, int(math.ceil(lo)))
    stop = size if not math.isfinite(hi) else min(size, int(math.ceil(hi)))
    return slice(start, max(start, stop))


@dataclass(frozen=True)
class RegionStat:
    """Mass, conditional mean and conditional std of one region ``[lo, hi)``."""
    lo: float
    hi: float
    mass: float
    mean: float
    std: float

    def to_dict(self) -> dict:
        return dict(lo=self.lo, hi=self.hi, mass=self.mass, mean=self.mean, std=self.std)


def region_stats(dist, regions) -> list:
    """
    Per-region statistics of a distribution over integers.

    Parameters
    ----------
    dist : StationaryVector, EnsembleHistogram or array_like
        The distribution.
    regions : sequence of (lo, hi)
        Half-open intervals; integer states ``lo <= x < hi`` belong to a
        region.

    Returns
    -------
    list of RegionStat
    """
    p = _as_probs(dist)
    states = np.arange(len(p))
    stats = []
    for lo, hi in regions:
        part = _region_slice(len(p), lo, hi)
        mass = float(p[part].sum())
        if mass > 0:
            mean = float(np.dot(states[part], p[part])) / mass
            var = float(np.dot((states[part] - mean) ** 2, p[part])) / mass
            std = math.sqrt(max(var, 0.0))
        else:
            mean = std = math.nan
        stats.append(RegionStat(lo=float(lo), hi=float(hi), mass=mass, mean=mean, std=std))
    return stats


@dataclass(frozen=True)
class Comparison:
    """Total variation distance and per-region masses of two distributions."""
    tv: float
    region_masses: tuple = ()

    def to_dict(self) -> dict:
        return dict(tv=self.tv, regions=[dict(lo=lo, hi=hi, mass_p=mp, mass_q=mq)
                                         for lo, hi, mp, mq in self.region_masses])


def compare_distributions(p, q, regions=None) -> Comparison:
    """
    Total variation ``1/2 sum |p - q|`` and region masses.

    The shorter distribution is padded with zeros to the common support.

    Parameters
    ----------
    p, q : StationaryVector, EnsembleHistogram or array_like
        Normalized distributions over ``0, 1, 2, ...``.
    regions : sequence of (lo, hi), optional
        Half-open intervals for the mass table.
    """
    p, q = _as_probs(p), _as_probs(q)
    size = max(len(p), len(q))
    p = np.concatenate([p, np.zeros(size - len(p))])
    q = np.concatenate([q, np.zeros(size - len(q))])
    tv = 0.5 * float(np.abs(p - q).sum())
    masses = []
    for lo, hi in regions or ():
        part = _region_slice(size, lo, hi)
        masses.append((float(lo), float(hi), float(p[part].sum()), float(q[part].sum())))
    return Comparison(tv=tv, region_masses=tuple(masses))
