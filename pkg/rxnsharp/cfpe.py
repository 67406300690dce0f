"""
rxnsharp.cfpe
=============

Continuous-state (chemical Fokker-Planck) analysis of a reaction network.

The module builds the drift ``A(x)`` and diffusion ``B(x)`` polynomials,
integrates the zero-flux stationary density
``P_s(x) = C exp(-int_0^x A(u)/B(u) du)`` on a uniform grid and locates the
peaks, valleys and regions of that density.

Purpose
-------
- Keep drift and diffusion symbolic in K (`KPolynomial`) so conditions on
  ``dA/dK`` and ``dB/dK`` are decided exactly.
- Compute densities in the log domain so ``exp(-Phi)`` never overflows.
- Classify extrema from the sign of ``A'`` at the roots of ``A``.

Notes
-----
- The continuous propensity convention is the default for every analysis.
- The density has a reflecting boundary at 0; ``x_max`` is resolved so the
  density at the far end is negligible.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.integrate import cumulative_trapezoid
from scipy.integrate import trapezoid
from scipy.optimize import bisect

from rxnsharp.config import Data
from rxnsharp.exceptions import DegenerateRootError
from rxnsharp.exceptions import DiffusionNonpositiveError
from rxnsharp.exceptions import NoPeaksError
from rxnsharp.exceptions import TailMassError
from rxnsharp.netmodel import Convention
from rxnsharp.netmodel import ReactionNetwork
from rxnsharp.netmodel import propensity_polynomial

import logging
logger = logging.getLogger(__file__)


def _trim(coeffs: np.ndarray) -> np.ndarray:
    nonzero = np.flatnonzero(coeffs)
    return coeffs[:nonzero[-1] + 1] if nonzero.size else coeffs[:0]


def _pad(coeffs: np.ndarray, size: int) -> np.ndarray:
    return np.concatenate([coeffs, np.zeros(size - len(coeffs))])


class KPolynomial:
    """
    Polynomial in the state ``x`` whose coefficients are affine in ``K``.

    The coefficient of ``x**j`` is ``c0[j] + c1[j] * K``. Trailing pairs that
    are zero in both parts are trimmed, so the zero polynomial has degree -1.

    Parameters
    ----------
    c0 : array_like
        K-independent parts, ascending powers of x.
    c1 : array_like, optional
        Coefficients of K, ascending powers of x.
    """
    def __init__(self, c0, c1=None):
        c0 = np.asarray(c0, dtype=float).ravel()
        c1 = np.zeros_like(c0) if c1 is None else np.asarray(c1, dtype=float).ravel()
        size = max(len(c0), len(c1))
        c0, c1 = _pad(c0, size), _pad(c1, size)
        keep = max(len(_trim(c0)), len(_trim(c1)))
        self.c0 = c0[:keep]
        self.c1 = c1[:keep]

    @property
    def degree(self) -> int:
        return len(self.c0) - 1

    @property
    def is_zero(self) -> bool:
        return len(self.c0) == 0

    @property
    def is_k_free(self) -> bool:
        """True when every K part is exactly zero."""
        return not np.any(self.c1)

    @property
    def pairs(self) -> list:
        return [(float(a), float(b)) for a, b in zip(self.c0, self.c1)]

    def at(self, k: float) -> np.ndarray:
        """Plain ascending coefficients at a fixed K."""
        return self.c0 + self.c1 * float(k)

    def evaluate(self, x, k: float):
        """Value at state(s) ``x`` and control ``k``."""
        coeffs = self.at(k)
        if not len(coeffs):
            return np.zeros_like(np.asarray(x, dtype=float)) if np.ndim(x) else 0.0
        return P.polyval(x, coeffs)

    def derivative(self) -> 'KPolynomial':
        """Derivative with respect to x."""
        if self.degree < 1:
            return KPolynomial([])
        return KPolynomial(P.polyder(self.c0), P.polyder(self.c1))

    def dK(self) -> 'KPolynomial':
        """Derivative with respect to K, itself K-free."""
        return KPolynomial(self.c1)

    def __add__(self, other: 'KPolynomial') -> 'KPolynomial':
        size = max(len(self.c0), len(other.c0))
        return KPolynomial(_pad(self.c0, size) + _pad(other.c0, size),
                           _pad(self.c1, size) + _pad(other.c1, size))

    def __eq__(self, other):
        if not isinstance(other, KPolynomial):
            return NotImplemented
        return np.array_equal(self.c0, other.c0) and np.array_equal(self.c1, other.c1)

    def __repr__(self):
        return f'KPolynomial({self.pairs})'

    def allclose(self, other: 'KPolynomial', rtol=1e-12, atol=1e-12) -> bool:
        size = max(len(self.c0), len(other.c0))
        return (np.allclose(_pad(self.c0, size), _pad(other.c0, size), rtol=rtol, atol=atol)
                and np.allclose(_pad(self.c1, size), _pad(other.c1, size), rtol=rtol, atol=atol))

    def to_dict(self) -> dict:
        return dict(c0=[float(v) for v in self.c0], c1=[float(v) for v in self.c1])


def reaction_contributions(net: ReactionNetwork, convention=Convention.CONTINUOUS) -> list:
    """
    Per-reaction drift and diffusion terms.

    Reaction ``i`` with state factor ``q_i(x)`` and rate ``k_i(K)``
    contributes ``k_i(K) * (-r_i q_i + r_i**2 / 2 * q_i')`` to the drift and
    ``k_i(K) * r_i**2 / 2 * q_i`` to the diffusion.

    Returns
    -------
    list of (KPolynomial, KPolynomial)
        ``(drift, diffusion)`` pairs in reaction order.
    """
    contributions = []
    for rxn in net.reactions:
        q = propensity_polynomial(rxn.s, convention)
        dq = P.polyder(q) if len(q) > 1 else np.zeros(1)
        drift = P.polyadd(-rxn.r * q, 0.5 * rxn.r ** 2 * dq)
        diffusion = 0.5 * rxn.r ** 2 * q
        contributions.append((
            KPolynomial(rxn.rate.base * drift, rxn.rate.slope * drift),
            KPolynomial(rxn.rate.base * diffusion, rxn.rate.slope * diffusion),
        ))
    return contributions


def build_drift(net: ReactionNetwork, convention=Convention.CONTINUOUS) -> KPolynomial:
    """
    Drift ``A(x) = sum_i [-r_i f_i(x) + r_i**2 / 2 * f_i'(x)]``.

    Parameters
    ----------
    net : ReactionNetwork
        A valid network.
    convention : Convention or str, default "continuous"
        Propensity convention of ``f_i``.

    Returns
    -------
    KPolynomial
        The drift with K-affine coefficients.
    """
    total = KPolynomial([])
    for drift, _ in reaction_contributions(net, convention):
        total = total + drift
    return total


def build_diffusion(net: ReactionNetwork, convention=Convention.CONTINUOUS) -> KPolynomial:
    """Diffusion ``B(x) = 1/2 sum_i r_i**2 f_i(x)`` with K-affine coefficients."""
    total = KPolynomial([])
    for _, diffusion in reaction_contributions(net, convention):
        total = total + diffusion
    return total


@dataclass(frozen=True, eq=False)
class DensityGrid:
    """
    Normalized stationary density sampled on ``x0 + h * j``.

    Attributes
    ----------
    h : float
        Grid step.
    values : numpy.ndarray
        Normalized density, trapezoidal mass 1.
    log_values : numpy.ndarray
        Unnormalized log-density ``-Phi(x)``.
    log_norm_const : float
        ``ln C`` so that ``values = exp(log_values + ln C)``.
    x_max : float
        Right end of the grid.
    k : float
        Control value the density was computed at.
    convention : str
        Propensity convention used.
    x0 : float
        Left end of the grid, always 0.
    """
    h: float
    values: np.ndarray
    log_values: np.ndarray
    log_norm_const: float
    x_max: float
    k: float = 0.0
    convention: str = Convention.CONTINUOUS.value
    x0: float = 0.0

    @property
    def x(self) -> np.ndarray:
        return self.x0 + self.h * np.arange(len(self.values))

    @property
    def norm_const(self) -> float:
        try:
            return math.exp(self.log_norm_const)
        except OverflowError:
            return math.inf

    def mass(self) -> float:
        return float(trapezoid(self.values, dx=self.h))

    @property
    def argmax_x(self) -> float:
        return float(self.x[int(np.argmax(self.values))])

    def local_maxima(self) -> list:
        """Grid positions that are strict local maxima, including x = 0."""
        v = self.values
        inner = np.flatnonzero((v[1:-1] > v[:-2]) & (v[1:-1] > v[2:])) + 1
        points = [float(self.x[j]) for j in inner]
        if len(v) > 1 and v[0] > v[1]:
            points.insert(0, float(self.x0))
        return points

    def at(self, x):
        """Linear interpolation of the normalized density, zero outside the grid."""
        return np.interp(x, self.x, self.values, left=0.0, right=0.0)

    def _segment(self, lo: float, hi: float):
        lo, hi = max(lo, self.x0), min(hi, self.x_max)
        x = self.x
        inside = (x > lo) & (x < hi)
        xs = np.concatenate([[lo], x[inside], [hi]])
        return xs, self.at(xs)

    def region_mass(self, lo: float, hi: float) -> float:
        """Probability mass on ``[lo, hi)``."""
        if hi <= lo:
            return 0.0
        xs, ys = self._segment(lo, hi)
        return float(trapezoid(ys, xs))

    def region_moments(self, lo: float, hi: float) -> tuple:
        """Mass, conditional mean and conditional std on ``[lo, hi)``."""
        xs, ys = self._segment(lo, hi)
        mass = float(trapezoid(ys, xs))
        if mass <= 0:
            return 0.0, math.nan, math.nan
        mean = float(trapezoid(xs * ys, xs)) / mass
        var = float(trapezoid((xs - mean) ** 2 * ys, xs)) / mass
        return mass, mean, math.sqrt(max(var, 0.0))

    def region_std(self, lo: float, hi: float) -> float:
        return self.region_moments(lo, hi)[2]

    @property
    def mean(self) -> float:
        return self.region_moments(self.x0, self.x_max)[1]

    @property
    def std(self) -> float:
        return self.region_moments(self.x0, self.x_max)[2]

    def to_dict(self) -> dict:
        return dict(h=self.h, x_max=self.x_max, K=self.k, convention=self.convention,
                    norm_const=self.norm_const, log_norm_const=self.log_norm_const,
                    mass=self.mass(), points=len(self.values))


def _log_density(drift_coeffs, diffusion_coeffs, x) -> np.ndarray:
    ratio = P.polyval(x, drift_coeffs) / P.polyval(x, diffusion_coeffs)
    return -cumulative_trapezoid(ratio, x, initial=0.0)


def _check_diffusion(diffusion_coeffs, x, k):
    b = P.polyval(x, diffusion_coeffs) if len(diffusion_coeffs) else np.zeros_like(x)
    if np.min(b) <= 0:
        where = float(x[int(np.argmin(b))])
        raise DiffusionNonpositiveError(
            f"B(x) <= 0 at x={where:g} for K={k:g}; the stationary density is undefined"
        )


def _initial_x_max(net: ReactionNetwork, drift: KPolynomial) -> float:
    coeffs = drift.at(net.k_default)
    if len(coeffs) > 1:
        roots = P.polyroots(coeffs)
        scale = max(1.0, float(np.max(np.abs(roots))))
        real = roots.real[(np.abs(roots.imag) <= 1e-9 * scale) & (roots.real > 0)]
        if real.size:
            return 2.0 * float(real.max())
    rates = net.rate_vector(net.k_default)
    production = sum(rxn.r * rate for rxn, rate in zip(net.reactions, rates)
                     if rxn.s == 0 and rxn.r > 0)
    degradation = sum(-rxn.r * rate for rxn, rate in zip(net.reactions, rates)
                      if rxn.s == 1 and rxn.r < 0)
    if production > 0 and degradation > 0:
        return 10.0 * production / degradation
    return 100.0


def resolve_x_max(net: ReactionNetwork, k: float, h: float = Data.grid_step,
                  convention=Convention.CONTINUOUS, x_max: Optional[float] = None) -> float:
    """
    Choose the right end of the density grid.

    Starts at twice the largest positive root of the drift at the default K
    (or ten times production over linear degradation, or 100) and doubles
    until the unnormalized density at the end drops below ``1e-12`` of its
    maximum. An explicit `x_max` is used as given.

    Returns
    -------
    float
        A multiple of `h`.

    Raises
    ------
    DiffusionNonpositiveError
        If ``B(x) <= 0`` somewhere on the grid.
    TailMassError
        If the drift is not eventually positive, or the tail stays heavy
        after the allowed number of doublings.
    """
    k = net.check_k(k)
    if h <= 0:
        raise ValueError(f"grid step must be positive, got {h}")
    drift = build_drift(net, convention).at(k)
    diffusion = build_diffusion(net, convention).at(k)

    if x_max is not None:
        steps = max(1, int(math.ceil(float(x_max) / h - 1e-9)))
        x = h * np.arange(steps + 1)
        _check_diffusion(diffusion, x, k)
        return steps * h

    if not len(drift) or drift[-1] <= 0:
        raise TailMassError(
            f"the drift is not eventually positive at K={k:g}; the density does not decay"
        )

    limit = math.log(Data.tail_ratio)
    candidate = _initial_x_max(net, build_drift(net, convention))
    for attempt in range(Data.max_doublings + 1):
        steps = max(1, int(math.ceil(candidate / h - 1e-9)))
        x = h * np.arange(steps + 1)
        _check_diffusion(diffusion, x, k)
        log_values = _log_density(drift, diffusion, x)
        if log_values[-1] - np.max(log_values) < limit:
            logger.debug('resolved x_max=%g at K=%g after %d doublings', steps * h, k, attempt)
            return steps * h
        candidate = 2.0 * steps * h
    raise TailMassError(
        f"boundary density stays above {Data.tail_ratio:g} of the maximum at K={k:g}; "
        f"pass an explicit x_max"
    )


def stationary_density(net: ReactionNetwork, k: float, h: float = Data.grid_step,
                       x_max: Optional[float] = None,
                       convention=Convention.CONTINUOUS) -> DensityGrid:
    """
    Stationary CFPE density on ``[0, x_max]``.

    ``Phi(x) = int_0^x A/B`` is accumulated with the cumulative trapezoid
    rule. The density is normalized in the log domain so the trapezoidal
    mass equals one.

    Parameters
    ----------
    net : ReactionNetwork
        A valid network.
    k : float
        Control value inside the declared range.
    h : float, default 0.1
        Grid step.
    x_max : float, optional
        Right end of the grid; resolved by `resolve_x_max` when omitted.
    convention : Convention or str, default "continuous"
        Propensity convention.

    Returns
    -------
    DensityGrid

    Raises
    ------
    DiffusionNonpositiveError, TailMassError, KRangeError
    """
    convention = Convention.coerce(convention)
    k = net.check_k(k)
    x_max = resolve_x_max(net, k, h, convention, x_max)
    steps = int(round(x_max / h))
    x = h * np.arange(steps + 1)
    drift = build_drift(net, convention).at(k)
    diffusion = build_diffusion(net, convention).at(k)

    log_values = _log_density(drift, diffusion, x)
    top = float(np.max(log_values))
    weights = np.exp(log_values - top)
    mass = float(trapezoid(weights, dx=h))
    values = weights / mass
    log_norm_const = -(top + math.log(mass))
    return DensityGrid(h=float(h), values=values, log_values=log_values,
                       log_norm_const=log_norm_const, x_max=float(x[-1]),
                       k=k, convention=convention.value)


def isolate_roots(coeffs, lo: float, hi: float, h: float,
                  tol: float = Data.bisection_tol) -> list:
    """
    Real roots of a polynomial on ``[lo, hi]``.

    The interval is scanned at step `h`; each sign change is refined by
    bisection to absolute tolerance `tol`. Exact zeros at scan points are
    reported as roots. Roots of even multiplicity strictly between scan
    points are not detected.

    Parameters
    ----------
    coeffs : array_like
        Ascending coefficients; the zero polynomial has no isolated roots.
    lo, hi : float
        Scan interval.
    h : float
        Scan step.

    Returns
    -------
    list of float
        Sorted roots.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    if not np.any(coeffs) or hi < lo:
        return []
    steps = max(1, int(math.ceil((hi - lo) / h - 1e-9)))
    x = np.minimum(lo + h * np.arange(steps + 1), hi)
    y = P.polyval(x, coeffs)

    def fn(value):
        return float(P.polyval(value, coeffs))

    roots = []
    for j in range(len(x)):
        if y[j] == 0:
            if not roots or roots[-1] != x[j]:
                roots.append(float(x[j]))
        elif j + 1 < len(x) and y[j + 1] != 0 and (y[j] < 0) != (y[j + 1] < 0):
            roots.append(float(bisect(fn, x[j], x[j + 1], xtol=tol)))
    return roots


@dataclass(frozen=True)
class PeakStructure:
    """
    Peaks, valleys and regions of a stationary distribution.

    Attributes
    ----------
    peaks : tuple of float
        Sorted peak positions; starts with 0 when the boundary is a peak.
    valleys : tuple of float
        Sorted valley positions, strictly interleaving the peaks.
    x_max : float
        Right end of the last region.
    boundary_peak : bool
        True iff the first peak sits at x = 0.
    """
    peaks: tuple
    valleys: tuple = ()
    x_max: float = math.inf
    boundary_peak: bool = False

    @property
    def modality(self) -> int:
        return len(self.peaks)

    @property
    def regions(self) -> list:
        return regions(self, self.x_max)

    def region_of(self, x: float) -> int:
        """0-based index of the region containing ``x``."""
        return int(np.searchsorted(np.asarray(self.valleys, dtype=float), x, side='right'))

    def to_dict(self) -> dict:
        return dict(peaks=list(self.peaks), valleys=list(self.valleys),
                    regions=[list(pair) for pair in self.regions],
                    modality=self.modality, boundary_peak=self.boundary_peak)


def regions(ps: PeakStructure, x_max: float) -> list:
    """
    Half-open regions ``[0, v1), [v1, v2), ..., [v_last, x_max)``.
    """
    bounds = [0.0] + [float(v) for v in ps.valleys] + [float(x_max)]
    return [(bounds[j], bounds[j + 1]) for j in range(len(bounds) - 1)]


def locate_extrema(drift: KPolynomial, k: float, x_max: float,
                   h: float = Data.grid_step) -> PeakStructure:
    """
    Extrema of the stationary density from the roots of a drift polynomial.

    A root is a peak when ``A'`` is positive there and a valley when it is
    negative. The boundary ``x = 0`` is a peak when ``A(0) > 0``, or when
    ``A(0) == 0`` and ``A'(0) > 0``.

    Raises
    ------
    DegenerateRootError
        If ``|A'| < 1e-12`` at a root.
    NoPeaksError
        If no peak exists on ``[0, x_max]``.
    """
    coeffs = drift.at(k)
    slope = drift.derivative().at(k)

    def a_prime(x):
        return float(P.polyval(x, slope)) if len(slope) else 0.0

    a0 = float(coeffs[0]) if len(coeffs) else 0.0
    boundary_peak = a0 > 0 or (a0 == 0 and a_prime(0.0) > 0)
    peaks = [0.0] if boundary_peak else []
    valleys = []
    for root in isolate_roots(coeffs, 0.0, x_max, h):
        if root <= 0.0 or root >= x_max:
            continue
        d = a_prime(root)
        if abs(d) < Data.degenerate_slope:
            raise DegenerateRootError(f"drift touches zero tangentially at x={root:.9g} for K={k:g}")
        if d > 0:
            peaks.append(root)
        else:
            valleys.append(root)

    if not peaks:
        raise NoPeaksError(f"the stationary density has no peak on [0, {x_max:g}] at K={k:g}")
    while valleys and valleys[-1] > peaks[-1]:
        logger.debug('dropping valley at %g beyond the last peak', valleys[-1])
        valleys.pop()
    while valleys and valleys[0] < peaks[0]:
        logger.debug('dropping valley at %g before the first peak', valleys[0])
        valleys.pop(0)
    return PeakStructure(peaks=tuple(peaks), valleys=tuple(valleys),
                         x_max=float(x_max), boundary_peak=boundary_peak)


def find_extrema(net: ReactionNetwork, k: float, convention=Convention.CONTINUOUS,
                 h: float = Data.grid_step, x_max: Optional[float] = None) -> PeakStructure:
    """
    Peaks and valleys of the CFPE stationary density of a network.

    Parameters
    ----------
    net : ReactionNetwork
        A valid network.
    k : float
        Control value.
    convention : Convention or str, default "continuous"
        Propensity convention.
    h : float, default 0.1
        Root scan step.
    x_max : float, optional
        Right end of the analysis range; resolved when omitted.

    Returns
    -------
    PeakStructure
    """
    convention = Convention.coerce(convention)
    x_max = resolve_x_max(net, k, h, convention, x_max)
    return locate_extrema(build_drift(net, convention), net.check_k(k), x_max, h)


def laplace_std(net: ReactionNetwork, k: float, peak: float,
                convention=Convention.CONTINUOUS) -> float:
    """Gaussian width ``sqrt(B(x_p) / A'(x_p))`` of an interior peak."""
    k = net.check_k(k)
    slope = float(build_drift(net, convention).derivative().evaluate(peak, k))
    diffusion = float(build_diffusion(net, convention).evaluate(peak, k))
    if slope <= 0 or diffusion <= 0:
        return math.nan
    return math.sqrt(diffusion / slope)


def bin_density(grid: DensityGrid, n_states: int) -> np.ndarray:
    """
    Project a density onto the integer states ``0..n_states-1``.

    Each state takes the density at its bin midpoint (the integer itself);
    the result is renormalized to sum to one.
    """
    probs = np.asarray(grid.at(np.arange(n_states, dtype=float)), dtype=float)
    total = probs.sum()
    return probs / total if total > 0 else probs
