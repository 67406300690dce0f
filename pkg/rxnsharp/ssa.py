"""
rxnsharp.ssa
============

Gillespie direct-method simulation of the chemical master equation.

Every cell owns a counter-based SplitMix64 stream derived from the base
seed and its index, so an ensemble is bitwise reproducible regardless of
how its cells are split across worker processes. Cells are advanced
together with numpy, one event per cell per step.

Notes
-----
- Simulation always uses the exact (falling factorial) propensities.
- Each event consumes two uniforms from the cell's stream: one for the
  waiting time, one for the reaction choice.
- Sample times are served by zero-order hold: the state reported at time
  ``t`` is the state after every event at or before ``t``.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from dataclasses import field
from typing import Optional

import numpy as np

from rxnsharp.config import Data
from rxnsharp.netmodel import ReactionNetwork
from rxnsharp.netmodel import propensity_vector

import logging
logger = logging.getLogger(__file__)

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
MIX_A = 0xBF58476D1CE4E5B9
MIX_B = 0x94D049BB133111EB

_GOLDEN = np.uint64(GOLDEN_GAMMA)
_MIX_A = np.uint64(MIX_A)
_MIX_B = np.uint64(MIX_B)
_UNIT = 2.0 ** -53


def _mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * MIX_A) & MASK64
    z = ((z ^ (z >> 27)) * MIX_B) & MASK64
    return z ^ (z >> 31)


def split_seed(base_seed: int, index: int) -> int:
    """
    Seed of cell `index` derived from `base_seed` by a SplitMix64 step.

    Returns
    -------
    int
        Unsigned 64-bit seed.
    """
    return _mix64(int(base_seed) + (int(index) + 1) * GOLDEN_GAMMA)


def _mix_array(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _MIX_A
    z = (z ^ (z >> np.uint64(27))) * _MIX_B
    return z ^ (z >> np.uint64(31))


def _uniforms(seeds: np.ndarray, first: int, count: int) -> np.ndarray:
    """Draws ``first .. first + count - 1`` of each stream, mapped into (0, 1)."""
    with np.errstate(over='ignore'):
        offsets = (np.arange(first, first + count, dtype=np.uint64) + np.uint64(1)) * _GOLDEN
        z = _mix_array(seeds[:, None] + offsets[None, :])
    return ((z >> np.uint64(11)).astype(np.float64) + 0.5) * _UNIT


class PropensityTable:
    """
    Cumulative exact propensities indexed by state.

    Row ``x`` holds the running sums of the propensities at copy number
    ``x``; ``last[x]`` is the index of the last reaction that can fire
    there. The table doubles whenever a state beyond its end is requested.
    """

    def __init__(self, net: ReactionNetwork, k: float, size: int = Data.table_states):
        self.net = net
        self.k = k
        self.cum = np.empty((0, net.size))
        self.last = np.empty(0, dtype=np.int64)
        self._build(max(int(size), 1))

    def __len__(self):
        return len(self.cum)

    def _build(self, size: int):
        a = propensity_vector(self.net, np.arange(size), self.k)
        positive = a > 0
        self.cum = np.cumsum(a, axis=1)
        self.last = np.where(positive.any(axis=1),
                             a.shape[1] - 1 - np.argmax(positive[:, ::-1], axis=1),
                             a.shape[1] - 1)
        logger.debug('propensity table covers states 0..%d', size - 1)

    def rows(self, states: np.ndarray):
        """Return ``(cum, last)`` for every state in `states`."""
        top = int(states.max())
        if top >= len(self):
            self._build(max(2 * len(self), top + 1))
        return self.cum[states], self.last[states]


@dataclass(frozen=True, eq=False)
class Trajectory:
    """
    Every event of one simulated cell.

    Attributes
    ----------
    times : numpy.ndarray
        Event times, starting at 0.
    states : numpy.ndarray
        State after each event, starting with the initial state.
    seed : int
        The cell's 64-bit seed.
    """
    times: np.ndarray
    states: np.ndarray
    seed: int

    @property
    def final_state(self) -> int:
        return int(self.states[-1])

    def state_at(self, t: float) -> int:
        """Zero-order hold value at time ``t``."""
        j = int(np.searchsorted(self.times, t, side='right')) - 1
        return int(self.states[max(j, 0)])


@dataclass(frozen=True)
class EnsembleHistogram:
    """
    End states of an ensemble of independent cells.

    Attributes
    ----------
    counts : dict
        State to number of cells ending there, sorted by state.
    n_cells : int
    t_end : float
    k : float
    base_seed : int
    x0 : int
    half_counts : dict
        The same ensemble observed at ``t_end / 2``.
    """
    counts: dict
    n_cells: int
    t_end: float
    k: float
    base_seed: int
    x0: int = 0
    half_counts: dict = field(default_factory=dict)

    @property
    def states(self) -> np.ndarray:
        return np.fromiter(self.counts.keys(), dtype=np.int64, count=len(self.counts))

    @property
    def frequencies(self) -> np.ndarray:
        return np.fromiter(self.counts.values(), dtype=float, count=len(self.counts)) / self.n_cells

    @property
    def mean(self) -> float:
        return float(np.dot(self.states, self.frequencies))

    @property
    def std(self) -> float:
        """Sample standard deviation (ddof=1)."""
        if self.n_cells < 2:
            return 0.0
        var = float(np.dot((self.states - self.mean) ** 2, self.frequencies))
        return math.sqrt(var * self.n_cells / (self.n_cells - 1))

    def pmf(self, n_states: int) -> np.ndarray:
        """Empirical probabilities over ``0..n_states-1``; mass beyond is dropped."""
        probs = np.zeros(n_states)
        for state, count in self.counts.items():
            if state < n_states:
                probs[state] = count / self.n_cells
        return probs

    def region_mass(self, lo: float, hi: float) -> float:
        """Fraction of cells with ``lo <= state < hi``."""
        hits = sum(count for state, count in self.counts.items() if lo <= state < hi)
        return hits / self.n_cells

    @property
    def stationarity_tv(self) -> float:
        """Total variation between the t_end/2 and t_end histograms on coarse bins."""
        if not self.half_counts:
            return math.nan
        return coarse_tv(self.half_counts, self.counts, Data.stationarity_bins)

    @property
    def stationary(self) -> bool:
        tv = self.stationarity_tv
        return not math.isnan(tv) and tv < Data.stationarity_tv

    def to_dict(self) -> dict:
        return dict(n_cells=self.n_cells, t_end=self.t_end, K=self.k,
                    base_seed=self.base_seed, x0=self.x0, mean=self.mean, std=self.std,
                    stationarity_tv=self.stationarity_tv, stationary=self.stationary)


def coarse_tv(first: dict, second: dict, bins: int) -> float:
    """Total variation of two count maps after pooling into equal-width bins."""
    top = max(max(first, default=0), max(second, default=0)) + 1
    edges = np.linspace(0, top, bins + 1)

    def binned(counts):
        states = np.fromiter(counts.keys(), dtype=float, count=len(counts))
        weights = np.fromiter(counts.values(), dtype=float, count=len(counts))
        hist, _ = np.histogram(states, bins=edges, weights=weights)
        return hist / hist.sum()

    return 0.5 * float(np.abs(binned(first) - binned(second)).sum())


def _run_cells(net: ReactionNetwork, k: float, x0: int, seeds: np.ndarray,
               times: np.ndarray, record: bool = False):
    """
    Advance one cell per seed and sample each at `times`.

    Returns
    -------
    tuple
        ``(samples, path)`` where `samples` has shape
        ``(len(seeds), len(times))`` and `path` lists ``(t, state)`` of
        every event of the first cell when `record` is set.
    """
    n, n_times = len(seeds), len(times)
    t_end = float(times[-1])
    horizon = np.append(np.asarray(times, dtype=float), np.inf)
    r = net.r_vector
    table = PropensityTable(net, k)
    block = max(int(Data.uniform_block), 1)
    samples = np.zeros((n, n_times), dtype=np.int64)
    cells = np.arange(n)
    states = np.full(n, int(x0), dtype=np.int64)
    clock = np.zeros(n)
    cursor = np.zeros(n, dtype=np.int64)
    seeds = np.asarray(seeds, dtype=np.uint64).copy()
    draws = np.empty((n, 0))
    path = [(0.0, int(x0))] if record else None

    # every active cell has fired exactly `step` events, so all streams
    # sit at the same counter and draws are taken a block at a time
    step = 0
    with np.errstate(divide='ignore'):
        while cells.size:
            offset = step % block
            if offset == 0:
                draws = _uniforms(seeds, 2 * step, 2 * block)
            cum, last = table.rows(states)
            total = cum[:, -1]
            arrival = clock - np.log(draws[:, 2 * offset]) / total

            crossed = np.flatnonzero(arrival > horizon[cursor])
            if crossed.size:
                reached = np.searchsorted(times, arrival[crossed], side='left')
                for c, stop in zip(crossed, reached):
                    samples[cells[c], cursor[c]:stop] = states[c]
                cursor[crossed] = reached

            fire = arrival <= t_end
            target = draws[:, 2 * offset + 1] * total
            choice = np.minimum((cum <= target[:, None]).sum(axis=1), last)
            states = states + np.where(fire, r[choice], 0)
            clock = arrival
            step += 1
            if record and fire[0] and cells[0] == 0:
                path.append((float(arrival[0]), int(states[0])))

            if not fire.all():
                cells, states, clock = cells[fire], states[fire], clock[fire]
                seeds, cursor, draws = seeds[fire], cursor[fire], draws[fire]
    return samples, path


def _run_chunk(args):
    net, k, x0, seeds, times = args
    return _run_cells(net, k, x0, seeds, times)[0]


def _check_times(times) -> np.ndarray:
    times = np.asarray(times, dtype=float).ravel()
    if times.size == 0:
        raise ValueError("at least one sample time is required")
    if times[0] < 0 or np.any(np.diff(times) < 0):
        raise ValueError("sample times must be nonnegative and increasing")
    return times


def _resolve_x0(net: ReactionNetwork, x0: Optional[int]) -> int:
    if x0 is None:
        x0 = net.initial_state if net.initial_state is not None else Data.default_x0
    if int(x0) < 0:
        raise ValueError(f"initial state must be nonnegative, got {x0}")
    return int(x0)


def _simulate(net, k, x0, times, n_cells, base_seed, workers) -> np.ndarray:
    if n_cells < 1:
        raise ValueError(f"n_cells must be at least 1, got {n_cells}")
    seeds = np.array([split_seed(base_seed, j) for j in range(n_cells)], dtype=np.uint64)
    workers = max(1, min(int(workers or 1), n_cells))
    if workers == 1:
        return _run_cells(net, k, x0, seeds, times)[0]

    bounds = np.linspace(0, n_cells, workers + 1).astype(int)
    jobs = [(net, k, x0, seeds[lo:hi], times) for lo, hi in zip(bounds, bounds[1:]) if hi > lo]
    logger.debug('simulating %d cells in %d chunks', n_cells, len(jobs))
    with ProcessPoolExecutor(max_workers=len(jobs)) as executor:
        parts = list(executor.map(_run_chunk, jobs))
    return np.vstack(parts)


def simulate_end_state(net: ReactionNetwork, k: float, x0: int, t_end: float, seed: int) -> int:
    """
    State of one cell at `t_end`.

    Parameters
    ----------
    net : ReactionNetwork
        A valid network.
    k : float
        Control value.
    x0 : int
        Initial copy number.
    t_end : float
        Positive horizon.
    seed : int
        The cell's 64-bit seed; cell ``j`` of an ensemble uses
        ``split_seed(base_seed, j)``.
    """
    k = net.check_k(k)
    if t_end <= 0:
        raise ValueError(f"t_end must be positive, got {t_end}")
    seeds = np.array([int(seed) & MASK64], dtype=np.uint64)
    samples, _ = _run_cells(net, k, _resolve_x0(net, x0), seeds, np.array([float(t_end)]))
    return int(samples[0, -1])


def simulate_trajectory(net: ReactionNetwork, k: float, x0: int, t_end: float, seed: int) -> Trajectory:
    """Every event of one cell up to `t_end`, from the same stream as `simulate_end_state`."""
    k = net.check_k(k)
    if t_end <= 0:
        raise ValueError(f"t_end must be positive, got {t_end}")
    seed = int(seed) & MASK64
    seeds = np.array([seed], dtype=np.uint64)
    _, path = _run_cells(net, k, _resolve_x0(net, x0), seeds, np.array([float(t_end)]), record=True)
    times, states = zip(*path)
    return Trajectory(times=np.array(times), states=np.array(states, dtype=np.int64), seed=seed)


def _counts(values: np.ndarray) -> dict:
    states, counts = np.unique(values, return_counts=True)
    return {int(s): int(c) for s, c in zip(states, counts)}


def ensemble_histogram(net: ReactionNetwork, k: float, x0: Optional[int] = None,
                       t_end: Optional[float] = None, n_cells: int = Data.histogram_cells,
                       base_seed: int = Data.default_seed, workers: int = 1) -> EnsembleHistogram:
    """
    End-state histogram of `n_cells` independent cells.

    Cell ``j`` runs on ``split_seed(base_seed, j)``; the result does not
    depend on `workers`. The ensemble is also observed at ``t_end / 2`` for
    the stationarity diagnostic.

    Parameters
    ----------
    x0 : int, optional
        Initial state; the network's declared initial state or 0.
    t_end : float, optional
        Horizon; the network's default protocol when omitted.
    """
    k = net.check_k(k)
    x0 = _resolve_x0(net, x0)
    t_end = Data.t_end_for(net.name) if t_end is None else float(t_end)
    if t_end <= 0:
        raise ValueError(f"t_end must be positive, got {t_end}")
    samples = _simulate(net, k, x0, np.array([0.5 * t_end, t_end]), n_cells, base_seed, workers)
    histogram = EnsembleHistogram(counts=_counts(samples[:, 1]), n_cells=int(n_cells),
                                  t_end=t_end, k=k, base_seed=int(base_seed), x0=x0,
                                  half_counts=_counts(samples[:, 0]))
    logger.info('ensemble at K=%g: stationarity TV %.4f (%s)', k, histogram.stationarity_tv,
                'stationary' if histogram.stationary else 'not stationary')
    return histogram


def time_series(net: ReactionNetwork, k: float, x0: Optional[int], sample_times,
                n_cells: int = Data.time_series_cells, base_seed: int = Data.default_seed,
                workers: int = 1) -> np.ndarray:
    """
    Sampled trajectories, one row per cell and one column per sample time.

    Returns
    -------
    numpy.ndarray
        Integer matrix of shape ``(n_cells, len(sample_times))``.
    """
    k = net.check_k(k)
    times = _check_times(sample_times)
    return _simulate(net, k, _resolve_x0(net, x0), times, n_cells, base_seed, workers)
