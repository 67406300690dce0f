"""
Unit tests for the stochastic simulation engine.

Usage
-----
Run pytest in the project root to execute these tests:
    $ pytest tests/unit/ssa/test_ssa.py
    or
    $ python -m pytest tests/unit/ssa/test_ssa.py
"""

import math

import numpy as np
import pytest
from scipy import stats

from rxnsharp.config import Data
from rxnsharp.netmodel import propensity_vector
from rxnsharp.ssa import PropensityTable
from rxnsharp.ssa import coarse_tv
from rxnsharp.ssa import ensemble_histogram
from rxnsharp.ssa import simulate_end_state
from rxnsharp.ssa import simulate_trajectory
from rxnsharp.ssa import split_seed
from rxnsharp.ssa import time_series

from tests.unit import birth_death
from tests.unit import gene_network
from tests.unit import network_of
from tests.unit import pure_birth
from tests.unit import schlogl_network


def pure_death(rate: float = 1.0):
    return network_of((1, 0, rate, 0.0), initial_state=20, name='pure_death')


class TestSplitSeed:
    def test_reference_value(self):
        """The first derived seed matches SplitMix64."""
        assert split_seed(0, 0) == 0xE220A8397B1DCDAF

    def test_streams_are_distinct(self):
        """A thousand cells get distinct 64-bit seeds."""
        seeds = {split_seed(7, j) for j in range(1000)}
        assert len(seeds) == 1000
        assert all(0 <= s < 2 ** 64 for s in seeds)

    def test_deterministic(self):
        """Seeds depend only on base seed and index."""
        assert split_seed(123, 45) == split_seed(123, 45)
        assert split_seed(123, 45) != split_seed(124, 45)


class TestSingleCell:
    def test_pure_death_reaches_zero(self):
        """Pure death empties the cell."""
        assert simulate_end_state(pure_death(), 0.0, 20, 100.0, seed=1) == 0

    def test_zero_propensity_freezes(self):
        """A cell with no enabled reaction never moves."""
        trajectory = simulate_trajectory(pure_death(), 0.0, 0, 10.0, seed=3)
        assert list(trajectory.states) == [0]
        assert trajectory.final_state == 0

    def test_trajectory_matches_end_state(self):
        """A recorded trajectory ends where the end-state run does."""
        net = birth_death()
        seed = split_seed(7, 11)
        trajectory = simulate_trajectory(net, 0.0, 0, 5.0, seed)
        assert trajectory.final_state == simulate_end_state(net, 0.0, 0, 5.0, seed)
        assert trajectory.times[0] == 0.0
        assert np.all(np.diff(trajectory.times) > 0)
        assert trajectory.times[-1] <= 5.0
        assert set(np.abs(np.diff(trajectory.states))) <= {1}

    def test_state_at_holds_last_value(self):
        """Between events the last state holds."""
        trajectory = simulate_trajectory(birth_death(), 0.0, 0, 5.0, seed=9)
        if len(trajectory.times) > 1:
            t = 0.5 * (trajectory.times[0] + trajectory.times[1])
            assert trajectory.state_at(t) == trajectory.states[0]
        assert trajectory.state_at(5.0) == trajectory.final_state

    @pytest.mark.parametrize("t_end", [0.0, -1.0])
    def test_bad_horizon(self, t_end):
        """A nonpositive horizon is rejected."""
        with pytest.raises(ValueError):
            simulate_end_state(birth_death(), 0.0, 0, t_end, seed=1)

    def test_negative_initial_state(self):
        """A negative initial state is rejected."""
        with pytest.raises(ValueError):
            simulate_end_state(birth_death(), 0.0, -1, 1.0, seed=1)


class TestEnsemble:
    """Ensemble histograms and sampled time series."""

    def test_pure_birth_mean(self):
        """Pure birth has mean rate times t."""
        histogram = ensemble_histogram(pure_birth(10.0), 0.0, x0=0, t_end=1.0,
                                       n_cells=10000, base_seed=7)
        assert histogram.n_cells == 10000
        assert sum(histogram.counts.values()) == 10000
        assert histogram.mean == pytest.approx(10.0, abs=0.3)

    def test_birth_death_is_poisson(self):
        """Immigration-death end states pass a chi-square test against Poisson."""
        n_cells = 5000
        histogram = ensemble_histogram(birth_death(10.0, 1.0), 0.0, x0=0, t_end=20.0,
                                       n_cells=n_cells, base_seed=11)
        edges = list(range(5, 17))
        observed = [sum(c for s, c in histogram.counts.items() if s < 5)]
        observed += [histogram.counts.get(s, 0) for s in edges]
        observed += [sum(c for s, c in histogram.counts.items() if s >= 17)]
        law = stats.poisson(10.0)
        expected = [law.cdf(4)] + [law.pmf(s) for s in edges] + [law.sf(16)]
        expected = np.array(expected) * n_cells
        _, p_value = stats.chisquare(observed, expected)
        assert p_value > 1e-3

    def test_cells_match_single_cell_runs(self):
        """Ensemble cells replay as single cells with derived seeds."""
        net = birth_death()
        samples = time_series(net, 0.0, 0, [2.0], n_cells=5, base_seed=21)
        for j in range(5):
            assert samples[j, 0] == simulate_end_state(net, 0.0, 0, 2.0, split_seed(21, j))

    def test_independent_of_workers(self):
        """Splitting across workers does not change the ensemble."""
        net = birth_death()
        single = ensemble_histogram(net, 0.0, t_end=5.0, n_cells=300, base_seed=5, workers=1)
        pooled = ensemble_histogram(net, 0.0, t_end=5.0, n_cells=300, base_seed=5, workers=3)
        assert single.counts == pooled.counts
        assert single.half_counts == pooled.half_counts

    def test_seed_changes_result(self):
        """A different base seed gives a different ensemble."""
        net = birth_death()
        first = ensemble_histogram(net, 0.0, t_end=5.0, n_cells=300, base_seed=5)
        second = ensemble_histogram(net, 0.0, t_end=5.0, n_cells=300, base_seed=6)
        assert first.counts != second.counts

    def test_stationarity_diagnostic(self):
        """Relaxed ensembles pass the diagnostic and ramping ones fail it."""
        relaxed = ensemble_histogram(birth_death(), 0.0, x0=0, t_end=40.0,
                                     n_cells=4000, base_seed=3)
        assert relaxed.stationarity_tv < 0.05
        ramping = ensemble_histogram(pure_birth(10.0), 0.0, x0=0, t_end=20.0,
                                     n_cells=1000, base_seed=3)
        assert ramping.stationarity_tv > 0.5
        assert ramping.stationary is False

    def test_region_mass_and_pmf(self):
        """Region masses agree with the empirical pmf."""
        histogram = ensemble_histogram(birth_death(), 0.0, t_end=20.0, n_cells=500, base_seed=2)
        assert histogram.region_mass(0, math.inf) == pytest.approx(1.0)
        pmf = histogram.pmf(100)
        assert pmf.sum() == pytest.approx(1.0)
        assert histogram.region_mass(0, 10) == pytest.approx(pmf[:10].sum())

    def test_time_series_shape(self):
        """Time series have one row per cell and start at x0."""
        samples = time_series(pure_birth(1.0), 0.0, 0, [0.0, 1.0, 2.0, 3.0], n_cells=50)
        assert samples.shape == (50, 4)
        assert np.all(samples[:, 0] == 0)
        assert np.all(np.diff(samples, axis=1) >= 0)

    @pytest.mark.parametrize("times", [[], [2.0, 1.0], [-1.0, 1.0]])
    def test_bad_sample_times(self, times):
        """Empty, decreasing or negative sample times are rejected."""
        with pytest.raises(ValueError):
            time_series(birth_death(), 0.0, 0, times, n_cells=2)

    def test_no_cells(self):
        """An empty ensemble is rejected."""
        with pytest.raises(ValueError):
            ensemble_histogram(birth_death(), 0.0, t_end=1.0, n_cells=0)

    def test_report_schema(self):
        """The histogram dictionary has the documented keys."""
        payload = ensemble_histogram(birth_death(), 0.0, t_end=5.0, n_cells=20).to_dict()
        assert set(payload) == {'n_cells', 't_end', 'K', 'base_seed', 'x0', 'mean',
                                'std', 'stationarity_tv', 'stationary'}

    @pytest.mark.slow
    @pytest.mark.parametrize("k, std", [(0.0, 27.4), (50.0, 19.4)])
    def test_gene_width(self, k, std):
        """Full-size gene ensembles reproduce the bursty and Poisson widths."""
        histogram = ensemble_histogram(gene_network(), k, n_cells=Data.histogram_cells,
                                       base_seed=Data.default_seed, workers=4)
        assert histogram.n_cells == 10000
        assert histogram.mean == pytest.approx(375.0, rel=0.01)
        assert histogram.std == pytest.approx(std, rel=0.04)

    @pytest.mark.slow
    def test_gene_sharpens_by_sqrt_two(self):
        """Trading bursts for single births narrows the gene peak by about 1/sqrt(2)."""
        net = gene_network()
        low = ensemble_histogram(net, 0.0, base_seed=7, workers=4)
        high = ensemble_histogram(net, 50.0, base_seed=7, workers=4)
        assert high.std / low.std == pytest.approx(0.71, abs=0.06)

    @pytest.mark.slow
    def test_gene_time_series_sharpens(self):
        """The final sample of the default time-series protocol shows the same narrowing."""
        net = gene_network()
        times = np.arange(0.0, 50.0 + 1e-9, Data.time_series_step)
        low = time_series(net, 0.0, 0, times, base_seed=7, workers=4)
        high = time_series(net, 50.0, 0, times, base_seed=7, workers=4)
        assert low.shape == (Data.time_series_cells, len(times))
        ratio = high[:, -1].std(ddof=1) / low[:, -1].std(ddof=1)
        assert ratio == pytest.approx(0.71, abs=0.06)

    @pytest.mark.slow
    def test_schlogl_full_protocol_completes(self):
        """A full Schlogl ensemble runs to t_end with every cell accounted for."""
        histogram = ensemble_histogram(schlogl_network(), 5.0, n_cells=2000, workers=4)
        assert histogram.t_end == 100.0
        assert sum(histogram.counts.values()) == 2000
        assert histogram.region_mass(0, math.inf) == pytest.approx(1.0)


class TestPropensityTable:
    """State-indexed cumulative propensities used by the event loop."""

    def test_rows_match_propensities(self):
        """Each row is the running sum of the exact propensities."""
        net = schlogl_network()
        table = PropensityTable(net, 4.0, size=16)
        states = np.array([0, 1, 2, 3, 15])
        cum, _ = table.rows(states)
        expected = np.cumsum(propensity_vector(net, states, 4.0), axis=1)
        assert cum == pytest.approx(expected)

    def test_grows_on_demand(self):
        """Requesting a state past the end doubles the table or more."""
        table = PropensityTable(birth_death(), 0.0, size=8)
        assert len(table) == 8
        cum, _ = table.rows(np.array([3, 9]))
        assert len(table) == 16
        assert cum[1, -1] == pytest.approx(10.0 + 9.0)
        table.rows(np.array([100]))
        assert len(table) == 101

    def test_last_firing_reaction(self):
        """`last` names the final reaction with positive propensity at each state."""
        net = network_of((0, 1, 1.0, 0.0), (2, 0, 1.0, 0.0), (1, 0, 0.0, 0.0))
        _, last = PropensityTable(net, 0.0, size=4).rows(np.arange(4))
        assert list(last) == [0, 0, 1, 1]


class TestCoarseTV:
    def test_identical(self):
        """Identical count maps are at distance zero."""
        assert coarse_tv({1: 5, 2: 5}, {1: 5, 2: 5}, 10) == 0.0

    def test_disjoint(self):
        """Count maps in different bins are at distance one."""
        assert coarse_tv({0: 10}, {99: 10}, 10) == pytest.approx(1.0)
