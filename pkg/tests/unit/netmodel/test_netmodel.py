"""
Unit tests for rate evaluation, propensities and network validation.

Usage
-----
Run pytest in the project root to execute these tests:
    $ pytest tests/unit/netmodel/test_netmodel.py
    or
    $ python -m pytest tests/unit/netmodel/test_netmodel.py
"""

import math

import numpy as np
import pytest

from rxnsharp.exceptions import KRangeError
from rxnsharp.exceptions import NetworkValidationError
from rxnsharp.netmodel import Convention
from rxnsharp.netmodel import RateExpr
from rxnsharp.netmodel import Reaction
from rxnsharp.netmodel import propensity
from rxnsharp.netmodel import propensity_polynomial
from rxnsharp.netmodel import propensity_vector
from rxnsharp.netmodel import rate_eval
from rxnsharp.netmodel import validate_network

from tests.unit import gene_network
from tests.unit import network_of
from tests.unit import schlogl_network


class TestRateEval:
    """Affine rate expressions ``base + slope * K``."""

    @pytest.mark.parametrize(
        "base, slope, k, expected",
        [
            (0.0, 3.0, 25.0, 75.0),
            (50.0, -1.0, 0.0, 50.0),
            (0.0, 0.0, 17.0, 0.0),
            (0.4, 0.0, 50.0, 0.4),
        ],
    )
    def test_evaluate(self, base, slope, k, expected):
        """Rates are base plus slope times K."""
        assert rate_eval(RateExpr(base, slope), k) == pytest.approx(expected)

    def test_outside_declared_range_raises(self):
        """An explicit range rejects K outside it."""
        with pytest.raises(KRangeError):
            rate_eval(RateExpr(0.0, 3.0), 60.0, k_range=(0.0, 50.0))

    def test_linspace_endpoint_is_accepted(self):
        """Round-off at the range end is tolerated."""
        k = np.linspace(0.0, 50.0, 7)[-1]
        assert rate_eval(RateExpr(50.0, -1.0), k, k_range=(0.0, 50.0)) == pytest.approx(0.0)

    def test_network_range_applies_by_default(self):
        """A rate taken from a network is checked against that network's range."""
        rate = gene_network().reactions[0].rate
        assert rate.k_range == (0.0, 50.0)
        assert rate_eval(rate, 50.0) == pytest.approx(150.0)
        with pytest.raises(KRangeError):
            rate_eval(rate, 60.0)

    def test_propensity_checks_owning_network(self):
        """Propensities of network reactions reject K outside the declared range."""
        net = network_of((0, 1, 1.0, 2.0), (1, 0, 1.0, 0.0), k_range=(0.0, 5.0))
        assert propensity(net.reactions[0], 3, 5.0) == pytest.approx(11.0)
        with pytest.raises(KRangeError):
            propensity(net.reactions[0], 3, 6.0)

    def test_range_survives_perturbation(self):
        """Perturbed copies keep the range stamp; equality ignores it."""
        net = gene_network().with_perturbations({1: 0.5})
        assert all(rxn.rate.k_range == (0.0, 50.0) for rxn in net.reactions)
        assert net.reactions[2].rate == RateExpr(0.4)
        with pytest.raises(KRangeError):
            rate_eval(net.reactions[1].rate, -1.0)

    def test_depends_on_k(self):
        """Only a nonzero slope depends on K."""
        assert RateExpr(1.0, 2.0).depends_on_k is True
        assert RateExpr(1.0).depends_on_k is False


class TestPropensity:
    """Falling-factorial and power-law propensities."""

    trimolecular = Reaction(3, -1, RateExpr(1e-4))

    @pytest.mark.parametrize(
        "x, convention, expected",
        [
            (3, 'exact', 1e-4),
            (2, 'exact', 0.0),
            (3, 'continuous', 4.5e-4),
            (0, 'continuous', 0.0),
            (10, 'exact', 1e-4 * 10 * 9 * 8 / 6),
        ],
    )
    def test_trimolecular(self, x, convention, expected):
        """Third-order propensities under both conventions."""
        value = propensity(self.trimolecular, x, 0.0, convention)
        assert value == pytest.approx(expected, rel=1e-12, abs=1e-18)

    @pytest.mark.parametrize("s", [0, 1])
    @pytest.mark.parametrize("x", [0, 1, 2, 7, 120])
    def test_conventions_agree_for_low_order(self, s, x):
        """Exact and continuous propensities agree up to first order."""
        rxn = Reaction(s, 1, RateExpr(2.5, 1.0))
        assert propensity(rxn, x, 3.0, 'exact') == pytest.approx(propensity(rxn, x, 3.0, 'continuous'))

    @pytest.mark.parametrize("convention", list(Convention))
    def test_monotone_in_x(self, convention):
        """Propensities do not decrease with the copy number."""
        rxn = Reaction(2, -1, RateExpr(0.7))
        values = [propensity(rxn, x, 0.0, convention) for x in range(30)]
        assert all(b >= a for a, b in zip(values, values[1:]))

    def test_exact_positive_from_s_on(self):
        """Exact propensities vanish below s and are positive from s on."""
        rxn = Reaction(2, -2, RateExpr(0.3))
        assert propensity(rxn, 1, 0.0) == 0.0
        assert all(propensity(rxn, x, 0.0) > 0 for x in range(2, 12))

    @pytest.mark.parametrize(
        "s, convention, expected",
        [
            (0, 'exact', [1.0]),
            (1, 'exact', [0.0, 1.0]),
            (2, 'exact', [0.0, -0.5, 0.5]),
            (2, 'continuous', [0.0, 0.0, 0.5]),
            (3, 'continuous', [0.0, 0.0, 0.0, 1.0 / 6.0]),
        ],
    )
    def test_propensity_polynomial(self, s, convention, expected):
        """State factors as ascending polynomial coefficients."""
        assert np.allclose(propensity_polynomial(s, convention), expected)

    def test_vector_matches_scalar(self):
        """The vectorised propensities agree with the scalar ones."""
        net = schlogl_network()
        states = np.array([0, 1, 2, 3, 57, 400])
        table = propensity_vector(net, states, 4.0)
        assert table.shape == (len(states), net.size)
        for row, x in zip(table, states):
            expected = [propensity(rxn, int(x), 4.0) for rxn in net.reactions]
            assert np.allclose(row, expected)

    def test_unknown_convention_raises(self):
        """An unknown convention name is rejected."""
        with pytest.raises(ValueError):
            propensity(Reaction(0, 1, RateExpr(1.0)), 0, 0.0, 'quantum')


class TestValidateNetwork:
    """Structural invariants of reaction networks."""

    def test_gene_network_is_valid(self):
        """The shipped gene network passes validation."""
        assert validate_network(gene_network()) == []

    def test_schlogl_network_is_valid(self):
        """The shipped Schlogl network passes validation."""
        assert validate_network(schlogl_network()) == []

    def test_degradation_from_zero(self):
        """A reaction removing a molecule from nothing is reported."""
        net = network_of((0, 1, 1.0, 0.0), (0, -1, 1.0, 0.0))
        rules = [v.rule for v in validate_network(net)]
        assert 'r >= -s' in rules

    def test_negative_rate_over_range(self):
        """A rate negative at a range end is reported."""
        net = network_of((0, 1, 0.0, 3.0), (0, 3, 50.0, -1.0), (1, 0, 0.4, 0.0),
                         k_range=(0.0, 60.0))
        report = validate_network(net)
        assert [(v.rule, v.reaction_index) for v in report] == [('rate nonnegative', 1)]
        assert report[0].message == 'rate negative at K=60'
        assert 'rate negative at K=60' in str(report[0])

    def test_absorbing_zero_without_initial_state(self):
        """An absorbing zero without initial state is reported."""
        net = network_of((1, 0, 1.0, 0.0))
        assert [v.rule for v in validate_network(net)] == ['state 0 absorbing']

    def test_declared_initial_state_allows_absorbing_zero(self):
        """A declared initial state makes an absorbing zero acceptable."""
        net = network_of((1, 0, 1.0, 0.0), initial_state=5)
        assert validate_network(net) == []

    def test_default_outside_range(self):
        """A default K outside the range is reported."""
        net = network_of((0, 1, 1.0, 0.0), k_range=(0.0, 1.0), k_default=2.0)
        assert [v.rule for v in validate_network(net)] == ['k range']

    def test_empty_network(self):
        """A network without reactions is reported."""
        net = network_of()
        assert [v.rule for v in validate_network(net)] == ['reactions']

    def test_require_valid_raises_with_report(self):
        """require_valid raises with the full violation list."""
        net = network_of((1, 0, 1.0, 0.0))
        with pytest.raises(NetworkValidationError) as exc_info:
            net.require_valid()
        assert exc_info.value.violations[0].rule == 'state 0 absorbing'


class TestReactionNetwork:
    """Helpers of the network type."""

    def test_vectors_and_size(self):
        """Reactant and change vectors follow declaration order."""
        net = gene_network()
        assert net.size == 3
        assert net.s_vector.tolist() == [0, 0, 1]
        assert net.r_vector.tolist() == [1, 3, -1]

    def test_rate_vector(self):
        """All rate constants at one K."""
        assert gene_network().rate_vector(25.0).tolist() == pytest.approx([75.0, 25.0, 0.4])

    def test_check_k(self):
        """check_k accepts in-range values and rejects others."""
        net = gene_network()
        assert net.check_k(50) == 50.0
        with pytest.raises(KRangeError):
            net.check_k(-1.0)

    def test_with_perturbations_shifts_base_only(self):
        """Perturbations move base rates and keep slopes."""
        net = schlogl_network()
        perturbed = net.with_perturbations({5: 0.035, 6: -0.01})
        assert perturbed.reactions[5].rate == RateExpr(0.035, 1.0)
        assert perturbed.reactions[6].rate.base == pytest.approx(-0.01)
        assert perturbed.reactions[:5] == net.reactions[:5]
        assert net.reactions[5].rate == RateExpr(0.0, 1.0)

    def test_with_perturbations_bad_index(self):
        """A perturbation index past the last reaction is rejected."""
        with pytest.raises(IndexError):
            gene_network().with_perturbations({3: 1.0})

    def test_params_are_sorted(self):
        """Named parameters are stored sorted by name."""
        assert [name for name, _ in schlogl_network().params] == ['S1k1', 'S2k3', 'k2', 'k4']

    def test_frozen(self):
        """Networks are immutable."""
        net = gene_network()
        with pytest.raises(Exception):
            net.name = 'other'
        assert math.isclose(net.param_map['alpha'], 50.0)
