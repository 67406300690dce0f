"""
Unit tests for the `.rxn` reader and writer.

Usage
-----
Run pytest in the project root to execute these tests:
    $ pytest tests/unit/netparse/test_netparse.py
    or
    $ python -m pytest tests/unit/netparse/test_netparse.py
"""

import pytest

from rxnsharp.config import Data
from rxnsharp.deps import genericlib_dedent_and_strip as dedent_and_strip
from rxnsharp.exceptions import ParseError
from rxnsharp.netmodel import RateExpr
from rxnsharp.netparse import format_number
from rxnsharp.netparse import format_rate
from rxnsharp.netparse import load_network
from rxnsharp.netparse import parse_network
from rxnsharp.netparse import serialize_network
from rxnsharp.netparse import tokenize

from tests.unit import gene_network
from tests.unit import network_of
from tests.unit import schlogl_network


class TestParseNetwork:
    """Parsing of valid sources."""

    def test_gene_file(self):
        """The shipped gene file parses to the expected reactions."""
        net = gene_network()
        assert net.name == 'gene'
        assert net.size == 3
        assert [rxn.rate for rxn in net.reactions] == [
            RateExpr(0.0, 3.0), RateExpr(50.0, -1.0), RateExpr(0.4, 0.0)
        ]
        assert [(rxn.s, rxn.r) for rxn in net.reactions] == [(0, 1), (0, 3), (1, -1)]
        assert net.k_range == (0.0, 50.0)
        assert net.k_default == 0.0

    def test_schlogl_file(self):
        """The shipped Schlogl file parses to the expected reactions."""
        net = schlogl_network()
        assert net.size == 7
        assert net.reactions[3].rate == RateExpr(1e-4, 0.0)
        assert [rxn.rate for rxn in net.reactions[4:]] == [RateExpr(0.0, 1.0)] * 3
        assert net.k_range == (0.0, 10.0)

    def test_expression_algebra(self):
        source = dedent_and_strip("""
            param a = 2
            param b = 0.5
            control K range 0 4 default 1
            reaction 0 -> 1 @ a*(K + 3) - b*K   # trailing comment
            reaction 1 -> 0 @ -(-a) * 2
        """)
        net = parse_network(source)
        assert net.reactions[0].rate == RateExpr(6.0, 1.5)
        assert net.reactions[1].rate == RateExpr(4.0, 0.0)
        assert net.k_default == 1.0

    def test_scientific_notation_and_initial_state(self):
        source = dedent_and_strip("""
            network decay
            initial 12
            reaction 2 -> 1 @ 1.5e-3
        """)
        net = parse_network(source)
        assert net.name == 'decay'
        assert net.initial_state == 12
        assert net.reactions[0].rate.base == pytest.approx(1.5e-3)

    def test_name_fallback(self):
        """A source without a network line takes the given name."""
        net = parse_network('reaction 0 -> 1 @ 2', name='fallback')
        assert net.name == 'fallback'
        assert net.k_range == (0.0, 0.0)

    def test_k_minus_k_is_affine(self):
        """Terms in K that cancel leave a constant rate."""
        net = parse_network('control K range 0 1 default 0\nreaction 0 -> 1 @ 1 + K - K')
        assert net.reactions[0].rate == RateExpr(1.0, 0.0)


class TestParseErrors:
    """Positioned parse errors."""

    @pytest.mark.parametrize(
        "source, kind, line, column",
        [
            ("reaction 0 -> 1 @ K*K", 'nonaffine_rate', 1, 20),
            ("control K range 0 1 default 0\nreaction 0 -> 1 @ K*(K - K)", 'nonaffine_rate', 2, 20),
            ("reaction 0 -> 1 @ beta", 'unknown_identifier', 1, 19),
            ("reaction 0 -> 1 @ 2 / 3", 'syntax', 1, 21),
            ("reaction 0 -> 1 2", 'syntax', 1, 17),
            ("reaction 0 -> 1 @", 'syntax', 1, 18),
            ("reactions 0 -> 1 @ 1", 'syntax', 1, 1),
            ("param K = 3", 'syntax', 1, 7),
            ("param a = 1\nparam a = 2", 'syntax', 2, 7),
            ("reaction 1 -> 1 @ 1", 'syntax', 1, 15),
            ("reaction 1.5 -> 2 @ 1", 'syntax', 1, 10),
        ],
    )
    def test_error_kind_and_position(self, source, kind, line, column):
        """Errors carry their kind, line and column."""
        with pytest.raises(ParseError) as exc_info:
            parse_network(source)
        error = exc_info.value
        assert error.kind == kind
        assert (error.line, error.column) == (line, column)
        assert str(error).startswith(f"line {line}, column {column}:")

    def test_negative_rate_over_range(self):
        source = dedent_and_strip("""
            param alpha = 50
            control K range 0 60 default 0
            reaction 0 -> 1 @ 3*K
            reaction 0 -> 3 @ alpha - K
            reaction 1 -> 0 @ 0.4
        """)
        with pytest.raises(ParseError) as exc_info:
            parse_network(source)
        error = exc_info.value
        assert error.kind == 'range'
        assert (error.line, error.column) == (4, 19)
        assert 'rate negative at K=60' in error.message

    def test_default_outside_range_points_at_control(self):
        """A default outside the range points at the control line."""
        source = "reaction 0 -> 1 @ 1\ncontrol K range 0 1 default 3"
        with pytest.raises(ParseError) as exc_info:
            parse_network(source)
        assert exc_info.value.kind == 'range'
        assert (exc_info.value.line, exc_info.value.column) == (2, 1)

    def test_absorbing_zero_is_a_range_error(self):
        """An absorbing zero is reported as a validation error."""
        net = parse_network("reaction 0 -> 1 @ 1\nreaction 2 -> 0 @ 1\nreaction 3 -> 0 @ 1")
        assert net.size == 3
        with pytest.raises(ParseError) as exc_info:
            parse_network("reaction 1 -> 0 @ 1")
        assert exc_info.value.kind == 'range'
        assert 'state 0 absorbing' in exc_info.value.message

    def test_unexpected_character(self):
        """Unknown characters are lexical errors."""
        with pytest.raises(ParseError) as exc_info:
            tokenize("reaction 0 -> 1 @ 2 % 3", 7)
        assert (exc_info.value.line, exc_info.value.column) == (7, 21)

    def test_unknown_kind_is_rejected(self):
        """Parse errors only take known kinds."""
        with pytest.raises(ValueError):
            ParseError(1, 1, 'message', 'other')


class TestSerializeNetwork:
    """Canonical serialization."""

    def test_gene_golden(self):
        expected = dedent_and_strip("""
            network gene
            param alpha = 50
            param k3 = 0.4
            control K range 0 50 default 0
            reaction 0 -> 1 @ 3*K
            reaction 0 -> 3 @ 50 - K
            reaction 1 -> 0 @ 0.4
        """) + '\n'
        assert serialize_network(gene_network()) == expected

    def test_single_reaction(self):
        """A one-line source is a network."""
        text = serialize_network(network_of((0, 1, 1.0, 0.0), name=''))
        assert text == 'control K range 0 0 default 0\nreaction 0 -> 1 @ 1\n'

    def test_schlogl_has_seven_reactions(self):
        """The Schlogl file holds four base and three control reactions."""
        lines = serialize_network(schlogl_network()).splitlines()
        assert len([line for line in lines if line.startswith('reaction ')]) == 7

    @pytest.mark.parametrize("loader", [gene_network, schlogl_network])
    def test_round_trip(self, loader):
        """Serializing and parsing gives back the same network."""
        net = loader()
        assert parse_network(serialize_network(net)) == net

    def test_round_trip_with_initial_state(self):
        """The initial state survives serialization."""
        net = network_of((1, 0, 0.1, 0.25), (0, 2, 3.0, -0.5), k_range=(0, 6),
                         k_default=2, initial_state=40, name='mixed')
        assert parse_network(serialize_network(net)) == net

    @pytest.mark.parametrize(
        "value, expected",
        [
            (0.0, '0'),
            (-0.0, '0'),
            (50.0, '50'),
            (0.4, '0.4'),
            (1e-4, '0.0001'),
            (1e-7, '1e-07'),
            (-2.5, '-2.5'),
        ],
    )
    def test_format_number(self, value, expected):
        """Numbers are written in their shortest exact form."""
        assert format_number(value) == expected

    @pytest.mark.parametrize(
        "rate, expected",
        [
            (RateExpr(0.0, 1.0), 'K'),
            (RateExpr(0.0, -1.0), '-K'),
            (RateExpr(0.0, 3.0), '3*K'),
            (RateExpr(50.0, -1.0), '50 - K'),
            (RateExpr(2.0, 0.5), '2 + 0.5*K'),
            (RateExpr(0.4, 0.0), '0.4'),
        ],
    )
    def test_format_rate(self, rate, expected):
        """Rates are written as base and K terms."""
        assert format_rate(rate) == expected


class TestLoadNetwork:
    """File loading."""

    def test_shipped_networks_exist(self):
        """Both reference files are installed with the package."""
        assert Data.network_path('gene').is_file()
        assert Data.network_path('schlogl').is_file()

    def test_stem_is_default_name(self, tmp_path):
        """A file without a network line is named after its stem."""
        path = tmp_path / 'toy.rxn'
        path.write_text('reaction 0 -> 1 @ 2\nreaction 1 -> 0 @ 1\n', encoding='utf-8')
        assert load_network(path).name == 'toy'
        assert load_network(path, name='other').name == 'other'

    def test_missing_file(self, tmp_path):
        """Loading a missing file raises OSError."""
        with pytest.raises(FileNotFoundError):
            load_network(tmp_path / 'absent.rxn')
