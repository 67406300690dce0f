"""
rxnsharp.netparse
=================

Reader and writer for the line-oriented ``.rxn`` network format.

Grammar
-------
Comments start with ``#``. One statement per line::

    network NAME
    param NAME = NUMBER
    control K range LO HI default D
    initial N
    reaction S -> T @ EXPR

``S`` and ``T`` are nonnegative integers (``s = S``, ``r = T - S``). ``EXPR``
is arithmetic over numbers, declared parameter names and the literal ``K``
using ``+``, ``-``, ``*`` and parentheses. Every rate must reduce to an
affine function of ``K``; the degree in ``K`` is computed syntactically, so
``K*(K - K)`` is rejected even though it evaluates to zero.

Notes
-----
- Errors are raised as `ParseError` with a 1-based line and column.
- `serialize_network` writes the canonical form: parameters sorted by name,
  shortest round-trip numbers, rates with parameters substituted.
"""

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from rxnsharp.deps import genericlib_file_module as file

from rxnsharp.exceptions import ParseError
from rxnsharp.netmodel import RateExpr
from rxnsharp.netmodel import Reaction
from rxnsharp.netmodel import ReactionNetwork
from rxnsharp.netmodel import validate_network

import logging
logger = logging.getLogger(__file__)

TOKEN_PATTERN = re.compile(
    r'(?P<ws>\s+)'
    r'|(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)'
    r'|(?P<name>[A-Za-z_]\w*)'
    r'|(?P<arrow>->)'
    r'|(?P<op>[-+*()@=])'
)

KEYWORDS = ('network', 'param', 'control', 'initial', 'reaction')


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


@dataclass(frozen=True)
class Affine:
    """Value ``base + slope * K`` with its syntactic degree in K."""
    base: float
    slope: float
    degree: int

    def __add__(self, other):
        return Affine(self.base + other.base, self.slope + other.slope,
                      max(self.degree, other.degree))

    def __neg__(self):
        return Affine(-self.base, -self.slope, self.degree)

    def __sub__(self, other):
        return self + (-other)


def tokenize(text: str, line: int) -> list:
    """
    Split one source line (comment already removed) into tokens.

    Raises
    ------
    ParseError
        On a character that starts no token.
    """
    tokens = []
    pos = 0
    while pos < len(text):
        match = TOKEN_PATTERN.match(text, pos)
        if not match:
            raise ParseError(line, pos + 1, f"unexpected character {text[pos]!r}", 'syntax')
        kind = match.lastgroup
        if kind != 'ws':
            tokens.append(Token(kind, match.group(), line, pos + 1))
        pos = match.end()
    return tokens


class LineParser:
    """
    Recursive-descent parser over the tokens of one statement.

    Parameters
    ----------
    tokens : list of Token
        Tokens of the statement.
    line : int
        Source line, used for end-of-line error positions.
    end_column : int
        Column just past the last character of the line.
    params : dict
        Parameters declared so far.
    """
    def __init__(self, tokens, line, end_column, params):
        self.tokens = tokens
        self.line = line
        self.end_column = end_column
        self.params = params
        self.index = 0

    def peek(self) -> Optional[Token]:
        return self.tokens[self.index] if self.index < len(self.tokens) else None

    def error(self, message, token=None, kind='syntax'):
        token = token or self.peek()
        column = token.column if token else self.end_column
        return ParseError(self.line, column, message, kind)

    def next(self, expected: str = '') -> Token:
        token = self.peek()
        if token is None:
            raise self.error(f"expected {expected or 'more input'}, found end of line")
        self.index += 1
        return token

    def expect(self, kind: str, text: Optional[str] = None) -> Token:
        label = repr(text) if text else kind
        token = self.next(label)
        if token.kind != kind or (text is not None and token.text != text):
            self.index -= 1
            raise self.error(f"expected {label}, found {token.text!r}", token)
        return token

    def at_end(self):
        token = self.peek()
        if token is not None:
            raise self.error(f"unexpected {token.text!r} after statement", token)

    def signed_number(self) -> float:
        sign = 1.0
        token = self.peek()
        if token is not None and token.kind == 'op' and token.text in '+-':
            self.index += 1
            sign = -1.0 if token.text == '-' else 1.0
        return sign * float(self.expect('number').text)

    def count(self) -> tuple:
        token = self.expect('number')
        if not token.text.isdigit():
            raise self.error(f"expected a nonnegative integer, found {token.text!r}", token)
        return int(token.text), token

    # EXPR := TERM (('+' | '-') TERM)*
    def expression(self) -> Affine:
        value = self.term()
        while True:
            token = self.peek()
            if token is None or token.kind != 'op' or token.text not in '+-':
                return value
            self.index += 1
            other = self.term()
            value = value + other if token.text == '+' else value - other

    # TERM := FACTOR ('*' FACTOR)*
    def term(self) -> Affine:
        value = self.factor()
        while True:
            token = self.peek()
            if token is None or token.kind != 'op' or token.text != '*':
                return value
            self.index += 1
            other = self.factor()
            degree = value.degree + other.degree
            if degree > 1:
                raise self.error("rate is not affine in K", token, 'nonaffine_rate')
            value = Affine(value.base * other.base,
                           value.base * other.slope + value.slope * other.base,
                           degree)

    # FACTOR := ('+' | '-') FACTOR | NUMBER | NAME | 'K' | '(' EXPR ')'
    def factor(self) -> Affine:
        token = self.next('an expression')
        if token.kind == 'op' and token.text in '+-':
            value = self.factor()
            return -value if token.text == '-' else value
        if token.kind == 'number':
            return Affine(float(token.text), 0.0, 0)
        if token.kind == 'name':
            if token.text == 'K':
                return Affine(0.0, 1.0, 1)
            if token.text not in self.params:
                raise self.error(f"unknown identifier {token.text!r}", token, 'unknown_identifier')
            return Affine(self.params[token.text], 0.0, 0)
        if token.kind == 'op' and token.text == '(':
            value = self.expression()
            self.expect('op', ')')
            return value
        self.index -= 1
        raise self.error(f"unexpected {token.text!r} in expression", token)


@dataclass
class _Positions:
    """Source positions remembered for mapping validation failures."""
    first: tuple = (1, 1)
    control: Optional[tuple] = None
    initial: Optional[tuple] = None
    reactions: tuple = ()
    rates: tuple = ()


def parse_network(source: str, name: str = '') -> ReactionNetwork:
    """
    Parse ``.rxn`` text into a validated network.

    Parameters
    ----------
    source : str
        The network source.
    name : str, optional
        Fallback network name when the source has no ``network`` statement.

    Returns
    -------
    ReactionNetwork
        A network satisfying every `validate_network` rule.

    Raises
    ------
    ParseError
        ``syntax`` for grammar violations, ``nonaffine_rate`` for rates of
        degree above one in K, ``unknown_identifier`` for undeclared
        parameters and ``range`` when the parsed network fails validation.
    """
    params = {}
    reactions = []
    control = None
    initial = None
    positions = _Positions()
    reaction_positions = []
    rate_positions = []
    seen_statement = False

    for line_no, raw in enumerate(str(source).splitlines(), start=1):
        text = raw.split('#', 1)[0].rstrip()
        tokens = tokenize(text, line_no)
        if not tokens:
            continue
        parser = LineParser(tokens, line_no, len(text) + 1, params)
        keyword = parser.next()
        if keyword.kind != 'name' or keyword.text not in KEYWORDS:
            raise parser.error(f"unknown statement {keyword.text!r}", keyword)
        if not seen_statement:
            positions.first = (line_no, keyword.column)
            seen_statement = True

        if keyword.text == 'network':
            name = parser.expect('name').text
        elif keyword.text == 'param':
            token = parser.expect('name')
            if token.text == 'K' or token.text in KEYWORDS:
                raise parser.error(f"reserved name {token.text!r}", token)
            if token.text in params:
                raise parser.error(f"parameter {token.text!r} already declared", token)
            parser.expect('op', '=')
            params[token.text] = parser.signed_number()
        elif keyword.text == 'control':
            if control is not None:
                raise parser.error("control parameter already declared", keyword)
            parser.expect('name', 'K')
            parser.expect('name', 'range')
            lo = parser.signed_number()
            hi = parser.signed_number()
            parser.expect('name', 'default')
            control = (lo, hi, parser.signed_number())
            positions.control = (line_no, keyword.column)
        elif keyword.text == 'initial':
            if initial is not None:
                raise parser.error("initial state already declared", keyword)
            initial, _ = parser.count()
            positions.initial = (line_no, keyword.column)
        else:
            s, s_token = parser.count()
            parser.expect('arrow')
            t, t_token = parser.count()
            if s == t:
                raise parser.error("reaction does not change the copy number", t_token)
            at_token = parser.expect('op', '@')
            start = parser.peek() or at_token
            value = parser.expression()
            reactions.append(Reaction(s, t - s, RateExpr(value.base, value.slope)))
            reaction_positions.append((line_no, s_token.column))
            rate_positions.append((line_no, start.column))
        parser.at_end()

    positions.reactions = tuple(reaction_positions)
    positions.rates = tuple(rate_positions)
    lo, hi, default = control if control is not None else (0.0, 0.0, 0.0)
    net = ReactionNetwork(name=name, reactions=tuple(reactions), k_range=(lo, hi),
                          k_default=default, params=tuple(params.items()),
                          initial_state=initial)
    report = validate_network(net)
    if report:
        violation = report[0]
        if violation.reaction_index is not None:
            table = positions.rates if violation.rule == 'rate nonnegative' else positions.reactions
            line, column = table[violation.reaction_index]
        elif violation.rule == 'k range' and positions.control:
            line, column = positions.control
        elif violation.rule == 'initial state' and positions.initial:
            line, column = positions.initial
        else:
            line, column = positions.first
        raise ParseError(line, column, str(violation), 'range')
    logger.debug('parsed network %r with %d reactions', net.name, net.size)
    return net


def format_number(value: float) -> str:
    """Shortest round-trip decimal, without a trailing ``.0``."""
    value = float(value)
    if value == 0:
        return '0'
    text = repr(value)
    return text[:-2] if text.endswith('.0') else text


def format_rate(rate: RateExpr) -> str:
    """Render a rate expression as ``base``, ``slope*K`` or ``base + slope*K``."""
    def k_term(slope):
        return 'K' if slope == 1 else f'{format_number(slope)}*K'

    if rate.slope == 0:
        return format_number(rate.base)
    if rate.base == 0:
        return '-K' if rate.slope == -1 else k_term(rate.slope)
    sign = '+' if rate.slope > 0 else '-'
    return f'{format_number(rate.base)} {sign} {k_term(abs(rate.slope))}'


def serialize_network(net: ReactionNetwork) -> str:
    """
    Write a network in canonical ``.rxn`` form.

    Parameters are written sorted by name; reactions keep declaration order
    with parameter values substituted into their rates. Parsing the result
    yields a network equal to `net`.
    """
    lines = []
    if net.name:
        lines.append(f'network {net.name}')
    for param_name, value in net.params:
        lines.append(f'param {param_name} = {format_number(value)}')
    lo, hi = net.k_range
    lines.append(f'control K range {format_number(lo)} {format_number(hi)} '
                 f'default {format_number(net.k_default)}')
    if net.initial_state is not None:
        lines.append(f'initial {net.initial_state}')
    for rxn in net.reactions:
        lines.append(f'reaction {rxn.s} -> {rxn.product} @ {format_rate(rxn.rate)}')
    return '\n'.join(lines) + '\n'


def load_network(path, name: Optional[str] = None) -> ReactionNetwork:
    """
    Read and parse a ``.rxn`` file.

    Parameters
    ----------
    path : str or Path
        Location of the file.
    name : str, optional
        Name to use when the file has no ``network`` statement. Defaults to
        the file stem.

    Raises
    ------
    FileNotFoundError
        If the file does not exist.
    ParseError
        If the content is not a valid network.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"network file not found: {path}")
    content = file.read(str(path))
    return parse_network(content, name=path.stem if name is None else name)
