"""
rxnsharp.config
===============

Configuration utilities for the rxnsharp library.

This module centralizes application-wide configuration values, numeric
defaults and the resolved run configuration used by the command-line
interface. It provides a single source of truth for tolerances, default
simulation protocols, file locations and dependency metadata.

Notes
-----
- Configuration values defined here are intended to be application-wide
  and should not be duplicated in other modules.
- `RunConfig` is immutable; overrides produce a new instance.
"""

import os
from dataclasses import asdict
from dataclasses import dataclass
from dataclasses import fields
from dataclasses import replace
from pathlib import Path
from typing import Optional

import numpy
import scipy
import yaml

from rxnsharp.deps import genericlib_version
from rxnsharp.exceptions import ConfigError

__version__ = '0.1.0'
version = __version__   # noqa
__edition__ = 'Community'
edition = __edition__

__all__ = [
    'version',
    'edition',
    'Data',
    'RunConfig',
    'parse_k_values',
]


class Data:
    """
    Centralized metadata and numeric defaults for rxnsharp.

    This class provides static attributes and helper methods that define
    application metadata, dependency information, analysis tolerances and
    default simulation protocols.
    """

    app_version = version

    # main app
    main_app_text = 'rxnsharp v{}'.format(version)

    # environment
    output_dir_env = 'RXNSHARP_OUTPUT_DIR'

    # packages
    numpy_text = 'numpy v{}'.format(numpy.__version__)
    numpy_link = 'https://pypi.org/project/numpy/'

    scipy_text = 'scipy v{}'.format(scipy.__version__)
    scipy_link = 'https://pypi.org/project/scipy/'

    genericlib_text = f"genericlib v{genericlib_version}"
    genericlib_link = "https://pypi.org/project/genericlib"

    pyyaml_text = 'pyyaml v{}'.format(yaml.__version__)
    pyyaml_link = 'https://pypi.org/project/PyYAML/'

    # CFPE analysis
    grid_step = 0.1
    bisection_tol = 1e-9
    degenerate_slope = 1e-12
    tail_ratio = 1e-12
    max_doublings = 12
    normalization_tol = 1e-6

    # sharpness
    monotonicity_tol = 1e-6
    interpolation = 'quadratic'
    negligible_ratio = 0.1

    # SSA protocol
    histogram_cells = 10000
    time_series_cells = 1000
    time_series_step = 0.5
    default_x0 = 0
    default_seed = 7
    default_t_end = 100.0
    t_end_by_network = dict(gene=50.0, schlogl=100.0)
    stationarity_tv = 0.02
    stationarity_bins = 10
    table_states = 1024
    uniform_block = 64

    # CME oracle
    truncation_mass = 1e-8
    transient_rtol = 1e-8
    transient_atol = 1e-12
    dust_floor = 1e-14

    # shipped reference networks
    networks_dir = Path(__file__).parent / 'networks'

    @classmethod
    def network_path(cls, name: str) -> Path:
        """
        Return the path of a reference network shipped with the package.

        Parameters
        ----------
        name : str
            Network stem, e.g. ``gene`` or ``schlogl``.

        Returns
        -------
        Path
            Path to ``<name>.rxn`` inside the package.
        """
        return cls.networks_dir / f'{name}.rxn'

    @classmethod
    def t_end_for(cls, network_name: str) -> float:
        """Default simulation horizon for a network (minutes)."""
        return cls.t_end_by_network.get(network_name, cls.default_t_end)

    @classmethod
    def default_output_dir(cls) -> str:
        """Output directory from the environment, or the current directory."""
        return os.environ.get(cls.output_dir_env, '') or '.'

    @classmethod
    def get_dependency(cls):
        """
        Return dependency metadata for the application.

        Returns
        -------
        dict
            A dictionary mapping dependency names to their metadata,
            including package display strings and PyPI URLs.
        """
        dependencies = dict(
            numpy=dict(
                package=cls.numpy_text,
                url=cls.numpy_link
            ),
            scipy=dict(
                package=cls.scipy_text,
                url=cls.scipy_link
            ),
            genericlib=dict(
                package=cls.genericlib_text,
                url=cls.genericlib_link
            ),
            pyyaml=dict(
                package=cls.pyyaml_text,
                url=cls.pyyaml_link
            )
        )
        return dependencies


def parse_k_values(text: str) -> tuple:
    """
    Parse the control values given on the command line.

    Parameters
    ----------
    text : str
        A single value (``"5"``), a comma-separated list (``"0,25,50"``) or
        an inclusive range ``"a:b:n"`` of ``n`` equally spaced values.

    Returns
    -------
    tuple of float
        The requested K values in the given order.

    Raises
    ------
    ConfigError
        If the text cannot be interpreted.
    """
    text = str(text).strip()
    if not text:
        raise ConfigError("empty K value list")
    try:
        if ':' in text:
            parts = text.split(':')
            if len(parts) != 3:
                raise ValueError("range needs the form a:b:n")
            lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
            if count < 1:
                raise ValueError("range count must be at least 1")
            if count == 1:
                return (lo,)
            return tuple(float(v) for v in numpy.linspace(lo, hi, count))
        return tuple(float(item) for item in text.split(',') if item.strip())
    except ValueError as ex:
        raise ConfigError(f"invalid K values {text!r}: {ex}") from ex


@dataclass(frozen=True)
class RunConfig:
    """
    Fully resolved settings of one command-line invocation.

    Every JSON sidecar embeds `to_dict()` of this object so each output file
    can be regenerated from its provenance.
    """
    command: str = ''
    input_path: str = ''
    k_values: tuple = ()
    h: float = Data.grid_step
    x_max: Optional[float] = None
    n_cells: Optional[int] = None
    t_end: Optional[float] = None
    x0: Optional[int] = None
    base_seed: int = Data.default_seed
    convention: str = 'continuous'
    interpolation: str = Data.interpolation
    output_dir: str = '.'
    workers: int = 1
    with_ssa: bool = False
    lambda_at: tuple = ()
    time_series: bool = False
    ts_step: float = Data.time_series_step
    delta: Optional[float] = None
    epsilon: Optional[float] = None
    perturb: tuple = ()

    def to_dict(self) -> dict:
        """Return a JSON-friendly dictionary of all settings."""
        payload = asdict(self)
        payload['k_values'] = list(self.k_values)
        payload['lambda_at'] = list(self.lambda_at)
        payload['perturb'] = [list(pair) for pair in self.perturb]
        return payload

    def with_overrides(self, text: str) -> 'RunConfig':
        """
        Apply inline ``key: value`` overrides given as YAML text.

        Parameters
        ----------
        text : str
            Inline YAML mapping, e.g. ``"h: 0.05, n_cells: 2000"``. Commas
            separate entries the way the `--config` flag accepts them.

        Returns
        -------
        RunConfig
            A new configuration with the overrides applied.

        Raises
        ------
        ConfigError
            If the text is not a mapping or names an unknown field.
        """
        if not text or not text.strip():
            return self
        content = '\n'.join(item.strip() for item in text.split(','))
        try:
            mapping = yaml.load(content, Loader=yaml.SafeLoader)
        except yaml.YAMLError as ex:
            raise ConfigError(f"invalid --config text: {ex}") from ex
        if not isinstance(mapping, dict):
            raise ConfigError(f"invalid --config text: {text!r}")

        known = {f.name for f in fields(self)}
        changes = {}
        for key, value in mapping.items():
            if key not in known:
                raise ConfigError(f"unknown configuration key {key!r}")
            try:
                changes[key] = self._coerce(key, value)
            except (TypeError, ValueError) as ex:
                raise ConfigError(f"invalid value for {key!r}: {value!r}") from ex
        return replace(self, **changes)

    @staticmethod
    def _coerce(key: str, value):
        """Convert one override value to the field's type."""
        if key == 'k_values':
            return parse_k_values(str(value))
        if key in ('h', 'x_max', 't_end', 'ts_step', 'delta', 'epsilon'):
            return None if value is None else float(value)
        if key in ('n_cells', 'x0', 'base_seed', 'workers'):
            return None if value is None else int(value)
        if key in ('with_ssa', 'time_series'):
            return bool(value)
        if key == 'lambda_at':
            items = value if isinstance(value, (list, tuple)) else str(value).split()
            return tuple(float(item) for item in items)
        if key == 'perturb':
            raise ConfigError("perturbations are given with --perturb, --delta and --epsilon")
        return str(value)
