"""
rxnsharp.main
=============

Entry point for the rxnsharp command-line interface (CLI).

This module parses command-line arguments, resolves the run configuration
and dispatches to the analysis, density, simulation, sweep, comparison and
perturbation commands. Every command writes plot-ready CSV or JSON files
with a JSON sidecar recording the resolved configuration.

Purpose
-------
- Provide a CLI over the network parser, the CFPE analysis, the stochastic
  simulator and the exact CME oracle.
- Map failures to stable exit codes: 2 for parse errors, 3 for analysis and
  validation errors, 4 for I/O errors.

Notes
-----
- Errors are reported on stderr as ``*** ErrorType: message``.
- ``--version`` and ``--dependency`` exit through `sys_exit` before any
  command runs.
"""

import argparse
import logging
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from rxnsharp.deps import genericlib_sys_exit as sys_exit
from rxnsharp.deps import genericlib_decorate_list_of_line as decorate_list_of_line

from rxnsharp import cfpe
from rxnsharp import oracle
from rxnsharp import report
from rxnsharp import sharpness
from rxnsharp import ssa
from rxnsharp.config import Data
from rxnsharp.config import RunConfig
from rxnsharp.config import parse_k_values
from rxnsharp.exceptions import ConfigError
from rxnsharp.exceptions import ParseError
from rxnsharp.exceptions import RxnSharpError
from rxnsharp.netmodel import Convention
from rxnsharp.netparse import format_number
from rxnsharp.netparse import load_network

logger = logging.getLogger(__file__)

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_ANALYSIS = 3
EXIT_IO = 4


def show_dependency(options):
    """
    Display dependency information and exit when ``--dependency`` is set.

    Parameters
    ----------
    options : argparse.Namespace
        Parsed command-line arguments.
    """
    if options.dependency:
        from platform import uname
        from platform import python_version

        os_name = uname().system
        os_release = uname().release
        py_ver = python_version()
        lst = [
            Data.main_app_text,
            f'Platform: {os_name} {os_release} - Python {py_ver}',
            '--------------------',
            'Dependencies:'
        ]

        for pkg in Data.get_dependency().values():
            lst.append(f'  + Package: {pkg["package"]}')
            lst.append(f'             {pkg["url"]}')

        msg = decorate_list_of_line(lst)
        sys_exit(success=True, msg=msg)


def show_version(options):
    """Display the application version and exit when ``--version`` is set."""
    if options.version:
        from rxnsharp import version
        sys_exit(success=True, msg=f"rxnsharp {version}")


def parse_perturbation(text: str) -> tuple:
    """
    Parse ``INDEX=VALUE`` into a 0-based reaction index and a rate shift.

    Raises
    ------
    ConfigError
        If the text is not of that form.
    """
    index, sep, value = str(text).partition('=')
    try:
        if not sep:
            raise ValueError('missing "="')
        return int(index), float(value)
    except ValueError as ex:
        raise ConfigError(f"invalid perturbation {text!r}; expected INDEX=VALUE") from ex


def k_label(k: float) -> str:
    return f'K{format_number(k)}'


def resolve_input(path: str) -> Path:
    """
    Locate a network file; bare names of shipped reference networks
    (``gene``, ``schlogl.rxn``) resolve to the packaged copies.
    """
    candidate = Path(path)
    if candidate.is_file():
        return candidate
    shipped = Data.network_path(Path(path).stem)
    if shipped.is_file() and candidate.parent == Path('.'):
        return shipped
    return candidate


class Cli:
    """
    Command-line interface handler for rxnsharp.

    Attributes
    ----------
    parser : argparse.ArgumentParser
        Argument parser with one sub-parser per command.
    options : argparse.Namespace
        Parsed command-line arguments.
    config : RunConfig or None
        Resolved configuration, set by `resolve_config`.
    network : ReactionNetwork or None
        Parsed input network.

    Methods
    -------
    run() -> int
        Execute the selected command and return its exit code.
    """

    logger = logger

    def __init__(self, argv=None):
        parser = argparse.ArgumentParser(
            prog='rxnsharp',
            usage='%(prog)s [options] command network.rxn [command options]',
            description='%(prog)s: peak sharpness analysis and simulation of '
                        'univariate stochastic reaction networks',
        )

        parser.add_argument(
            '-d', '--dependency', action='store_true',
            help="Display rxnsharp dependencies and package information"
        )

        parser.add_argument(
            '-v', '--version', action='store_true',
            help="Show the current rxnsharp version"
        )

        parser.add_argument(
            '--verbose', action='store_true',
            help="Log debug messages to stderr"
        )

        common = argparse.ArgumentParser(add_help=False)
        common.add_argument('input', help="Network file in .rxn format, or a shipped network name")
        common.add_argument('--K', dest='k_values', default='',
                            help="Control values: single, list 'a,b,c' or inclusive range 'a:b:n'")
        common.add_argument('--h', type=float, default=Data.grid_step,
                            help="Grid step of the CFPE density (default: %(default)s)")
        common.add_argument('--x-max', type=float, dest='x_max', default=None,
                            help="Right end of the density grid / CME truncation")
        common.add_argument('--convention', choices=[c.value for c in Convention],
                            default=Convention.CONTINUOUS.value,
                            help="Propensity convention of the CFPE analysis")
        common.add_argument('--interp', dest='interpolation', choices=list(sharpness.INTERPOLATIONS),
                            default=Data.interpolation,
                            help="Peak interpolation of lambda profiles: quadratic in the log-density "
                                 "(default) or linear between the bracketing grid points")
        common.add_argument('--cells', type=int, dest='n_cells', default=None,
                            help="Number of simulated cells")
        common.add_argument('--t-end', type=float, dest='t_end', default=None,
                            help="Simulation horizon (minutes)")
        common.add_argument('--x0', type=int, default=None,
                            help="Initial copy number of every cell")
        common.add_argument('--seed', type=int, dest='base_seed', default=Data.default_seed,
                            help="Base seed of the ensemble (default: %(default)s)")
        common.add_argument('--workers', type=int, default=1,
                            help="Worker processes for the simulation")
        common.add_argument('-o', '--output-dir', dest='output_dir', default=None,
                            help=f"Output directory (default: ${Data.output_dir_env} or '.')")
        common.add_argument('--config', type=str, default='',
                            help="Inline overrides, e.g. 'h: 0.05, n_cells: 2000'")

        subparsers = parser.add_subparsers(dest='command', metavar='command')
        subparsers.add_parser('analyze', parents=[common],
                              help="Drift, diffusion, extrema and sharpening verdicts")
        subparsers.add_parser('density', parents=[common],
                              help="Stationary CFPE density per K")
        simulate = subparsers.add_parser('simulate', parents=[common],
                                         help="Gillespie ensemble histogram per K")
        simulate.add_argument('--time-series', action='store_true', dest='time_series',
                              help="Also write sampled trajectories")
        simulate.add_argument('--ts-step', type=float, dest='ts_step',
                              default=Data.time_series_step,
                              help="Sampling step of the time series (default: %(default)s)")
        sweep = subparsers.add_parser('sweep', parents=[common],
                                      help="Long-format metrics over a K range")
        sweep.add_argument('--at', action='append', default=[], dest='lambda_at',
                           help="x position(s) where lambda is reported; repeatable or comma list")
        sweep.add_argument('--with-ssa', action='store_true', dest='with_ssa',
                           help="Add ensemble region masses and std to the sweep")
        subparsers.add_parser('compare', parents=[common],
                              help="SSA vs CME oracle vs binned CFPE")
        perturb = subparsers.add_parser('perturb', parents=[common],
                                        help="Robustness of peaks to rate perturbations")
        perturb.add_argument('--delta', type=float, default=None,
                             help="Shift of the 1 -> 0 control rate (controlled Schlogl layout)")
        perturb.add_argument('--epsilon', type=float, default=None,
                             help="Shift of the 1 -> 2 control rate (controlled Schlogl layout)")
        perturb.add_argument('--perturb', action='append', default=[],
                             help="INDEX=VALUE shift of a base rate, 0-based; repeatable")

        self.parser = parser
        self.options = self.parser.parse_args(argv)
        self.config = None
        self.network = None

    def resolve_config(self) -> RunConfig:
        """Build the `RunConfig` from flags, then apply ``--config`` overrides."""
        opts = self.options
        lambda_at = []
        for item in getattr(opts, 'lambda_at', []):
            lambda_at.extend(float(v) for v in str(item).split(',') if v.strip())
        perturb = tuple(parse_perturbation(item) for item in getattr(opts, 'perturb', []))
        cfg = RunConfig(
            command=opts.command,
            input_path=str(opts.input),
            k_values=parse_k_values(opts.k_values) if opts.k_values else (),
            h=opts.h,
            x_max=opts.x_max,
            n_cells=opts.n_cells,
            t_end=opts.t_end,
            x0=opts.x0,
            base_seed=opts.base_seed,
            convention=opts.convention,
            interpolation=opts.interpolation,
            output_dir=opts.output_dir or Data.default_output_dir(),
            workers=opts.workers,
            with_ssa=getattr(opts, 'with_ssa', False),
            lambda_at=tuple(lambda_at),
            time_series=getattr(opts, 'time_series', False),
            ts_step=getattr(opts, 'ts_step', Data.time_series_step),
            delta=getattr(opts, 'delta', None),
            epsilon=getattr(opts, 'epsilon', None),
            perturb=perturb,
        )
        cfg = cfg.with_overrides(opts.config)
        Convention.coerce(cfg.convention)
        if cfg.interpolation not in sharpness.INTERPOLATIONS:
            raise ConfigError(f"interpolation must be one of {', '.join(sharpness.INTERPOLATIONS)}, "
                              f"got {cfg.interpolation!r}")
        if cfg.h <= 0:
            raise ConfigError(f"grid step must be positive, got {cfg.h}")
        return cfg

    def load(self, cfg: RunConfig) -> RunConfig:
        """Parse the input network and fill in the default K."""
        self.network = load_network(resolve_input(cfg.input_path))
        if not cfg.k_values:
            cfg = replace(cfg, k_values=(self.network.k_default,))
        for k in cfg.k_values:
            self.network.check_k(k)
        return cfg

    @property
    def output_dir(self) -> Path:
        return Path(self.config.output_dir)

    def emit(self, payload: dict, name: str) -> Path:
        """Write a JSON report and echo it on stdout."""
        path = report.write_json(self.output_dir / name, payload)
        print(report.dumps_json(payload), end='')
        return path

    # commands

    def cmd_analyze(self):
        """
        Drift and diffusion coefficients, extrema and sharpening verdicts per K.

        With two or more K values and a K-free drift, the per-region
        monotonicity check over the sorted K values is added.
        """
        cfg, net = self.config, self.network
        drift = cfpe.build_drift(net, cfg.convention)
        diffusion = cfpe.build_diffusion(net, cfg.convention)
        lemma = sharpness.check_lemma1(drift)
        results = []
        for k in cfg.k_values:
            x_max = cfpe.resolve_x_max(net, k, cfg.h, cfg.convention, cfg.x_max)
            ps = cfpe.find_extrema(net, k, cfg.convention, cfg.h, x_max)
            verdict = sharpness.check_theorem1(net, cfg.convention, x_max, cfg.h, k)
            entry = dict(K=k, x_max=x_max, A_coeffs=drift.at(k), B_coeffs=diffusion.at(k),
                         theorem1=verdict.to_dict())
            entry.update(ps.to_dict())
            entry['laplace_std'] = [cfpe.laplace_std(net, k, p, cfg.convention)
                                    for p in ps.peaks if p > 0]
            results.append(entry)

        payload = report.sidecar(
            cfg, network=net.name, lemma1=lemma,
            A_poly=drift.to_dict(), B_poly=diffusion.to_dict(),
            dKA=drift.dK().to_dict(), dKB=diffusion.dK().to_dict(),
            results=results,
        )
        if lemma and len(set(cfg.k_values)) >= 2:
            ks = sorted(set(cfg.k_values))
            mono = sharpness.verify_monotonicity(net, ks, cfg.convention, cfg.h, cfg.x_max,
                                                  interpolation=cfg.interpolation)
            payload['monotonicity'] = mono.to_dict()
        self.emit(payload, f'{net.name or "network"}_analyze.json')

    def cmd_density(self):
        """One ``x,density,log_density`` CSV per K with a JSON sidecar."""
        cfg, net = self.config, self.network
        for k in cfg.k_values:
            grid = cfpe.stationary_density(net, k, cfg.h, cfg.x_max, cfg.convention)
            stem = f'density_{k_label(k)}'
            report.density_csv(self.output_dir / f'{stem}.csv', grid)
            extra = dict(grid.to_dict(), argmax=grid.argmax_x, local_maxima=grid.local_maxima(),
                         mean=grid.mean, std=grid.std)
            report.write_json(self.output_dir / f'{stem}.json', report.sidecar(cfg, **extra))
            print(f'{stem}.csv: x_max={grid.x_max:g} argmax={grid.argmax_x:g}')

    def cmd_simulate(self):
        """Histogram CSV per K, optional time-series CSV, with sidecars."""
        cfg, net = self.config, self.network
        t_end = cfg.t_end if cfg.t_end is not None else Data.t_end_for(net.name)
        for k in cfg.k_values:
            hist = ssa.ensemble_histogram(net, k, cfg.x0, t_end,
                                          cfg.n_cells or Data.histogram_cells,
                                          cfg.base_seed, cfg.workers)
            stem = f'histogram_{k_label(k)}'
            report.histogram_csv(self.output_dir / f'{stem}.csv', hist)
            report.write_json(self.output_dir / f'{stem}.json',
                              report.sidecar(cfg, seed=cfg.base_seed, **hist.to_dict()))
            print(f'{stem}.csv: mean={hist.mean:.4g} std={hist.std:.4g} '
                  f'stationary={str(hist.stationary).lower()}')

            if cfg.time_series:
                times = np.arange(0.0, t_end + 0.5 * cfg.ts_step, cfg.ts_step)
                n_cells = cfg.n_cells or Data.time_series_cells
                samples = ssa.time_series(net, k, cfg.x0, times, n_cells,
                                          cfg.base_seed, cfg.workers)
                stem = f'timeseries_{k_label(k)}'
                report.time_series_csv(self.output_dir / f'{stem}.csv', times, samples)
                report.write_json(
                    self.output_dir / f'{stem}.json',
                    report.sidecar(cfg, K=k, seed=cfg.base_seed, t_end=t_end, n_cells=n_cells,
                                   std_by_time=samples.std(axis=0, ddof=1) if n_cells > 1 else [])
                )

    def cmd_sweep(self):
        """Long-format ``K,region,metric,value`` rows over all requested K."""
        cfg, net = self.config, self.network
        x_max = cfg.x_max or sharpness.common_x_max(net, cfg.k_values, cfg.h, cfg.convention)
        t_end = cfg.t_end if cfg.t_end is not None else Data.t_end_for(net.name)
        rows = []
        for k in cfg.k_values:
            grid = cfpe.stationary_density(net, k, cfg.h, x_max, cfg.convention)
            ps = cfpe.find_extrema(net, k, cfg.convention, cfg.h, x_max)
            bounds = ps.regions
            for i, ((lo, hi), peak) in enumerate(zip(bounds, ps.peaks), start=1):
                mass, _, std = grid.region_moments(lo, hi)
                rows.extend([(k, i, 'peak', peak), (k, i, 'mass', mass), (k, i, 'std', std)])
            for x in cfg.lambda_at:
                i = ps.region_of(x) + 1
                profile = sharpness.lambda_profile(grid, ps, i, cfg.interpolation)
                rows.append((k, i, f'lambda@{format_number(x)}', float(profile.at(x))))
            if cfg.with_ssa:
                hist = ssa.ensemble_histogram(net, k, cfg.x0, t_end,
                                              cfg.n_cells or Data.histogram_cells,
                                              cfg.base_seed, cfg.workers)
                for i, stat in enumerate(oracle.region_stats(hist, bounds), start=1):
                    rows.extend([(k, i, 'ssa_mass', stat.mass), (k, i, 'ssa_std', stat.std)])
        report.sweep_csv(self.output_dir / 'sweep.csv', rows)
        report.write_json(self.output_dir / 'sweep.json',
                          report.sidecar(cfg, network=net.name, x_max=x_max, rows=len(rows)))
        print(f'sweep.csv: {len(rows)} rows')

    def cmd_compare(self):
        """TV distances and region masses of SSA, CME oracle and binned CFPE per K."""
        cfg, net = self.config, self.network
        t_end = cfg.t_end if cfg.t_end is not None else Data.t_end_for(net.name)
        for k in cfg.k_values:
            trunc = (int(math.ceil(cfg.x_max)) if cfg.x_max
                     else oracle.default_truncation(net, k))
            vector = oracle.cme_stationary(net, k, trunc)
            grid = cfpe.stationary_density(net, k, cfg.h, cfg.x_max, cfg.convention)
            ps = cfpe.find_extrema(net, k, cfg.convention, cfg.h, grid.x_max)
            bounds = ps.regions
            binned = cfpe.bin_density(grid, trunc + 1)
            hist = ssa.ensemble_histogram(net, k, cfg.x0, t_end,
                                          cfg.n_cells or Data.histogram_cells,
                                          cfg.base_seed, cfg.workers)
            ssa_oracle = oracle.compare_distributions(hist, vector, bounds)
            cfpe_oracle = oracle.compare_distributions(binned, vector, bounds)
            ssa_cfpe = oracle.compare_distributions(hist, binned, bounds)
            table = [dict(index=i, lo=lo, hi=hi, mass_ssa=a[2], mass_oracle=a[3], mass_cfpe=b[2])
                     for i, ((lo, hi), a, b) in enumerate(
                         zip(bounds, ssa_oracle.region_masses, cfpe_oracle.region_masses), start=1)]
            payload = report.sidecar(
                cfg, K=k, seed=cfg.base_seed, t_end=t_end,
                tv=dict(ssa_oracle=ssa_oracle.tv, cfpe_oracle=cfpe_oracle.tv,
                        ssa_cfpe=ssa_cfpe.tv),
                regions=table,
                oracle=vector.to_dict(),
                modality=dict(cfpe=ps.modality, oracle=oracle.discrete_extrema(vector).modality),
                ssa=hist.to_dict(),
            )
            report.stationary_csv(self.output_dir / f'stationary_{k_label(k)}.csv', vector)
            self.emit(payload, f'compare_{k_label(k)}.json')

    def cmd_perturb(self):
        """Perturbation robustness report at the first requested K."""
        cfg, net = self.config, self.network
        perturbations = dict(cfg.perturb)
        if cfg.delta is not None or cfg.epsilon is not None:
            layout = sharpness.schlogl_controls(net)
            if layout is None:
                raise ConfigError("--delta/--epsilon need the controlled Schlogl layout; use --perturb")
            if cfg.delta is not None:
                perturbations[layout[0]] = perturbations.get(layout[0], 0.0) + cfg.delta
            if cfg.epsilon is not None:
                perturbations[layout[1]] = perturbations.get(layout[1], 0.0) + cfg.epsilon
        k = cfg.k_values[0]
        result = sharpness.perturb_analysis(net, k, perturbations, cfg.convention, cfg.h, cfg.x_max)
        verdict = sharpness.check_theorem1(net, cfg.convention, cfg.x_max, cfg.h, k)
        payload = report.sidecar(cfg, K=k, network=net.name, perturbation=result.to_dict(),
                                 **verdict.to_dict())
        self.emit(payload, f'perturb_{k_label(k)}.json')

    def dispatch(self):
        getattr(self, f'cmd_{self.options.command}')()

    def run(self) -> int:
        """
        Execute the CLI workflow.

        Returns
        -------
        int
            0 on success, 2 on parse errors, 3 on analysis or validation
            errors, 4 on I/O errors.
        """
        show_version(self.options)
        show_dependency(self.options)
        if self.options.verbose:
            logging.basicConfig(level=logging.DEBUG)
        if not self.options.command:
            self.parser.print_help()
            sys_exit(success=False)

        try:
            self.config = self.load(self.resolve_config())
            self.dispatch()
        except ParseError as ex:
            return self.fail(EXIT_PARSE, ex)
        except (RxnSharpError, ValueError) as ex:
            return self.fail(EXIT_ANALYSIS, ex)
        except OSError as ex:
            return self.fail(EXIT_IO, ex)
        return EXIT_OK

    def fail(self, code: int, ex: Exception) -> int:
        print(f"*** {type(ex).__name__}: {ex}", file=sys.stderr)
        self.logger.debug('exit %d after %s', code, type(ex).__name__)
        return code


def execute(argv=None):
    """
    Entry point of the ``rxnsharp`` console script.

    Runs `Cli` and exits with its return code.
    """
    app = Cli(argv)
    sys.exit(app.run())
