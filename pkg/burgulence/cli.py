import functools
import sys
import typing as tp
from pathlib import Path as p

import rich_click as click

from burgulence.cmd import cmd_experiment, cmd_report, cmd_simulate
from burgulence.config import ExperimentConfig, cnf, load_config
from burgulence.console import console
from burgulence.errors import Error

F = tp.TypeVar('F', bound=tp.Callable[..., tp.Any])


def config_options(f: F) -> F:
    """--config plus the overrides every subcommand accepts"""
    f = click.option('-o', '--out', required=False, default=None, help='output directory, overrides the config', type=click.Path(path_type=p))(f)  # type: ignore
    f = click.option('-s', '--seed', required=False, default=None, type=int, help='base seed, overrides the config')(f)
    f = click.option('--nu', multiple=True, type=float, help='viscosity, repeatable; replaces nu_list')(f)
    f = click.option('-c', '--config', 'config', required=False, default=None, help='YAML experiment config', type=click.Path(exists=True, path_type=p))(f)  # type: ignore
    return f


def _config(config: tp.Optional[p], nu: tp.Tuple[float, ...], seed: tp.Optional[int], out: tp.Optional[p]) -> ExperimentConfig:
    return load_config(config, nu=nu, seed=seed, out=out)


def exits(f: F) -> F:
    """map burgulence errors to their exit status"""
    @functools.wraps(f)
    def wrapper(*args: tp.Any, **kwargs: tp.Any) -> tp.Any:
        try:
            status = f(*args, **kwargs)
        except Error as e:
            console.print(f"[red]{type(e).__name__}: {e}")
            sys.exit(e.exit_code)
        sys.exit(status or 0)
    return tp.cast(F, wrapper)


@click.group()
@click.option('-w', '--workers', required=False, default=None, type=int, help='worker threads per ensemble, overrides BURGULENCE_WORKERS')
@click.version_option()
def cli(workers: tp.Optional[int]) -> None:
    if workers is not None:
        cnf['WORKERS'] = max(1, workers)


@cli.command()
@config_options
@exits
def simulate(config: tp.Optional[p], nu: tp.Tuple[float, ...], seed: tp.Optional[int], out: tp.Optional[p]) -> None:
    """
    run one ensemble per viscosity and write the probe series of every member to CSV.
    """
    cmd_simulate(_config(config, nu, seed, out))


def _experiment(name: str, doc: str) -> None:
    @config_options
    @exits
    def command(config: tp.Optional[p], nu: tp.Tuple[float, ...], seed: tp.Optional[int], out: tp.Optional[p]) -> int:
        return cmd_experiment(name, _config(config, nu, seed, out))
    command.__doc__ = doc
    cli.command(name=name)(command)


_experiment('scaling', "Sobolev norms versus viscosity, energy balance and Oleinik moments.")
_experiment('spectrum', "layer-averaged energy spectrum, k^-2 law and dissipation scale.")
_experiment('structure', "structure functions in the inertial and dissipation ranges.")
_experiment('mixing', "coupled-noise L1 contraction and convergence to the stationary measure.")
_experiment('inviscid', "Godunov entropy solutions and the vanishing-viscosity limit.")


@cli.command()
@config_options
@exits
def report(config: tp.Optional[p], nu: tp.Tuple[float, ...], seed: tp.Optional[int], out: tp.Optional[p]) -> int:
    """
    re-emit the combined acceptance report from the sections stored in <out>/runs.sqlite.
    """
    return cmd_report(_config(config, nu, seed, out).out)
