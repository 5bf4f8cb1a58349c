import logging
import typing as tp
from pathlib import Path as p

import numpy as np

from burgulence.checkpoint import Scheme
from burgulence.config import ExperimentConfig
from burgulence.console import console, spinner
from burgulence.data import TrajectoryStream
from burgulence.db import RunDB
from burgulence.ensemble import RunStore
from burgulence.errors import ConfigurationError, OutputError
from burgulence.experiments import EXPERIMENTS, bracket_spec, ensemble
from burgulence.report import AcceptanceReport, ReportSection, emit_report, write_csv
from burgulence.utils import mytimer

log = logging.getLogger(__name__)


def _columns(stream: TrajectoryStream) -> tp.Tuple[tp.List[str], tp.List[np.ndarray]]:
    """one column per scalar entry of every probe; vector probes are flattened to name[i]"""
    names, cols = [], []
    for probe in stream.probes:
        series = stream.series(probe).reshape(len(stream), -1)
        if series.shape[1] == 1 and stream.series(probe).ndim == 1:
            names.append(probe)
            cols.append(series[:, 0])
            continue
        for i in range(series.shape[1]):
            names.append(f"{probe}[{i}]")
            cols.append(series[:, i])
    return names, cols


def cmd_simulate(cfg: ExperimentConfig) -> None:
    t = mytimer()
    store = RunStore(cfg.out)
    t_end = bracket_spec(cfg).t_end
    if cfg.model == "inviscid":
        runs = [(0.0, ensemble(cfg, "simulate", "godunov", 0.0, cfg.probes, t_end, store, scheme=Scheme.GODUNOV,
                               N=cfg.inviscid.N, cfl=cfg.inviscid.cfl))]
    else:
        scheme = Scheme.LINEARIZED if cfg.model == "linearized" else Scheme.SPECTRAL
        runs = [(nu, ensemble(cfg, "simulate", cfg.model, nu, cfg.probes, t_end, store, scheme=scheme))
                for nu in cfg.nu_list]
    n_files = 0
    for nu, streams in runs:
        for stream in streams:
            names, cols = _columns(stream)
            path = cfg.out / "simulate" / f"nu={nu:g}" / f"member_{stream.member:04d}.csv"
            try:
                write_csv(path, ["t", *names], zip(stream.times, *(c.tolist() for c in cols)))
            except OSError as e:
                raise OutputError(f"cannot write series {path}: {e.strerror}") from e
            n_files += 1
    console.print(f"[green] wrote {n_files} trajectories to {cfg.out / 'simulate'} in {t.get} sec")


def stored_sections(dbname: p) -> tp.List[ReportSection]:
    with RunDB(dbname) as db:
        return [ReportSection.from_dict(payload) for _, payload in db.get_sections()]


def cmd_experiment(name: str, cfg: ExperimentConfig) -> int:
    """
    run one experiment, store its section in the run store and rewrite the
    combined report. Returns the exit status of this experiment's laws.
    """
    if name not in EXPERIMENTS:
        raise ConfigurationError(f"unknown experiment '{name}'")
    t = mytimer()
    store = RunStore(cfg.out)
    section = EXPERIMENTS[name](cfg, store)
    with RunDB(store.dbname) as db:
        db.section_put(name, section.as_dict())
        db.commit()
    emit_report(stored_sections(store.dbname), cfg.out, console)
    console.print(f"[green] {name} finished in {t.get} sec")
    return AcceptanceReport([section]).exit_code


@spinner(console, "collecting report", done="report written")
def cmd_report(out: p) -> int:
    dbname = out / "runs.sqlite"
    if not dbname.exists():
        raise ConfigurationError(f"no run store at {dbname}, run an experiment first")
    return emit_report(stored_sections(dbname), out, console)
