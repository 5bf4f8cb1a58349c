import concurrent.futures
import logging
import typing as tp
from dataclasses import dataclass
from pathlib import Path as p

from more_itertools import chunked
from rich.logging import RichHandler
from rich.progress import Progress

from burgulence import inviscid, integrator
from burgulence.checkpoint import Scheme, read_checkpoint, write_checkpoint
from burgulence.config import cnf
from burgulence.console import console
from burgulence.data import Resume, TrajectoryStream
from burgulence.db import RunDB
from burgulence.errors import CheckpointError
from burgulence.fields import SpectralField
from burgulence.forcing import ForcingSpec
from burgulence.integrator import StepSchedule
from burgulence.probes import resolve_probes

FORMAT = "%(message)s"
logging.basicConfig(level=cnf['LOGLEVEL'], format=FORMAT, datefmt="[%X]", handlers=[
                    RichHandler(show_level=True, show_path=True, markup=True, console=console)])
log = logging.getLogger(__name__)


@dataclass(frozen=True)
class MemberJob:
    """one ensemble member: everything a worker needs, nothing shared but read-only values"""
    run: str
    scheme: Scheme
    spec: ForcingSpec
    sched: StepSchedule
    u0: tp.Union[SpectralField, inviscid.CellField]
    N: int
    nu: float = 0.0
    probes: tuple[str, ...] = ()
    p_list: tuple[float, ...] = ()
    shifts: tuple[int, ...] = ()
    checkpoint_every: int = 0
    checkpoint_dir: tp.Optional[p] = None
    dbname: tp.Optional[p] = None

    @property
    def member(self) -> int:
        return self.spec.member_id

    @property
    def checkpoint_path(self) -> tp.Optional[p]:
        if self.checkpoint_dir is None:
            return None
        return self.checkpoint_dir / f"{self.run.replace('/', '_')}.m{self.member:04d}.bgck"


def _persist(job: MemberJob, stream: TrajectoryStream, since: float, completed: bool = False) -> None:
    if job.dbname is None:
        return
    with RunDB(job.dbname) as db:
        db.samples_insert(job.run, stream.samples(since))
        db.set_member(job.run, job.member, completed)
        db.commit()


def _load(job: MemberJob, t_last: tp.Optional[float] = None) -> TrajectoryStream:
    assert job.dbname is not None
    with RunDB(job.dbname) as db:
        if t_last is not None:
            db.delete_samples_after(job.run, job.member, t_last)
            db.commit()
        samples = list(db.get_samples(job.run, job.member))
    return TrajectoryStream.from_samples(job.probes, job.member, samples)


def _resume(job: MemberJob) -> tp.Optional[Resume[tp.Any]]:
    path = job.checkpoint_path
    if path is None or job.dbname is None or not path.exists():
        return None
    ck = read_checkpoint(path)
    if ck.seed != job.spec.seed or ck.member_id != job.member or ck.N != job.N:
        raise CheckpointError(f"checkpoint {path} belongs to another run (seed={ck.seed}, member={ck.member_id}, N={ck.N})")
    stream = _load(job, ck.t)
    state = inviscid.from_checkpoint(ck) if job.scheme == Scheme.GODUNOV else integrator.from_checkpoint(ck)
    log.debug(f"resuming {job.run} member {job.member} at t={ck.t:.6g}")
    return Resume(state, ck.step_index, stream)


def run_member(job: MemberJob) -> TrajectoryStream:
    """
    run (or resume, or reload) one member. With a run store the samples are
    committed before every checkpoint, so a checkpoint never runs ahead of
    the stored stream.
    """
    if job.dbname is not None:
        with RunDB(job.dbname) as db:
            done = job.member in db.completed_members(job.run)
        if done:
            return _load(job)
    probes = resolve_probes(job.probes, p_list=job.p_list, shifts=job.shifts)
    resume = _resume(job)
    persisted = [resume.stream.times[-1] if resume is not None and len(resume.stream) else -1.0]

    def on_checkpoint(state: tp.Any, step_index: int, stream: TrajectoryStream) -> None:
        _persist(job, stream, persisted[0])
        persisted[0] = stream.times[-1] if len(stream) else persisted[0]
        path = job.checkpoint_path
        if path is not None:
            if job.scheme == Scheme.GODUNOV:
                ck = inviscid.to_checkpoint(state, job.spec, step_index)
            else:
                ck = integrator.to_checkpoint(state, job.spec, step_index, job.scheme == Scheme.SPECTRAL)
            write_checkpoint(path, ck)

    callback = on_checkpoint if job.checkpoint_every and (job.dbname or job.checkpoint_dir) else None
    if job.scheme == Scheme.GODUNOV:
        assert isinstance(job.u0, inviscid.CellField)
        stream = inviscid.simulate_inviscid(job.u0, job.spec, job.sched, probes, resume=resume,
                                            on_checkpoint=callback, checkpoint_every=job.checkpoint_every)
    else:
        assert isinstance(job.u0, SpectralField)
        stream = integrator.simulate(job.u0, job.nu, job.spec, job.sched, probes, N=job.N,
                                     nonlinear=job.scheme == Scheme.SPECTRAL, resume=resume,
                                     on_checkpoint=callback, checkpoint_every=job.checkpoint_every)
    _persist(job, stream, persisted[0], completed=True)
    return stream


def run_ensemble(jobs: tp.Sequence[MemberJob], label: str = "ensemble", workers: tp.Optional[int] = None) -> tp.List[TrajectoryStream]:
    """members in the order of jobs, whatever order they finish in"""
    workers = workers or cnf['WORKERS']
    results: tp.Dict[int, TrajectoryStream] = {}
    jobs_chunked = list(chunked(enumerate(jobs), workers))

    with Progress(console=console, auto_refresh=False, transient=True) as progress:
        task = progress.add_task(f"[green] {label} ...", total=len(jobs))
        for chunk in jobs_chunked:
            with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as executor:
                to_do_map = {executor.submit(run_member, job): i for i, job in chunk}
                for future in concurrent.futures.as_completed(to_do_map):
                    results[to_do_map[future]] = future.result()
                    progress.update(task, advance=1)
                    progress.refresh()
    return [results[i] for i in range(len(jobs))]


@dataclass(frozen=True)
class RunStore:
    """<root>/runs.sqlite plus per-experiment checkpoint directories"""
    root: p

    @property
    def dbname(self) -> p:
        self.root.mkdir(parents=True, exist_ok=True)
        return self.root / "runs.sqlite"

    def checkpoints(self, experiment: str) -> p:
        return self.root / experiment / "checkpoints"
