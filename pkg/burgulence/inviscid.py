"""
Entropy solutions of the kicked Burgers equation (nu = 0) by a first-order
Godunov finite-volume scheme with the exact Riemann flux of f(u) = u^2/2.

The Wiener forcing enters as kicks: the cell averages of the lattice
increment, spread evenly over the substeps of each lattice interval, added
after the hyperbolic update.
"""
import logging
import math
import typing as tp
from dataclasses import dataclass

import numpy as np

from burgulence.checkpoint import Checkpoint, Scheme
from burgulence.data import Resume, TrajectoryStream
from burgulence.errors import BlowUpError, CheckpointError, ConfigurationError, StepSizeError
from burgulence.fields import GridField, cell_averages, to_spectral
from burgulence.forcing import ForcingSpec, sample_increment
from burgulence.integrator import MAX_SUBSTEPS, StepSchedule
from burgulence.probes import Probe, evaluate
from burgulence.utils import check_power_of_two

log = logging.getLogger(__name__)

MAX_CFL = 0.9


@dataclass(frozen=True, slots=True, eq=False)
class CellField:
    averages: np.ndarray
    t: float = 0.0

    def __post_init__(self) -> None:
        g = GridField(self.averages)
        check_power_of_two(g.N)
        object.__setattr__(self, 'averages', g.values)

    @property
    def N(self) -> int:
        return int(self.averages.size)

    @property
    def grid(self) -> GridField:
        return GridField(self.averages)

    @classmethod
    def from_function(cls, f: tp.Callable[[np.ndarray], np.ndarray], N: int, t: float = 0.0) -> 'CellField':
        """cell averages of f by 8-point Gauss-Legendre quadrature per cell, mean removed"""
        nodes, weights = np.polynomial.legendre.leggauss(8)
        left = np.arange(N)[:, None] / N
        x = left + 0.5 * (nodes[None, :] + 1.0) / N
        return cls(GridField.zero_mean(0.5 * (f(x) * weights[None, :]).sum(axis=1)).values, t)


def _f(u: tp.Any) -> tp.Any:
    return 0.5 * u * u


def riemann_flux(u_left: float, u_right: float) -> float:
    if u_left > u_right:
        return max(_f(u_left), _f(u_right))
    if u_left <= 0.0 <= u_right:
        return 0.0
    return min(_f(u_left), _f(u_right))


def riemann_state(u_left: float, u_right: float) -> float:
    """value at x/t = 0 of the exact self-similar Riemann solution"""
    if u_left > u_right:
        return u_left if u_left + u_right >= 0.0 else u_right
    if u_left >= 0.0:
        return u_left
    if u_right <= 0.0:
        return u_right
    return 0.0


def godunov_flux(ul: np.ndarray, ur: np.ndarray) -> np.ndarray:
    fl, fr = _f(ul), _f(ur)
    rarefaction = np.where((ul <= 0.0) & (ur >= 0.0), 0.0, np.minimum(fl, fr))
    return np.where(ul > ur, np.maximum(fl, fr), rarefaction)


def total_variation(c: CellField) -> float:
    return float(np.sum(np.abs(np.roll(c.averages, -1) - c.averages)))


def step_inviscid(c: CellField, dt: float, kick: tp.Optional[GridField] = None, cfl: float = MAX_CFL) -> CellField:
    if cfl > MAX_CFL:
        raise ConfigurationError(f"Godunov CFL number must be <= {MAX_CFL}, got {cfl}")
    u = c.averages
    dx = 1.0 / c.N
    umax = float(np.max(np.abs(u)))
    if dt * umax > cfl * dx * (1.0 + 1e-12):
        raise StepSizeError(f"dt={dt:.3g} exceeds cfl*dx/max|u|={cfl * dx / umax:.3g} at t={c.t:.6g}")
    flux = godunov_flux(u, np.roll(u, -1))   # F_{j+1/2}
    new = u - (dt / dx) * (flux - np.roll(flux, 1))
    if kick is not None:
        new = new + kick.values
    return CellField(GridField.zero_mean(new).values, c.t + dt)


def _kick(spec: ForcingSpec, dt: float, step_index: int, N: int) -> tp.Optional[GridField]:
    if spec.s_max == 0:
        return None
    return cell_averages(sample_increment(spec, dt, step_index).delta, N)


def advance_interval(c: CellField, kick: tp.Optional[GridField], sched: StepSchedule) -> CellField:
    dx = 1.0 / c.N
    umax = float(np.max(np.abs(c.averages)))
    n_sub = max(sched.min_substeps, math.ceil(sched.dt_max * umax / (sched.cfl * dx)))
    while n_sub <= MAX_SUBSTEPS:
        dt = sched.dt_max / n_sub
        piece = GridField(kick.values / n_sub) if kick is not None else None
        w = c
        try:
            for _ in range(n_sub):
                w = step_inviscid(w, dt, piece, sched.cfl)
            return w
        except StepSizeError:
            log.debug(f"CFL breach at t={w.t:.6g} with {n_sub} substeps, refining")
            n_sub *= 2
    raise BlowUpError(f"more than {MAX_SUBSTEPS} substeps needed", c.t, sched.dt_max / MAX_SUBSTEPS)


CheckpointCallback = tp.Callable[[CellField, int, TrajectoryStream], None]


def _record(stream: TrajectoryStream, probes: tp.Sequence[Probe], c: CellField) -> None:
    g = c.grid
    stream.append(c.t, evaluate(probes, to_spectral(g), g))


def simulate_inviscid(u0: CellField, spec: ForcingSpec, sched: StepSchedule, probes: tp.Sequence[Probe], *,
                      resume: tp.Optional[Resume[CellField]] = None,
                      on_checkpoint: tp.Optional[CheckpointCallback] = None, checkpoint_every: int = 0) -> TrajectoryStream:
    """observables are computed on the cell averages, spectra by their DFT"""
    if sched.cfl > MAX_CFL:
        raise ConfigurationError(f"Godunov CFL number must be <= {MAX_CFL}, got {sched.cfl}")
    if resume is None:
        c, n = CellField(u0.averages, 0.0), 0
        stream = TrajectoryStream(tuple(p.name for p in probes), member=spec.member_id)
        _record(stream, probes, c)
    else:
        c, n, stream = resume.state, resume.step_index, resume.stream
    while n < sched.n_steps:
        c = advance_interval(c, _kick(spec, sched.dt_max, n, c.N), sched)
        n += 1
        c = CellField(c.averages, n * sched.dt_max)
        if n % sched.observable_stride == 0:
            _record(stream, probes, c)
        if on_checkpoint is not None and checkpoint_every and n % checkpoint_every == 0:
            on_checkpoint(c, n, stream)
    return stream


def to_checkpoint(c: CellField, spec: ForcingSpec, step_index: int) -> Checkpoint:
    return Checkpoint(scheme=Scheme.GODUNOV, t=c.t, nu=0.0, N=c.N, seed=spec.seed,
                      member_id=spec.member_id, step_index=step_index, payload=c.averages.copy())


def from_checkpoint(ck: Checkpoint) -> CellField:
    if ck.scheme != Scheme.GODUNOV:
        raise CheckpointError(f"checkpoint holds scheme {ck.scheme.name}, not cell averages")
    return CellField(ck.payload, ck.t)
