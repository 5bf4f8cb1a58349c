"""
Pseudospectral time stepping of u_t + u u_x - nu u_xx = d/dt xi on the unit circle.

Diffusion is integrated exactly (integrating factor E = exp(-nu (2 pi k)^2 dt)),
the conservative nonlinearity -(u^2/2)_x is evaluated on the carrier grid with
2/3-rule dealiasing and advanced by a two-stage Heun rule. The noise increment
over a step enters with the weight phi1 = (1 - E) / (nu (2 pi k)^2 dt), the
exact propagation of a linear-in-time forcing path through the heat semigroup.

Brownian increments live on the lattice t_n = n dt_max. Every lattice
interval is split into equal substeps (CFL rule, doubled on breach) and the
increment is spread evenly over them, so the forcing path does not depend
on the substep count.
"""
import logging
import math
import typing as tp
from dataclasses import dataclass

import numpy as np

from burgulence.checkpoint import Checkpoint, Scheme
from burgulence.data import Resume, TrajectoryStream
from burgulence.errors import BlowUpError, CheckpointError, ConfigurationError, DomainError, ResolutionError
from burgulence.fields import GridField, SpectralField, to_grid
from burgulence.forcing import ForcingSpec, NoiseIncrement, sample_increment
from burgulence.probes import Probe, evaluate
from burgulence.utils import check_power_of_two

log = logging.getLogger(__name__)

MAX_SUBSTEPS = 1 << 16


def dealiased_modes(N: int) -> int:
    """K_active = floor(2/3 (N/2 - 1))"""
    return (2 * (N // 2 - 1)) // 3


@dataclass(frozen=True, slots=True)
class SolverState:
    t: float
    u: SpectralField
    nu: float
    N: int

    def __post_init__(self) -> None:
        check_power_of_two(self.N)
        if not (0.0 < self.nu <= 1.0):
            raise DomainError(f"viscosity must lie in (0, 1], got {self.nu}")
        if self.u.K > dealiased_modes(self.N):
            raise ResolutionError(f"K_active={self.u.K} exceeds the 2/3 rule for N={self.N}")

    @property
    def K_active(self) -> int:
        return self.u.K

    def grid(self) -> GridField:
        return to_grid(self.u, self.N)


def initial_state(u0: SpectralField, nu: float, N: int, t: float = 0.0) -> SolverState:
    """u0 truncated (or padded) to the dealiased band of N"""
    check_power_of_two(N)
    return SolverState(t=t, u=u0.truncate(dealiased_modes(N)), nu=nu, N=N)


@dataclass(frozen=True, slots=True)
class StepSchedule:
    dt_max: float = 1e-3
    cfl: float = 0.4
    t_end: float = 1.0
    observable_stride: int = 1
    min_substeps: int = 1

    def __post_init__(self) -> None:
        if not self.dt_max > 0:
            raise ConfigurationError(f"dt_max must be positive, got {self.dt_max}")
        if not (0.0 < self.cfl < 1.0):
            raise ConfigurationError(f"cfl must lie in (0, 1), got {self.cfl}")
        if self.t_end < 0:
            raise ConfigurationError(f"t_end must be >= 0, got {self.t_end}")
        if self.observable_stride < 1 or self.min_substeps < 1:
            raise ConfigurationError("observable_stride and min_substeps must be >= 1")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt_max))


class SpectralStepper:
    """FFT workspace of one trajectory"""

    def __init__(self, N: int, K: int, nu: float, nonlinear: bool = True) -> None:
        self.N = N
        self.K = K
        self.nu = nu
        self.nonlinear = nonlinear
        self.ik = 2j * math.pi * np.arange(1, K + 1)
        self.lam = nu * (2.0 * math.pi * np.arange(1, K + 1)) ** 2
        self._full = np.zeros(N // 2 + 1, dtype=np.complex128)
        self._factors: tp.Dict[float, tp.Tuple[np.ndarray, np.ndarray]] = {}

    def factors(self, dt: float) -> tp.Tuple[np.ndarray, np.ndarray]:
        if dt not in self._factors:
            z = self.lam * dt
            self._factors[dt] = (np.exp(-z), -np.expm1(-z) / z)
        return self._factors[dt]

    def grid(self, v: np.ndarray) -> np.ndarray:
        self._full[:] = 0
        self._full[1:self.K + 1] = v * self.N
        return np.fft.irfft(self._full, n=self.N)

    def sup(self, v: np.ndarray) -> float:
        if not self.nonlinear:
            return 0.0
        return float(np.max(np.abs(self.grid(v))))

    def nonlinear_term(self, v: np.ndarray) -> tp.Tuple[np.ndarray, float]:
        """(-(u^2/2)_x restricted to the dealiased band, max |u|)"""
        if not self.nonlinear:
            return np.zeros_like(v), 0.0
        u = self.grid(v)
        w = np.fft.rfft(0.5 * u * u)[1:self.K + 1] / self.N
        return -self.ik * w, float(np.max(np.abs(u)))

    def advance(self, v: np.ndarray, dt: float, delta: np.ndarray) -> tp.Tuple[np.ndarray, float]:
        E, phi1 = self.factors(dt)
        n1, umax = self.nonlinear_term(v)
        forced = phi1 * delta
        a = E * (v + dt * n1) + forced
        n2, _ = self.nonlinear_term(a)
        return E * v + 0.5 * dt * (E * n1 + n2) + forced, umax


def _padded(delta: SpectralField, K: int) -> np.ndarray:
    nonzero = np.nonzero(delta.coeffs)[0]
    if nonzero.size and nonzero[-1] + 1 > K:
        raise ResolutionError(f"forcing reaches mode {nonzero[-1] + 1} beyond K_active={K}")
    return delta.truncate(K).coeffs.copy()


def step(state: SolverState, dt: float, noise: NoiseIncrement, nonlinear: bool = True) -> SolverState:
    if not math.isclose(noise.dt, dt, rel_tol=1e-12):
        raise DomainError(f"noise increment is over dt={noise.dt}, step is dt={dt}")
    stepper = SpectralStepper(state.N, state.K_active, state.nu, nonlinear)
    v, _ = stepper.advance(np.array(state.u.coeffs), dt, _padded(noise.delta, state.K_active))
    if not np.all(np.isfinite(v)):
        raise BlowUpError("non-finite modes", state.t, dt)
    return SolverState(t=state.t + dt, u=SpectralField(v), nu=state.nu, N=state.N)


def advance_interval(stepper: SpectralStepper, v: np.ndarray, delta: np.ndarray, sched: StepSchedule, t: float) -> tp.Tuple[np.ndarray, int]:
    """one lattice interval; returns the new modes and the substep count used"""
    dx = 1.0 / stepper.N
    umax = stepper.sup(v)
    n_sub = max(sched.min_substeps, math.ceil(sched.dt_max * umax / (sched.cfl * dx)))
    while n_sub <= MAX_SUBSTEPS:
        dt = sched.dt_max / n_sub
        piece = delta / n_sub
        w = v
        for _ in range(n_sub):
            w, umax = stepper.advance(w, dt, piece)
            if dt * umax > sched.cfl * dx * (1.0 + 1e-12):
                log.debug(f"CFL breach at t={t:.6g} with {n_sub} substeps, refining")
                break
        else:
            if not np.all(np.isfinite(w)):
                raise BlowUpError("non-finite modes", t, dt)
            return w, n_sub
        if not np.all(np.isfinite(w)):
            raise BlowUpError("non-finite modes", t, dt)
        n_sub *= 2
    raise BlowUpError(f"more than {MAX_SUBSTEPS} substeps needed", t, sched.dt_max / MAX_SUBSTEPS)


CheckpointCallback = tp.Callable[[SolverState, int, TrajectoryStream], None]


def _record(stream: TrajectoryStream, probes: tp.Sequence[Probe], state: SolverState) -> None:
    stream.append(state.t, evaluate(probes, state.u, state.grid()))


def simulate(u0: SpectralField, nu: float, spec: ForcingSpec, sched: StepSchedule, probes: tp.Sequence[Probe], *,
             N: int, nonlinear: bool = True, resume: tp.Optional[Resume[SolverState]] = None,
             on_checkpoint: tp.Optional[CheckpointCallback] = None, checkpoint_every: int = 0) -> TrajectoryStream:
    """
    advance u0 to sched.t_end. Samples are taken at lattice steps that are
    multiples of observable_stride, step 0 included.
    """
    if resume is None:
        state = initial_state(u0, nu, N)
        n = 0
        stream = TrajectoryStream(tuple(p.name for p in probes), member=spec.member_id)
        _record(stream, probes, state)
    else:
        state, n, stream = resume.state, resume.step_index, resume.stream
        if state.nu != nu or state.N != N:
            raise CheckpointError(f"resume point has (nu={state.nu}, N={state.N}), run wants ({nu}, {N})")

    stepper = SpectralStepper(N, state.K_active, nu, nonlinear)
    v = np.array(state.u.coeffs)
    n_end = sched.n_steps
    while n < n_end:
        noise = sample_increment(spec, sched.dt_max, n)
        v, _ = advance_interval(stepper, v, _padded(noise.delta, stepper.K), sched, n * sched.dt_max)
        n += 1
        state = SolverState(t=n * sched.dt_max, u=SpectralField(v), nu=nu, N=N)
        if n % sched.observable_stride == 0:
            _record(stream, probes, state)
        if on_checkpoint is not None and checkpoint_every and n % checkpoint_every == 0:
            on_checkpoint(state, n, stream)
    return stream


def to_checkpoint(state: SolverState, spec: ForcingSpec, step_index: int, nonlinear: bool = True) -> Checkpoint:
    return Checkpoint(scheme=Scheme.SPECTRAL if nonlinear else Scheme.LINEARIZED, t=state.t, nu=state.nu,
                      N=state.N, seed=spec.seed, member_id=spec.member_id, step_index=step_index,
                      payload=np.array(state.u.coeffs))


def from_checkpoint(ck: Checkpoint) -> SolverState:
    if not ck.is_spectral:
        raise CheckpointError(f"checkpoint holds scheme {ck.scheme.name}, not a spectral state")
    return SolverState(t=ck.t, u=SpectralField(ck.payload), nu=ck.nu, N=ck.N)


def cole_hopf_reference(amplitude: float, nu: float, t: float, N: int) -> GridField:
    """
    deterministic solution from u0 = amplitude sin(2 pi x): u = -2 nu (ln phi)_x
    with phi the heat flow of exp(-(amplitude / (4 pi nu)) (1 - cos 2 pi x)).
    """
    check_power_of_two(N)
    if nu <= 0 or t < 0:
        raise DomainError(f"Cole-Hopf reference needs nu > 0 and t >= 0, got nu={nu}, t={t}")
    x = np.arange(N) / N
    phi0 = np.exp(-(amplitude / (4.0 * math.pi * nu)) * (1.0 - np.cos(2.0 * math.pi * x)))
    hat = np.fft.rfft(phi0)
    if np.max(np.abs(hat[-4:])) > 1e-13 * np.abs(hat[0]):
        raise ResolutionError(f"phi is under-resolved on N={N} for nu={nu}, amplitude={amplitude}")
    k = np.arange(N // 2 + 1)
    hat = hat * np.exp(-nu * (2.0 * math.pi * k) ** 2 * t)
    dhat = hat * (2j * math.pi * k)
    dhat[-1] = 0.0
    phi = np.fft.irfft(hat, n=N)
    if np.min(phi) <= 1e-280:
        raise ResolutionError(f"phi underflows for nu={nu}, amplitude={amplitude}")
    return GridField.zero_mean(-2.0 * nu * np.fft.irfft(dhat, n=N) / phi)


def ou_reference_variance(s: int, nu: float, b_s: float) -> float:
    """stationary variance b_s^2 / (2 nu (2 pi s)^2) of real-basis coordinate s of the linearized model"""
    if s == 0:
        raise DomainError("mode s=0 does not exist")
    if nu <= 0:
        raise DomainError(f"OU variance needs nu > 0, got {nu}")
    return b_s * b_s / (2.0 * nu * (2.0 * math.pi * s) ** 2)
