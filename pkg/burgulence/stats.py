"""
Statistical functionals of trajectory ensembles: the bracket average
<<f>> = E (1/sigma) int_T^{T+sigma} f(s) ds, structure functions, layer
averaged energy spectra, power-law and dissipation-scale fits, and mixing
distances.
"""
import logging
import math
import typing as tp
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid
from scipy.optimize import curve_fit
from scipy.signal import correlate

from burgulence.accumulator import Moments, MomentTable
from burgulence.data import TrajectoryStream
from burgulence.errors import (AlignmentError, ConfigurationError, CoverageError, DomainError, FitError,
                               RangeError, UnderResolutionError)
from burgulence.fields import GridField, SpectralField

log = logging.getLogger(__name__)

Observable = tp.Union[str, tp.Callable[[TrajectoryStream], np.ndarray]]


@dataclass(frozen=True, slots=True)
class BracketSpec:
    T: float = 5.0
    sigma: float = 10.0
    ensemble_size: int = 16
    sigma_min: float = 1.0
    sample_stride: int = 1

    def __post_init__(self) -> None:
        if self.T < 1.0:
            raise ConfigurationError(f"bracket start T must be >= 1, got {self.T}")
        if self.sigma < self.sigma_min or self.sigma <= 0:
            raise ConfigurationError(f"bracket length sigma={self.sigma} is below sigma_min={self.sigma_min}")
        if self.ensemble_size < 1:
            raise ConfigurationError(f"ensemble_size must be >= 1, got {self.ensemble_size}")
        if self.sample_stride < 1:
            raise ConfigurationError(f"sample_stride must be >= 1, got {self.sample_stride}")

    @property
    def t_end(self) -> float:
        return self.T + self.sigma


class BracketValue(tp.NamedTuple):
    mean: tp.Any
    stderr: tp.Any


@dataclass(frozen=True, slots=True)
class PowerLawFit:
    exponent: float
    stderr: float
    prefactor: float
    residual: float
    window: tuple[float, float]
    n_points: int


@dataclass(frozen=True, slots=True)
class SpectrumReport:
    k: np.ndarray
    E: np.ndarray
    stderr: np.ndarray
    M: float
    fit: tp.Optional[PowerLawFit] = None


@dataclass(frozen=True, slots=True)
class StructureReport:
    p: tuple[float, ...]
    l: np.ndarray
    S: np.ndarray           # (len p, len l)
    stderr: np.ndarray
    fits: tp.Dict[str, PowerLawFit] = field(default_factory=dict)

    def flatness(self) -> np.ndarray:
        """S_4 / S_2^2 per l, when both orders were measured"""
        if 2.0 not in self.p or 4.0 not in self.p:
            raise DomainError("flatness needs p = 2 and p = 4")
        return self.S[self.p.index(4.0)] / self.S[self.p.index(2.0)] ** 2


def _series(stream: TrajectoryStream, observable: Observable) -> np.ndarray:
    if isinstance(observable, str):
        return stream.series(observable)
    return np.asarray(observable(stream), dtype=np.float64)


def _interp(t: np.ndarray, v: np.ndarray, x: float) -> np.ndarray:
    i = int(np.clip(np.searchsorted(t, x, side='right'), 1, len(t) - 1))
    w = (x - t[i - 1]) / (t[i] - t[i - 1])
    return v[i - 1] * (1.0 - w) + v[i] * w


def time_average(t: np.ndarray, values: np.ndarray, T: float, sigma: float, stride: int = 1) -> np.ndarray:
    """
    (1/sigma) int_T^{T+sigma} by the trapezoid rule, window ends interpolated.
    Only every stride-th sample inside the window enters the quadrature.
    """
    eps = 1e-9 * max(1.0, T + sigma)
    if len(t) < 2 or t[0] > T + eps or t[-1] < T + sigma - eps:
        span = f"[{t[0]:.6g}, {t[-1]:.6g}]" if len(t) else "no samples"
        raise CoverageError(f"stream covers {span}, window is [{T:.6g}, {T + sigma:.6g}]")
    inside = np.flatnonzero((t > T + eps) & (t < T + sigma - eps))[::stride]
    tt = np.concatenate([[T], t[inside], [T + sigma]])
    vv = np.concatenate([np.asarray(_interp(t, values, T))[None], values[inside],
                         np.asarray(_interp(t, values, T + sigma))[None]])
    return trapezoid(vv, tt, axis=0) / sigma


def member_averages(streams: tp.Sequence[TrajectoryStream], observable: Observable, spec: BracketSpec) -> tp.List[np.ndarray]:
    return [time_average(s.t(), _series(s, observable), spec.T, spec.sigma, spec.sample_stride) for s in streams]


def bracket_average(streams: tp.Sequence[TrajectoryStream], observable: Observable, spec: BracketSpec) -> BracketValue:
    if not streams:
        raise CoverageError("bracket average over an empty ensemble")
    if len(streams) != spec.ensemble_size:
        log.debug(f"bracket over {len(streams)} members, configured ensemble_size={spec.ensemble_size}")
    acc = Moments()
    for avg in member_averages(streams, observable, spec):
        acc |= Moments.of(avg)
    return BracketValue(_scalar(acc.mean), _scalar(acc.stderr))


def _scalar(a: np.ndarray) -> tp.Any:
    return float(a) if a.ndim == 0 else a


def shift_of(l: float, N: int) -> int:
    shift = l * N
    if abs(shift - round(shift)) > 1e-9 * max(1.0, shift):
        raise AlignmentError(f"l={l} is not a multiple of 1/N for N={N}")
    return int(round(shift))


def increment_moment(g: GridField, p: float, shift: int) -> float:
    """(1/N) sum_j |u_{j+shift} - u_j|^p"""
    if not p > 0:
        raise DomainError(f"structure function order must be > 0, got {p}")
    u = g.values
    return float(np.mean(np.abs(np.roll(u, -shift) - u) ** p))


def structure_function(streams: tp.Sequence[TrajectoryStream], p: float, l: float, spec: BracketSpec,
                       probe: str = "grid") -> BracketValue:
    """<<|u(. + l) - u(.)|_Lp^p>> from grid snapshots; l must sit on the grid"""
    if not p > 0:
        raise DomainError(f"structure function order must be > 0, got {p}")
    if not (0.0 < l <= 0.5):
        raise DomainError(f"increment l must lie in (0, 1/2], got {l}")
    if not streams:
        raise CoverageError("structure function over an empty ensemble")
    N = streams[0].series(probe).shape[-1]
    shift = shift_of(l, N)

    def moment(stream: TrajectoryStream) -> np.ndarray:
        u = stream.series(probe)
        return np.mean(np.abs(np.roll(u, -shift, axis=-1) - u) ** p, axis=-1)

    return bracket_average(streams, moment, spec)


def structure_function_spectral(s: SpectralField, l: float) -> float:
    """Parseval form of S_2: 4 sum_{n != 0} sin^2(n pi l) |u_n|^2"""
    return float(8.0 * np.sum(np.sin(math.pi * s.wavenumbers * l) ** 2 * np.abs(s.coeffs) ** 2))


def structure_table(streams: tp.Sequence[TrajectoryStream], p_list: tp.Sequence[float], shifts: tp.Sequence[int],
                    N: int, spec: BracketSpec, probe: str = "increments") -> StructureReport:
    """bracket of the increments probe, laid out p-major"""
    mean, err = bracket_average(streams, probe, spec)
    shape = (len(p_list), len(shifts))
    return StructureReport(p=tuple(float(p) for p in p_list), l=np.asarray(shifts) / N,
                           S=np.reshape(mean, shape), stderr=np.reshape(err, shape))


def _layer(k: int, M: float) -> tuple[int, int]:
    if k < 1 or not M > 1:
        raise DomainError(f"layer needs k >= 1 and M > 1, got k={k}, M={M}")
    return max(1, math.ceil(k / M - 1e-12)), math.floor(M * k + 1e-12)


def energy_layer(s: SpectralField, k: int, M: float = 2.0) -> float:
    """mean of 1/2 |u_n|^2 over J_k = {n : k/M <= |n| <= M k}"""
    lo, hi = _layer(k, M)
    if hi > s.K:
        raise RangeError(f"layer J_{k} reaches |n|={hi} beyond K={s.K}")
    return float(np.mean(0.5 * np.abs(s.coeffs[lo - 1:hi]) ** 2))


def layer_means(mode_energies: np.ndarray, ks: tp.Sequence[int], M: float = 2.0) -> np.ndarray:
    """energy_layer applied along the last axis of stacked 1/2 |u_n|^2 vectors"""
    K = mode_energies.shape[-1]
    out = []
    for k in ks:
        lo, hi = _layer(k, M)
        if hi > K:
            raise RangeError(f"layer J_{k} reaches |n|={hi} beyond K={K}")
        out.append(np.mean(mode_energies[..., lo - 1:hi], axis=-1))
    return np.stack(out, axis=-1)


def shell_energies(s: SpectralField, M: float = 2.0) -> np.ndarray:
    """1/2 sum |u_n|^2 over both signs in the disjoint shells ceil(M^j) <= |n| < ceil(M^(j+1))"""
    if not M > 1:
        raise DomainError(f"shell ratio M must be > 1, got {M}")
    e = np.abs(s.coeffs) ** 2
    out = []
    lo, j = 1, 1
    while lo <= s.K:
        hi = max(math.ceil(M ** j), lo + 1)
        out.append(float(np.sum(e[lo - 1:min(hi - 1, s.K)])))
        lo, j = hi, j + 1
    return np.array(out)


def spectrum_report(streams: tp.Sequence[TrajectoryStream], ks: tp.Sequence[int], M: float, spec: BracketSpec,
                    probe: str = "spectrum") -> SpectrumReport:
    mean, err = bracket_average(streams, lambda s: layer_means(s.series(probe), ks, M), spec)
    return SpectrumReport(k=np.asarray(ks), E=np.asarray(mean), stderr=np.asarray(err), M=M)


def _line(logx: np.ndarray, a: float, b: float) -> np.ndarray:
    return a + b * logx


def fit_power_law(points: tp.Sequence[tuple[float, float, float]], window: tuple[float, float],
                  min_points: int = 4) -> PowerLawFit:
    """weighted least squares of log y on log x, weights from the relative errors"""
    lo, hi = window
    inside = [(x, y, e) for x, y, e in points if lo <= x <= hi]
    if len(inside) < min_points:
        raise FitError(f"{len(inside)} points in window [{lo:.4g}, {hi:.4g}], need {min_points}")
    x, y, err = (np.array(c, dtype=np.float64) for c in zip(*inside))
    if np.any(x <= 0) or np.any(y <= 0):
        raise DomainError(f"power-law fit needs positive data in window [{lo:.4g}, {hi:.4g}]")
    logx, logy = np.log(x), np.log(y)
    sigma = err / y if np.all(err > 0) else None
    b0 = (logy[-1] - logy[0]) / (logx[-1] - logx[0]) if logx[-1] != logx[0] else 0.0
    (a, b), pcov = curve_fit(_line, logx, logy, p0=(logy[0] - b0 * logx[0], b0), sigma=sigma)
    r = logy - _line(logx, a, b)
    w = 1.0 / sigma ** 2 if sigma is not None else np.ones_like(r)
    return PowerLawFit(exponent=float(b), stderr=float(np.sqrt(max(pcov[1, 1], 0.0))), prefactor=float(np.exp(a)),
                       residual=float(np.sum(w * r * r) / max(len(r) - 2, 1)), window=(lo, hi), n_points=len(inside))


def local_slopes(report: SpectrumReport) -> tuple[np.ndarray, np.ndarray]:
    ok = report.E > 0
    k, E = report.k[ok].astype(np.float64), report.E[ok]
    if len(k) < 3:
        raise UnderResolutionError("fewer than three positive spectrum values")
    return k, np.gradient(np.log(E), np.log(k))


def dissipation_scale(report: SpectrumReport, decay_threshold: float = -4.0, band: float = 2.0) -> float:
    """first k whose local log-log slope stays below decay_threshold over [k, band k]"""
    k, slope = local_slopes(report)
    for i, ki in enumerate(k):
        if ki * band > k[-1]:
            break
        if np.all(slope[(k >= ki) & (k <= ki * band)] < decay_threshold):
            return float(ki)
    raise UnderResolutionError(f"no slope below {decay_threshold} sustained over a factor {band} up to k={k[-1]:.0f}")


def integrated_autocorrelation_time(series: np.ndarray, dt: float, c: float = 5.0) -> float:
    """dt (1 + 2 sum_tau rho(tau)), summed up to the first window W >= c tau_int"""
    x = np.asarray(series, dtype=np.float64) - np.mean(series)
    n = len(x)
    var = float(np.dot(x, x))
    if n < 2 or var == 0.0:
        return dt
    rho = correlate(x, x, mode='full', method='fft')[n - 1:] / var
    tau = 1.0
    for W in range(1, n):
        tau += 2.0 * rho[W]
        if W >= c * tau:
            break
    return dt * max(tau, 1.0)


def decorrelation_stride(streams: tp.Sequence[TrajectoryStream], observable: Observable, spec: BracketSpec) -> int:
    """
    samples per integrated autocorrelation time of the observable inside the
    bracket window, averaged over members; vector observables are summed to a scalar
    """
    if not streams:
        raise CoverageError("decorrelation stride over an empty ensemble")
    eps = 1e-9 * max(1.0, spec.t_end)
    taus = []
    for s in streams:
        t = s.t()
        inside = (t >= spec.T - eps) & (t <= spec.t_end + eps)
        if np.count_nonzero(inside) < 2:
            raise CoverageError(f"member {s.member} has fewer than 2 samples in [{spec.T:.6g}, {spec.t_end:.6g}]")
        v = _series(s, observable)[inside]
        taus.append(integrated_autocorrelation_time(v.reshape(len(v), -1).sum(axis=1), 1.0))
    return max(1, math.ceil(float(np.mean(taus)) - 1e-9))


def oleinik_moments(streams: tp.Sequence[TrajectoryStream], p: float, spec: BracketSpec,
                    probe: str = "oleinik") -> BracketValue:
    """<<|u|_Loo^p + |u_x|_L1^p + |u_x^+|_Loo^p>>"""
    return bracket_average(streams, lambda s: np.sum(s.series(probe) ** p, axis=-1), spec)


def energy_balance_ratio(streams: tp.Sequence[TrajectoryStream], nu: float, B0: float, spec: BracketSpec,
                         probe: str = "sobolev:1") -> BracketValue:
    """nu <<||u||_1^2>> / (B_0/2), which is 1 for a stationary ensemble"""
    if not (nu > 0 and B0 > 0):
        raise DomainError(f"energy balance needs nu > 0 and B_0 > 0, got nu={nu}, B_0={B0}")
    mean, err = bracket_average(streams, probe, spec)
    return BracketValue(nu * mean / (0.5 * B0), nu * err / (0.5 * B0))


@dataclass(frozen=True, slots=True)
class MixingDistances:
    t: np.ndarray
    distance: tp.Dict[str, np.ndarray]
    stderr: tp.Dict[str, np.ndarray]
    l1: tp.Optional[np.ndarray] = None


def _values_at(stream: TrajectoryStream, observable: Observable, t_grid: np.ndarray) -> np.ndarray:
    t = stream.t()
    idx = np.searchsorted(t, t_grid - 1e-9)
    if np.any(idx >= len(t)) or np.any(np.abs(t[np.minimum(idx, len(t) - 1)] - t_grid) > 1e-9):
        raise AlignmentError(f"member {stream.member} has no samples on the requested time grid")
    return _series(stream, observable)[idx]


def mixing_distance(ensA: tp.Sequence[TrajectoryStream], ensB: tp.Sequence[TrajectoryStream],
                    functionals: tp.Mapping[str, Observable], t_grid: tp.Sequence[float],
                    coupled: bool = False, probe: str = "grid") -> MixingDistances:
    """
    |E f(u_A(t)) - E f(u_B(t))| per functional with its joint stderr; in
    coupled mode also the ensemble mean of |u_A - u_B|_L1, members paired in order.
    """
    tg = np.asarray(t_grid, dtype=np.float64)
    distance: tp.Dict[str, np.ndarray] = {}
    stderr: tp.Dict[str, np.ndarray] = {}
    a = MomentTable((name, _values_at(s, f, tg)) for s in ensA for name, f in functionals.items())
    b = MomentTable((name, _values_at(s, f, tg)) for s in ensB for name, f in functionals.items())
    for name in functionals:
        distance[name] = np.abs(a[name].mean - b[name].mean)
        stderr[name] = np.sqrt(a[name].stderr ** 2 + b[name].stderr ** 2)
    l1 = pathwise_l1(ensA, ensB, tg, probe).mean(axis=0) if coupled else None
    return MixingDistances(t=tg, distance=distance, stderr=stderr, l1=l1)


def pathwise_l1(ensA: tp.Sequence[TrajectoryStream], ensB: tp.Sequence[TrajectoryStream],
                t_grid: tp.Sequence[float], probe: str = "grid") -> np.ndarray:
    """|u_A(t) - u_B(t)|_L1 for every member pair, shape (pairs, times); members are paired in order"""
    if len(ensA) != len(ensB):
        raise AlignmentError(f"coupled ensembles differ in size: {len(ensA)} vs {len(ensB)}")
    if not ensA:
        raise CoverageError("pathwise distance over an empty ensemble")
    tg = np.asarray(t_grid, dtype=np.float64)
    return np.stack([np.mean(np.abs(_values_at(sa, probe, tg) - _values_at(sb, probe, tg)), axis=-1)
                     for sa, sb in zip(ensA, ensB)])


def contraction_violation(paths: np.ndarray) -> float:
    """
    largest rise of a pathwise L1 distance above its running minimum, relative
    to its initial value and taken over all pairs. Zero for non-increasing paths.
    """
    paths = np.atleast_2d(np.asarray(paths, dtype=np.float64))
    if paths.shape[-1] < 2:
        return 0.0
    start = paths[:, :1]
    if np.any(start <= 0):
        raise DomainError("contraction needs distinct initial data in every pair")
    running_min = np.minimum.accumulate(paths, axis=-1)
    return float(max(np.max((paths - running_min) / start), 0.0))
