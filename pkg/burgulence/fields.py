"""
Periodic zero-mean fields on the unit circle.

A field is carried either as a SpectralField (complex amplitudes u_k of
exp(2 pi i k x) for k = 1..K, the negative modes being the complex conjugates)
or as a GridField (real samples at x_j = j/N). Transforms use numpy's real FFT,
grid integrals use the trapezoid rule on the uniform grid.
"""
import math
import typing as tp
from dataclasses import dataclass

import numpy as np

from burgulence.errors import DomainError, ResolutionError
from burgulence.utils import check_power_of_two

MEAN_TOLERANCE = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, slots=True, eq=False)
class SpectralField:
    coeffs: np.ndarray

    def __post_init__(self) -> None:
        c = np.array(self.coeffs, dtype=np.complex128).ravel()
        if c.size < 1:
            raise DomainError("SpectralField needs K >= 1")
        object.__setattr__(self, 'coeffs', _frozen(c))

    @property
    def K(self) -> int:
        return int(self.coeffs.size)

    @property
    def wavenumbers(self) -> np.ndarray:
        return np.arange(1, self.K + 1)

    def mode(self, k: int) -> complex:
        if k == 0 or abs(k) > self.K:
            return 0j
        c = complex(self.coeffs[abs(k) - 1])
        return c if k > 0 else c.conjugate()

    def modes(self) -> tp.Dict[int, complex]:
        out: tp.Dict[int, complex] = {}
        for k in range(1, self.K + 1):
            out[k] = self.mode(k)
            out[-k] = self.mode(-k)
        return out

    def truncate(self, K: int) -> 'SpectralField':
        c = np.zeros(K, dtype=np.complex128)
        n = min(K, self.K)
        c[:n] = self.coeffs[:n]
        return SpectralField(c)

    def __add__(self, other: 'SpectralField') -> 'SpectralField':
        K = max(self.K, other.K)
        return SpectralField(self.truncate(K).coeffs + other.truncate(K).coeffs)

    def __sub__(self, other: 'SpectralField') -> 'SpectralField':
        return self + other.scaled(-1.0)

    def scaled(self, c: float) -> 'SpectralField':
        return SpectralField(self.coeffs * c)

    @classmethod
    def zeros(cls, K: int) -> 'SpectralField':
        return cls(np.zeros(K, dtype=np.complex128))

    @classmethod
    def from_modes(cls, modes: tp.Mapping[int, complex], K: tp.Optional[int] = None) -> 'SpectralField':
        """
        build from a map k -> u_k. Both signs may be given; they must be
        complex conjugates. Mode 0 must be absent or zero.
        """
        if modes.get(0, 0) != 0:
            raise DomainError("mode 0 must vanish (zero mean)")
        kmax = max((abs(k) for k in modes), default=1)
        K = K or kmax
        c = np.zeros(K, dtype=np.complex128)
        for k, v in modes.items():
            if k == 0:
                continue
            if abs(k) > K:
                raise DomainError(f"mode {k} exceeds truncation K={K}")
            if k > 0:
                c[k - 1] = v
            elif -k not in modes:
                c[-k - 1] = complex(v).conjugate()
        for k, v in modes.items():
            if k < 0 and -k in modes and not np.isclose(complex(v), complex(modes[-k]).conjugate(), rtol=1e-12, atol=1e-15):
                raise DomainError(f"modes {k} and {-k} are not hermitian")
        return cls(c)


@dataclass(frozen=True, slots=True, eq=False)
class GridField:
    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.array(self.values, dtype=np.float64).ravel()
        if v.size < 1:
            raise DomainError("GridField needs at least one sample")
        scale = float(np.max(np.abs(v)))
        if abs(float(np.mean(v))) > MEAN_TOLERANCE * scale:
            raise DomainError(f"GridField mean {np.mean(v):.3e} is not zero")
        object.__setattr__(self, 'values', _frozen(v))

    @property
    def N(self) -> int:
        return int(self.values.size)

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.N) / self.N

    @classmethod
    def from_function(cls, f: tp.Callable[[np.ndarray], np.ndarray], N: int) -> 'GridField':
        return cls(f(np.arange(N) / N))

    @classmethod
    def zero_mean(cls, values: np.ndarray) -> 'GridField':
        """remove the round-off mean left by a conservative update"""
        v = np.asarray(values, dtype=np.float64)
        return cls(v - np.mean(v))

    @classmethod
    def zeros(cls, N: int) -> 'GridField':
        return cls(np.zeros(N))


@dataclass(frozen=True, slots=True)
class OleinikObservables:
    sup_norm: float
    grad_l1: float
    grad_plus_sup: float


def to_spectral(g: GridField) -> SpectralField:
    N = g.N
    check_power_of_two(N)
    fft = np.fft.rfft(g.values) / N
    # the Nyquist mode is dropped
    return SpectralField(fft[1:N // 2])


def to_grid(s: SpectralField, N: int) -> GridField:
    """
    inverse transform. irfft only sees the modes k >= 0 and mirrors them
    hermitian, so the result is real by construction.
    """
    check_power_of_two(N)
    if N < 2 * (s.K + 1):
        raise ResolutionError(f"N={N} cannot carry K={s.K} modes, need N >= {2 * (s.K + 1)}")
    full = np.zeros(N // 2 + 1, dtype=np.complex128)
    full[1:s.K + 1] = s.coeffs * N
    return GridField(np.fft.irfft(full, n=N))


def derivative(s: SpectralField) -> SpectralField:
    return SpectralField(s.coeffs * (2j * math.pi * s.wavenumbers))


def sobolev_norm_sq(s: SpectralField, m: int, diagnostic: bool = False) -> float:
    """
    homogeneous Sobolev norm ||u||_m^2 = sum_k (2 pi |k|)^(2m) |u_k|^2 over both signs.
    Negative m is only computed with diagnostic=True.
    """
    if m < 0 and not diagnostic:
        raise DomainError(f"negative Sobolev order m={m} needs diagnostic=True")
    weight = (2.0 * math.pi * s.wavenumbers) ** (2 * m)
    return float(2.0 * np.sum(weight * np.abs(s.coeffs) ** 2))


def oleinik_observables(g: GridField) -> OleinikObservables:
    ux = to_grid(derivative(to_spectral(g)), g.N).values
    return OleinikObservables(
        sup_norm=float(np.max(np.abs(g.values))),
        grad_l1=float(np.mean(np.abs(ux))),
        grad_plus_sup=float(max(np.max(ux), 0.0)),
    )


def lp_norm(g: GridField, p: float) -> float:
    if not (p > 0 and math.isfinite(p)):
        raise DomainError(f"L_p norm needs finite p > 0, got {p}")
    return float(np.mean(np.abs(g.values) ** p) ** (1.0 / p))


def cell_averages(s: SpectralField, N: int) -> GridField:
    """exact averages of s over the cells [j/N, (j+1)/N)"""
    k = s.wavenumbers
    shifted = s.coeffs * np.exp(1j * math.pi * k / N) * np.sinc(k / N)
    return to_grid(SpectralField(shifted), N)


def to_real_basis(s: SpectralField) -> tp.Dict[int, float]:
    """coordinates x_s in e_k = sqrt2 cos(2 pi k x), e_-k = sqrt2 sin(2 pi k x)"""
    out: tp.Dict[int, float] = {}
    for k, c in zip(s.wavenumbers, s.coeffs):
        out[int(k)] = math.sqrt(2.0) * c.real
        out[-int(k)] = -math.sqrt(2.0) * c.imag
    return out


def from_real_basis(coords: tp.Mapping[int, float], K: int) -> SpectralField:
    c = np.zeros(K, dtype=np.complex128)
    for s, x in coords.items():
        if s == 0 or abs(s) > K:
            raise DomainError(f"basis index {s} outside 1..{K}")
        if s > 0:
            c[s - 1] += x / math.sqrt(2.0)
        else:
            c[-s - 1] -= 1j * x / math.sqrt(2.0)
    return SpectralField(c)


def fourier_decay_bound(g: GridField) -> float:
    """
    max_k 2 pi |k| |u_k| / |u_x|_L1. The bound |u_k| <= |u_x|_L1 / (2 pi |k|)
    makes this at most one.
    """
    s = to_spectral(g)
    grad_l1 = oleinik_observables(g).grad_l1
    if grad_l1 == 0.0:
        return 0.0
    return float(np.max(2.0 * math.pi * s.wavenumbers * np.abs(s.coeffs)) / grad_l1)
