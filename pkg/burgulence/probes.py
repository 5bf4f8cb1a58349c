"""
Observables recorded along a trajectory.

Probe names:
    sobolev:<m>     ||u||_m^2 (m < 0 allowed, reported as a diagnostic)
    oleinik         [|u|_Loo, |u_x|_L1, max u_x^+]
    lp:<p>          |u|_Lp
    spectrum        1/2 |u_k|^2 for k = 1..K
    real_basis:<S>  coordinates [x_1, x_-1, ..., x_S, x_-S]
    increments      (1/N) sum_j |u(x_j + l) - u(x_j)|^p for the configured p and shifts, p-major
    grid            the grid samples
"""
import typing as tp
from dataclasses import dataclass

import numpy as np

from burgulence.errors import ConfigurationError
from burgulence.fields import (GridField, SpectralField, lp_norm, oleinik_observables,
                               sobolev_norm_sq, to_real_basis)
from burgulence.stats import increment_moment

ProbeFunction = tp.Callable[[SpectralField, GridField], np.ndarray]


@dataclass(frozen=True, slots=True)
class Probe:
    name: str
    fn: ProbeFunction

    def __call__(self, s: SpectralField, g: GridField) -> np.ndarray:
        return np.asarray(self.fn(s, g), dtype=np.float64)


def _sobolev(m: int) -> ProbeFunction:
    return lambda s, g: np.array(sobolev_norm_sq(s, m, diagnostic=True))


def _lp(p: float) -> ProbeFunction:
    return lambda s, g: np.array(lp_norm(g, p))


def _oleinik(s: SpectralField, g: GridField) -> np.ndarray:
    o = oleinik_observables(g)
    return np.array([o.sup_norm, o.grad_l1, o.grad_plus_sup])


def _spectrum(s: SpectralField, g: GridField) -> np.ndarray:
    return 0.5 * np.abs(s.coeffs) ** 2


def _increments(p_list: tp.Sequence[float], shifts: tp.Sequence[int]) -> ProbeFunction:
    return lambda s, g: np.array([increment_moment(g, p, shift) for p in p_list for shift in shifts])


def _real_basis(S: int) -> ProbeFunction:
    def fn(s: SpectralField, g: GridField) -> np.ndarray:
        x = to_real_basis(s.truncate(max(S, s.K)))
        return np.array([x[sign * k] for k in range(1, S + 1) for sign in (1, -1)])
    return fn


def resolve_probes(names: tp.Sequence[str], *, p_list: tp.Sequence[float] = (), shifts: tp.Sequence[int] = ()) -> tp.List[Probe]:
    probes: tp.List[Probe] = []
    for name in names:
        kind, _, arg = name.partition(":")
        try:
            if kind == "sobolev":
                probes.append(Probe(name, _sobolev(int(arg))))
            elif kind == "lp":
                p = float(arg)
                if p <= 0:
                    raise ValueError(arg)
                probes.append(Probe(name, _lp(p)))
            elif kind == "real_basis":
                probes.append(Probe(name, _real_basis(int(arg))))
            elif name == "oleinik":
                probes.append(Probe(name, _oleinik))
            elif name == "spectrum":
                probes.append(Probe(name, _spectrum))
            elif name == "grid":
                probes.append(Probe(name, lambda s, g: g.values.copy()))
            elif name == "increments":
                if not p_list or not shifts:
                    raise ConfigurationError("probe 'increments' needs p_list and shifts")
                pl, sh = tuple(p_list), tuple(int(x) for x in shifts)
                probes.append(Probe(name, _increments(pl, sh)))
            else:
                raise ConfigurationError(f"unknown probe '{name}'")
        except ValueError:
            raise ConfigurationError(f"bad probe argument in '{name}'")
    return probes


def evaluate(probes: tp.Sequence[Probe], s: SpectralField, g: GridField) -> tp.Dict[str, np.ndarray]:
    return {p.name: p(s, g) for p in probes}
