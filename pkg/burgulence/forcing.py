"""
Wiener forcing xi(t,x) = sum_s b_s beta_s(t) e_s(x) with e_k = sqrt2 cos(2 pi k x),
e_-k = sqrt2 sin(2 pi k x).

Increments are drawn from a counter-based generator (numpy Philox): the key is
(seed, member_id), the counter carries the step index. Within a step the
normals are drawn in the fixed order s = 1, -1, 2, -2, ..., so the draw for a
given (seed, member_id, s, step_index) does not depend on S_max or other state.
"""
import math
import typing as tp
from dataclasses import dataclass, field, replace

import numpy as np

from burgulence.errors import ConfigurationError
from burgulence.fields import GridField, SpectralField

UINT64 = (1 << 64) - 1


@dataclass(frozen=True, slots=True)
class ForcingSpec:
    coefficients: tp.Mapping[int, float] = field(default_factory=dict)
    seed: int = 0
    member_id: int = 0

    def __post_init__(self) -> None:
        coefficients = {int(s): float(b) for s, b in self.coefficients.items()}
        if 0 in coefficients:
            raise ConfigurationError("forcing coefficient b_0 is not allowed (zero mean force)")
        for s, b in coefficients.items():
            if not math.isfinite(b):
                raise ConfigurationError(f"forcing coefficient b_{s} is not finite")
        object.__setattr__(self, 'coefficients', coefficients)

    @property
    def s_max(self) -> int:
        return max((abs(s) for s, b in self.coefficients.items() if b != 0.0), default=0)

    def b(self, s: int) -> float:
        return self.coefficients.get(s, 0.0)

    def validate(self) -> None:
        """experiment runs need a nondegenerate force: 0 < B_0 < inf"""
        b0 = b_constant(self, 0)
        if not (0.0 < b0 < math.inf):
            raise ConfigurationError(f"forcing needs 0 < B_0 < inf, got B_0={b0}")

    def with_member(self, member_id: int) -> 'ForcingSpec':
        return replace(self, member_id=member_id)

    def describe(self) -> tp.Dict[str, tp.Any]:
        return {'coefficients': {str(s): b for s, b in sorted(self.coefficients.items())},
                'seed': self.seed, 'member_id': self.member_id}


@dataclass(frozen=True, slots=True)
class NoiseIncrement:
    dt: float
    delta: SpectralField

    def split(self, parts: int) -> 'NoiseIncrement':
        """one of `parts` equal pieces of this increment (linear interpolation of the path)"""
        return NoiseIncrement(dt=self.dt / parts, delta=self.delta.scaled(1.0 / parts))


def inverse_s_bandlimited(s_max: int = 4, b0: float = 1.0, seed: int = 0, member_id: int = 0) -> ForcingSpec:
    """b_s proportional to 1/|s| for 1 <= |s| <= s_max, rescaled to sum b_s^2 = b0"""
    if s_max < 1 or b0 <= 0:
        raise ConfigurationError(f"inverse_s_bandlimited needs s_max >= 1 and B0 > 0, got ({s_max}, {b0})")
    raw = {s: 1.0 / abs(s) for s in range(-s_max, s_max + 1) if s != 0}
    norm = math.sqrt(b0 / sum(b * b for b in raw.values()))
    return ForcingSpec(coefficients={s: b * norm for s, b in raw.items()}, seed=seed, member_id=member_id)


def b_constant(spec: ForcingSpec, m: int) -> float:
    return float(sum((2.0 * math.pi * abs(s)) ** (2 * m) * b * b for s, b in spec.coefficients.items()))


def _generator(spec: ForcingSpec, step_index: int) -> np.random.Generator:
    key = np.array([spec.seed & UINT64, spec.member_id & UINT64], dtype=np.uint64)
    counter = np.array([0, step_index & UINT64, 0, 0], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key, counter=counter))


def standard_normals(spec: ForcingSpec, step_index: int) -> tp.Dict[int, float]:
    """N(0,1) draws keyed by s for one step"""
    S = spec.s_max
    if S == 0:
        return {}
    z = _generator(spec, step_index).standard_normal(2 * S)
    order = [sign * k for k in range(1, S + 1) for sign in (1, -1)]
    return dict(zip(order, z.tolist()))


def sample_increment(spec: ForcingSpec, dt: float, step_index: int) -> NoiseIncrement:
    """
    sum_s b_s dbeta_s e_s in complex modes: mode k gets
    (b_k dbeta_k - i b_-k dbeta_-k) / sqrt2.
    """
    S = spec.s_max
    c = np.zeros(max(S, 1), dtype=np.complex128)
    if S:
        z = standard_normals(spec, step_index)
        scale = math.sqrt(dt) / math.sqrt(2.0)
        for k in range(1, S + 1):
            c[k - 1] = scale * (spec.b(k) * z[k] - 1j * spec.b(-k) * z[-k])
    return NoiseIncrement(dt=dt, delta=SpectralField(c))


def brownian_increments(spec: ForcingSpec, dt: float, steps: int, start: int = 0) -> tp.Dict[int, np.ndarray]:
    """dbeta_s for step indices start..start+steps-1, one array per s"""
    out: tp.Dict[int, tp.List[float]] = {s: [] for s in spec.coefficients}
    for n in range(start, start + steps):
        z = standard_normals(spec, n)
        for s in out:
            out[s].append(math.sqrt(dt) * z.get(s, 0.0))
    return {s: np.array(v) for s, v in out.items()}


def basis_samples(s: int, N: int) -> GridField:
    if s == 0:
        raise ConfigurationError("basis index s=0 does not exist")
    if s > 0:
        return GridField.from_function(lambda x: math.sqrt(2.0) * np.cos(2 * math.pi * s * x), N)
    return GridField.from_function(lambda x: math.sqrt(2.0) * np.sin(-2 * math.pi * s * x), N)
