import dataclasses
import logging
import os
import pathlib
import re
import typing as tp
from dataclasses import dataclass, field

import yaml

from burgulence.errors import ConfigurationError
from burgulence.forcing import ForcingSpec, inverse_s_bandlimited
from burgulence.utils import next_power_of_two

cnf: tp.Dict[str, tp.Any] = {}

CONFIGFLAGFILE = pathlib.Path.home() / ".burgulence.log"
if CONFIGFLAGFILE.exists():
    cnf['LOGLEVEL'] = logging.DEBUG
else:
    cnf['LOGLEVEL'] = logging.ERROR
if level := os.environ.get("BURGULENCE_LOGLEVEL"):
    cnf['LOGLEVEL'] = logging.getLevelName(level.upper())

try:
    cnf['WORKERS'] = max(1, int(os.environ.get("BURGULENCE_WORKERS", os.cpu_count() or 1)))
except ValueError:
    raise SystemExit("BURGULENCE_WORKERS must be an integer")

RULE = re.compile(r"^\s*inverse_s_bandlimited\s*\(\s*(\d+)\s*,\s*([0-9.eE+-]+)\s*\)\s*$")


@dataclass(frozen=True)
class ForcingConfig:
    rule: str = "inverse_s_bandlimited"
    s_max: int = 4
    b0: float = 1.0
    coefficients: tp.Optional[tp.Dict[int, float]] = None

    def spec(self, seed: int, member_id: int = 0) -> ForcingSpec:
        if self.rule == "explicit":
            if not self.coefficients:
                raise ConfigurationError("forcing.rule 'explicit' needs forcing.coefficients")
            return ForcingSpec({int(s): float(b) for s, b in self.coefficients.items()}, seed, member_id)
        if self.rule == "inverse_s_bandlimited":
            return inverse_s_bandlimited(self.s_max, self.b0, seed, member_id)
        if m := RULE.match(self.rule):
            return inverse_s_bandlimited(int(m.group(1)), float(m.group(2)), seed, member_id)
        raise ConfigurationError(f"unknown forcing rule '{self.rule}'")


@dataclass(frozen=True)
class ResolutionConfig:
    factor: float = 8.0
    n_min: int = 64
    n_max: int = 8192

    def grid_size(self, nu: float) -> int:
        """smallest power of two >= max(n_min, factor / nu)"""
        return next_power_of_two(max(self.n_min, self.factor / nu))


@dataclass(frozen=True)
class ScheduleConfig:
    dt_max: float = 1e-3
    cfl: float = 0.4
    observable_stride: int = 100
    min_substeps: int = 1
    checkpoint_every: int = 1000


@dataclass(frozen=True)
class BracketConfig:
    T: float = 5.0
    sigma: float = 10.0
    ensemble_size: int = 16
    sigma_min: float = 1.0
    sensitivity: bool = False
    decorrelate: bool = True


@dataclass(frozen=True)
class SpectrumConfig:
    M: float = 2.0
    k_lo: int = 4
    inertial_c: float = 0.25
    decay_threshold: float = -4.0
    band: float = 2.0
    beyond_factor: float = 4.0
    beyond_decay: float = 1e3


@dataclass(frozen=True)
class StructureConfig:
    p_list: tp.Tuple[float, ...] = (0.5, 1.0, 2.0, 3.0, 4.0)
    n_l: int = 32
    inertial_c: float = 10.0
    c1: float = 0.05
    dissipation_c: float = 1.0
    prefactor_p: float = 0.5


@dataclass(frozen=True)
class MixingConfig:
    nu_list: tp.Tuple[float, ...] = (1e-2, 1e-3)
    t_end: float = 20.0
    t_step: float = 1.0
    ensemble_size: int = 16
    amplitude: float = 1.0
    decay_fraction: float = 0.2
    uniformity_factor: float = 2.0
    low_modes: int = 3
    contraction_pairs: int = 8
    contraction_slack: float = 0.01


@dataclass(frozen=True)
class InviscidConfig:
    N: int = 8192
    k_lo: int = 4
    k_hi_fraction: float = 1.0 / 6.0
    c1: float = 0.05
    compare_nu: tp.Tuple[float, ...] = (1e-2, 3e-3, 1e-3)
    compare_N: int = 1024
    compare_t_end: float = 1.0
    cfl: float = 0.4


@dataclass(frozen=True)
class ToleranceConfig:
    energy_balance: float = 0.15
    sobolev_m1: float = 0.2
    sobolev_m2: float = 0.5
    spectrum_slope: float = 0.15
    c_d: float = 0.2
    structure_low: float = 0.1
    structure_high: float = 0.15
    dissipation_range: float = 0.2
    inviscid_slope: float = 0.2
    inviscid_s1: float = 0.1
    inviscid_s2: float = 0.15
    stderr_factor: float = 2.0
    sensitivity: float = 0.1


@dataclass(frozen=True)
class ExperimentConfig:
    model: str = "viscous"
    nu_list: tp.Tuple[float, ...] = (1e-2, 3e-3, 1e-3)
    seed: int = 0
    out: pathlib.Path = pathlib.Path("burgulence-out")
    probes: tp.Tuple[str, ...] = ("sobolev:0", "sobolev:1", "oleinik")
    forcing: ForcingConfig = field(default_factory=ForcingConfig)
    resolution: ResolutionConfig = field(default_factory=ResolutionConfig)
    schedule: ScheduleConfig = field(default_factory=ScheduleConfig)
    bracket: BracketConfig = field(default_factory=BracketConfig)
    spectrum: SpectrumConfig = field(default_factory=SpectrumConfig)
    structure: StructureConfig = field(default_factory=StructureConfig)
    mixing: MixingConfig = field(default_factory=MixingConfig)
    inviscid: InviscidConfig = field(default_factory=InviscidConfig)
    tolerance: ToleranceConfig = field(default_factory=ToleranceConfig)

    def validate(self) -> 'ExperimentConfig':
        if self.model not in ("viscous", "inviscid", "linearized"):
            raise ConfigurationError(f"model must be viscous, inviscid or linearized, got '{self.model}'")
        if not self.nu_list:
            raise ConfigurationError("nu_list is empty")
        for nu in self.nu_list:
            if not (0.0 < nu <= 1.0):
                raise ConfigurationError(f"nu={nu} outside (0, 1]")
            N = self.resolution.grid_size(nu)
            if N > self.resolution.n_max:
                raise ConfigurationError(f"nu={nu} needs N={N} > n_max={self.resolution.n_max} (N >= {self.resolution.factor}/nu)")
        if self.bracket.T < 1.0 or self.bracket.sigma < self.bracket.sigma_min:
            raise ConfigurationError(f"bracket needs T >= 1 and sigma >= {self.bracket.sigma_min}")
        if self.bracket.ensemble_size < 1 or self.mixing.ensemble_size < 1:
            raise ConfigurationError("ensemble sizes must be >= 1")
        if self.mixing.contraction_pairs < 0 or self.mixing.contraction_slack < 0 or not self.mixing.amplitude > 0:
            raise ConfigurationError("mixing needs contraction_pairs >= 0, contraction_slack >= 0 and amplitude > 0")
        if self.schedule.observable_stride < 1 or self.schedule.dt_max <= 0:
            raise ConfigurationError("schedule needs observable_stride >= 1 and dt_max > 0")
        self.forcing.spec(self.seed).validate()
        return self

    def grid_size(self, nu: float) -> int:
        return self.resolution.grid_size(nu)

    def echo(self) -> tp.Dict[str, tp.Any]:
        """the resolved config, defaults included, as plain JSON types"""
        return _plain(dataclasses.asdict(self))


def _plain(x: tp.Any) -> tp.Any:
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, pathlib.Path):
        return str(x)
    return x


def _coerce(value: tp.Any, hint: tp.Any, key: str) -> tp.Any:
    origin = tp.get_origin(hint)
    args = tp.get_args(hint)
    try:
        if dataclasses.is_dataclass(hint):
            return from_mapping(tp.cast(tp.Type[tp.Any], hint), value, key)
        if origin is tp.Union:
            if value is None:
                return None
            return _coerce(value, next(a for a in args if a is not type(None)), key)
        if origin is tuple:
            if isinstance(value, (str, bytes)) or not isinstance(value, tp.Iterable):
                value = [value]
            return tuple(_coerce(v, args[0], key) for v in value)
        if origin is dict:
            return {_coerce(k, args[0], key): _coerce(v, args[1], key) for k, v in value.items()}
        if hint is bool:
            if not isinstance(value, bool):
                raise ValueError(value)
            return value
        if hint in (int, float, str):
            return hint(value)
        if hint is pathlib.Path:
            return pathlib.Path(value)
    except (TypeError, ValueError, AttributeError):
        raise ConfigurationError(f"bad value {value!r} for '{key}'")
    return value


D = tp.TypeVar('D')


def from_mapping(cls: tp.Type[D], data: tp.Any, prefix: str = "") -> D:
    """build the dataclass cls from a mapping, rejecting unknown keys"""
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigurationError(f"'{prefix or '<root>'}' must be a mapping")
    hints = tp.get_type_hints(cls)
    names = {f.name for f in dataclasses.fields(tp.cast(tp.Any, cls))}
    kwargs = {}
    for key, value in data.items():
        dotted = f"{prefix}.{key}" if prefix else str(key)
        if key not in names:
            raise ConfigurationError(f"unknown config key '{dotted}'")
        kwargs[key] = _coerce(value, hints[key], dotted)
    return cls(**kwargs)


def load_config(path: tp.Optional[pathlib.Path] = None, *, nu: tp.Sequence[float] = (), seed: tp.Optional[int] = None,
                out: tp.Optional[pathlib.Path] = None) -> ExperimentConfig:
    data: tp.Dict[str, tp.Any] = {}
    if path is not None:
        try:
            with open(path) as f:
                data = yaml.safe_load(f) or {}
        except OSError as e:
            raise ConfigurationError(f"cannot read config {path}: {e.strerror}")
        except yaml.YAMLError as e:
            raise ConfigurationError(f"cannot parse config {path}: {e}")
    cfg = from_mapping(ExperimentConfig, data)
    overrides: tp.Dict[str, tp.Any] = {}
    if nu:
        overrides['nu_list'] = tuple(float(v) for v in nu)
    if seed is not None:
        overrides['seed'] = int(seed)
    if out is not None:
        overrides['out'] = pathlib.Path(out)
    return dataclasses.replace(cfg, **overrides).validate()
