import sqlite3
import typing as tp
from dataclasses import dataclass, field

import numpy as np

from burgulence.errors import AlignmentError


@dataclass(frozen=True, slots=True, eq=False)
class Sample:
    member: int
    t: float
    probe: str
    value: np.ndarray


def to_row(run: str, sample: Sample) -> tuple[str, int, float, str, str, str, bytes]:
    v = np.ascontiguousarray(sample.value)
    shape = ",".join(str(d) for d in v.shape)
    return (run, sample.member, sample.t, sample.probe, v.dtype.str, shape, v.tobytes())


def from_row(row: sqlite3.Row) -> Sample:
    shape = tuple(int(d) for d in row['shape'].split(",") if d)
    value = np.frombuffer(row['value'], dtype=np.dtype(row['dtype'])).reshape(shape).copy()
    return Sample(member=row['member'], t=row['t'], probe=row['probe'], value=value)


@dataclass(slots=True)
class TrajectoryStream:
    """time-stamped observables of one noise realization"""
    probes: tuple[str, ...]
    member: int = 0
    times: list[float] = field(default_factory=list)
    values: dict[str, list[np.ndarray]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for name in self.probes:
            self.values.setdefault(name, [])

    def __len__(self) -> int:
        return len(self.times)

    def append(self, t: float, record: tp.Mapping[str, np.ndarray]) -> None:
        if self.times and t <= self.times[-1]:
            raise AlignmentError(f"sample time {t} is not after {self.times[-1]}")
        self.times.append(float(t))
        for name in self.probes:
            self.values[name].append(np.asarray(record[name]))

    def series(self, name: str) -> np.ndarray:
        return np.array(self.values[name])

    def t(self) -> np.ndarray:
        return np.array(self.times)

    def truncated(self, t_last: float) -> 'TrajectoryStream':
        """samples with t <= t_last"""
        n = int(np.searchsorted(np.array(self.times), t_last, side='right'))
        out = TrajectoryStream(self.probes, self.member)
        out.times = self.times[:n]
        out.values = {name: v[:n] for name, v in self.values.items()}
        return out

    def samples(self, since: float = -np.inf) -> tp.Iterator[Sample]:
        for i, t in enumerate(self.times):
            if t > since:
                for name in self.probes:
                    yield Sample(self.member, t, name, self.values[name][i])

    @classmethod
    def from_samples(cls, probes: tp.Sequence[str], member: int, samples: tp.Iterable[Sample]) -> 'TrajectoryStream':
        by_time: dict[float, dict[str, np.ndarray]] = {}
        for s in samples:
            by_time.setdefault(s.t, {})[s.probe] = s.value
        out = cls(tuple(probes), member)
        for t in sorted(by_time):
            out.append(t, by_time[t])
        return out


S = tp.TypeVar('S')


@dataclass(frozen=True, slots=True)
class Resume(tp.Generic[S]):
    """solver state, next lattice step and the samples recorded so far"""
    state: S
    step_index: int
    stream: TrajectoryStream
