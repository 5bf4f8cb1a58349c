import typing as tp

import numpy as np

K = tp.TypeVar('K', bound=tp.Hashable)


class Moments:
    """
    count, mean and centered sum of squares of a stream of equally shaped
    arrays. Merging (|=) follows Chan et al., so partial results from
    different workers combine in any order to the same value up to round-off.
    """

    __slots__ = ('n', 'mean', 'm2')

    def __init__(self, n: int = 0, mean: tp.Any = 0.0, m2: tp.Any = 0.0) -> None:
        self.n = n
        self.mean = np.asarray(mean, dtype=np.float64)
        self.m2 = np.asarray(m2, dtype=np.float64)

    @classmethod
    def of(cls, value: tp.Any) -> 'Moments':
        v = np.asarray(value, dtype=np.float64)
        return cls(1, v.copy(), np.zeros_like(v))

    @classmethod
    def from_values(cls, values: tp.Iterable[tp.Any]) -> 'Moments':
        out = cls()
        for v in values:
            out.add(v)
        return out

    def add(self, value: tp.Any) -> None:
        self |= Moments.of(value)

    def __ior__(self, other: 'Moments') -> 'Moments':
        assert isinstance(other, Moments)
        if other.n == 0:
            return self
        if self.n == 0:
            self.n, self.mean, self.m2 = other.n, other.mean.copy(), other.m2.copy()
            return self
        n = self.n + other.n
        d = other.mean - self.mean
        self.mean = self.mean + d * (other.n / n)
        self.m2 = self.m2 + other.m2 + d * d * (self.n * other.n / n)
        self.n = n
        return self

    def __or__(self, other: 'Moments') -> 'Moments':
        out = Moments(self.n, self.mean.copy(), self.m2.copy())
        out |= other
        return out

    def __len__(self) -> int:
        return self.n

    @property
    def variance(self) -> np.ndarray:
        if self.n < 2:
            return np.zeros_like(self.mean)
        return self.m2 / (self.n - 1)

    @property
    def stderr(self) -> np.ndarray:
        if self.n < 2:
            return np.zeros_like(self.mean)
        return np.sqrt(self.variance / self.n)

    def __repr__(self) -> str:
        return '%s(n=%d, mean=%r)' % (self.__class__.__name__, self.n, self.mean)


class MomentTable(tp.Generic[K]):
    """Moments keyed by observable (or (nu, observable), ...); |= merges key by key"""

    _table: tp.Dict[K, Moments]

    def __init__(self, items: tp.Optional[tp.Iterable[tuple[K, tp.Any]]] = None) -> None:
        self._table = {}
        if items is not None:
            for item in items:
                self.add(item)

    def add(self, item: tuple[K, tp.Any]) -> None:
        assert isinstance(item, tuple) and len(item) == 2, "MomentTable takes (key, value) tuples"
        key, value = item
        self._table.setdefault(key, Moments()).add(value)

    def __ior__(self, other: 'MomentTable[K]') -> 'MomentTable[K]':
        assert isinstance(other, MomentTable)
        for key, m in other._table.items():
            acc = self._table.setdefault(key, Moments())
            acc |= m
        return self

    def __contains__(self, key: K) -> bool:
        return key in self._table

    def __getitem__(self, key: K) -> Moments:
        return self._table[key]

    def __iter__(self) -> tp.Iterator[K]:
        return iter(self._table)

    def __len__(self) -> int:
        return len(self._table)

    def keys(self) -> tp.KeysView[K]:
        return self._table.keys()

    def as_dict(self) -> tp.Dict[str, tuple[tp.Any, tp.Any]]:
        return {str(k): (m.mean.tolist(), m.stderr.tolist()) for k, m in self._table.items()}
