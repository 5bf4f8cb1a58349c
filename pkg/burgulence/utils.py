import time

from burgulence.errors import ConfigurationError


class mytimer:
    def __init__(self) -> None:
        self.start = time.time()

    @property
    def get(self) -> str:
        delta: float = round(time.time() - self.start, 2)
        self.start = time.time()
        return str(delta)

    @property
    def seconds(self) -> float:
        """elapsed seconds since the last reset, without resetting"""
        return time.time() - self.start


def is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


def check_power_of_two(n: int, minimum: int = 4) -> None:
    if not is_power_of_two(n) or n < minimum:
        raise ConfigurationError(f"grid size must be a power of two >= {minimum}, got {n}")


def next_power_of_two(x: float) -> int:
    n = 1
    while n < x:
        n *= 2
    return n
