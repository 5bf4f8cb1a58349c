import itertools
import math
import typing as tp

import numpy as np
import pytest

from burgulence.checkpoint import decode, encode
from burgulence.data import Resume, TrajectoryStream
from burgulence.errors import ConfigurationError, DomainError, StepSizeError
from burgulence.forcing import ForcingSpec, inverse_s_bandlimited
from burgulence.integrator import StepSchedule
from burgulence.inviscid import (CellField, from_checkpoint, godunov_flux, riemann_flux, riemann_state,
                                 simulate_inviscid, step_inviscid, to_checkpoint, total_variation)
from burgulence.probes import resolve_probes


def sine_cells(N: int) -> CellField:
    return CellField.from_function(lambda x: np.sin(2 * math.pi * x), N)


def sine_characteristics(t: float) -> tp.Callable[[np.ndarray], np.ndarray]:
    """u(x, t) = sin(2 pi xi) with x = xi + t sin(2 pi xi), valid before the shock at t = 1/(2 pi)"""
    def u(x: np.ndarray) -> np.ndarray:
        xi = np.array(x, dtype=np.float64)
        for _ in range(50):
            xi -= (xi + t * np.sin(2 * math.pi * xi) - x) / (1.0 + 2 * math.pi * t * np.cos(2 * math.pi * xi))
        return np.sin(2 * math.pi * xi)
    return u


class TestRiemann:

    @pytest.mark.parametrize('ul, ur, expected', [
        (1.0, -1.0, 0.5),     # stationary shock
        (2.0, 1.0, 2.0),      # right-moving shock
        (-1.0, -2.0, 2.0),    # left-moving shock
        (-1.0, 1.0, 0.0),     # transonic rarefaction
        (0.5, 2.0, 0.125),    # right-moving rarefaction
        (-2.0, -0.5, 0.125),  # left-moving rarefaction
    ])
    def test_wave_cases(self, ul: float, ur: float, expected: float) -> None:
        assert riemann_flux(ul, ur) == expected

    def test_flux_lattice(self) -> None:
        values = np.linspace(-2.0, 2.0, 100)
        ul, ur = (np.array(v) for v in zip(*itertools.product(values, values)))
        vectorized = godunov_flux(ul, ur)
        for a, b, f in zip(ul, ur, vectorized):
            s = riemann_state(a, b)
            exact = 0.5 * s * s
            assert riemann_flux(a, b) == exact
            assert f == exact


class TestCellField:

    def test_from_function(self) -> None:
        N = 16
        c = sine_cells(N)
        j = np.arange(N)
        exact = (np.cos(2 * math.pi * j / N) - np.cos(2 * math.pi * (j + 1) / N)) * N / (2 * math.pi)
        assert np.allclose(c.averages, exact, atol=1e-13)

    def test_rejects_nonzero_mean(self) -> None:
        with pytest.raises(DomainError):
            CellField(np.ones(8))
        with pytest.raises(ConfigurationError):
            CellField(np.zeros(12))


class TestStep:

    def test_conservative_and_tvd(self) -> None:
        c = sine_cells(128)
        tv = [total_variation(c)]
        for _ in range(200):
            c = step_inviscid(c, 2e-3, cfl=0.5)
            tv.append(total_variation(c))
        assert abs(np.mean(c.averages)) < 1e-14
        assert np.all(np.diff(tv) <= 1e-12)
        assert math.isclose(c.t, 0.4)
        assert np.max(c.averages) <= 1.0 + 1e-12

    def test_pre_shock_characteristics(self) -> None:
        N, dt, steps = 1024, 2e-4, 500
        c = sine_cells(N)
        for _ in range(steps):
            c = step_inviscid(c, dt, cfl=0.5)
        assert math.isclose(c.t, 0.1)
        exact = CellField.from_function(sine_characteristics(0.1), N)
        assert np.max(np.abs(c.averages - exact.averages)) < 2e-2

    def test_cfl_breach(self) -> None:
        with pytest.raises(StepSizeError):
            step_inviscid(sine_cells(64), 0.1)
        with pytest.raises(ConfigurationError):
            step_inviscid(sine_cells(64), 1e-4, cfl=0.95)


class TestSimulate:

    def test_unforced_refines_substeps(self) -> None:
        sched = StepSchedule(dt_max=0.05, t_end=0.5, observable_stride=5, cfl=0.5)
        stream = simulate_inviscid(sine_cells(64), ForcingSpec({}), sched, resolve_probes(["lp:1", "oleinik"]))
        assert np.allclose(stream.t(), [0.0, 0.25, 0.5])
        l1 = stream.series("lp:1")
        assert np.all(np.diff(l1) <= 1e-12)

    def test_rejects_large_cfl(self) -> None:
        sched = StepSchedule(cfl=0.95, t_end=0.01)
        with pytest.raises(ConfigurationError):
            simulate_inviscid(sine_cells(64), ForcingSpec({}), sched, [])

    def test_coupled_contraction(self) -> None:
        spec = inverse_s_bandlimited(seed=6)
        sched = StepSchedule(dt_max=5e-4, t_end=0.5, observable_stride=100)
        probes = resolve_probes(["grid"])
        a = simulate_inviscid(sine_cells(256), spec, sched, probes).series("grid")
        b = simulate_inviscid(CellField(np.zeros(256)), spec, sched, probes).series("grid")
        l1 = np.mean(np.abs(a - b), axis=1)
        assert np.all(np.diff(l1) <= 1e-12)

    def test_resume_is_bit_identical(self) -> None:
        spec = inverse_s_bandlimited(seed=1)
        sched = StepSchedule(dt_max=1e-3, t_end=0.1, observable_stride=10)
        probes = resolve_probes(["grid", "spectrum"])
        saved: tp.List[tp.Tuple[CellField, int, TrajectoryStream]] = []

        def on_checkpoint(c: CellField, n: int, stream: TrajectoryStream) -> None:
            saved.append((c, n, stream.truncated(c.t)))

        full = simulate_inviscid(sine_cells(64), spec, sched, probes, on_checkpoint=on_checkpoint, checkpoint_every=40)
        c, n, stream = saved[0]
        restored = from_checkpoint(decode(encode(to_checkpoint(c, spec, n))))
        resumed = simulate_inviscid(sine_cells(64), spec, sched, probes, resume=Resume(restored, n, stream))
        assert resumed.times == full.times
        assert np.array_equal(resumed.series("grid"), full.series("grid"))
