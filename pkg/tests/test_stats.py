import math
import typing as tp

import numpy as np
import pytest

from burgulence.data import TrajectoryStream
from burgulence.errors import (AlignmentError, ConfigurationError, CoverageError, DomainError, FitError, RangeError,
                               UnderResolutionError)
from burgulence.fields import GridField, SpectralField, sobolev_norm_sq, to_grid, to_spectral
from burgulence.probes import resolve_probes
from burgulence.stats import (BracketSpec, SpectrumReport, bracket_average, contraction_violation,
                              decorrelation_stride, dissipation_scale, energy_layer, fit_power_law, increment_moment,
                              integrated_autocorrelation_time, layer_means, mixing_distance, oleinik_moments,
                              pathwise_l1, shell_energies, shift_of, spectrum_report, structure_function,
                              structure_function_spectral, structure_table, time_average)

SPEC = BracketSpec(T=1.0, sigma=2.0, ensemble_size=3)


def stream(member: int, times: tp.Sequence[float], **series: tp.Sequence[tp.Any]) -> TrajectoryStream:
    s = TrajectoryStream(tuple(series), member)
    for i, t in enumerate(times):
        s.append(t, {name: np.asarray(v[i], dtype=np.float64) for name, v in series.items()})
    return s


def random_field(K: int, seed: int) -> SpectralField:
    rng = np.random.default_rng(seed)
    return SpectralField((rng.normal(size=K) + 1j * rng.normal(size=K)) / np.arange(1, K + 1))


class TestBracket:

    def test_spec_validation(self) -> None:
        with pytest.raises(ConfigurationError):
            BracketSpec(T=0.5)
        with pytest.raises(ConfigurationError):
            BracketSpec(sigma=0.5)
        with pytest.raises(ConfigurationError):
            BracketSpec(ensemble_size=0)
        with pytest.raises(ConfigurationError):
            BracketSpec(sample_stride=0)
        assert BracketSpec().t_end == 15.0

    def test_time_average_of_linear(self) -> None:
        t = np.linspace(0.0, 4.0, 9)
        assert np.isclose(time_average(t, t, 1.2, 2.0), 2.2)
        assert np.isclose(time_average(t, 3 * np.ones_like(t), 1.0, 2.0), 3.0)

    def test_time_average_with_stride(self) -> None:
        t = np.linspace(0.0, 4.0, 41)
        assert np.isclose(time_average(t, t, 1.0, 2.0, stride=7), 2.0)
        wiggle = np.where(np.arange(41) % 2 == 1, 1.0, -1.0)
        assert np.isclose(time_average(t, wiggle, 1.0, 2.0, stride=2), 0.9)
        assert abs(time_average(t, wiggle, 1.0, 2.0)) < 1e-12

    def test_time_average_of_vectors(self) -> None:
        t = np.linspace(0.0, 4.0, 5)
        v = np.stack([t, 2 * t], axis=1)
        assert np.allclose(time_average(t, v, 1.0, 2.0), [2.0, 4.0])

    def test_coverage(self) -> None:
        t = np.linspace(0.0, 2.0, 5)
        with pytest.raises(CoverageError):
            time_average(t, t, 1.0, 2.0)
        with pytest.raises(CoverageError):
            bracket_average([], "x", SPEC)

    def test_bracket_of_constants(self) -> None:
        times = [0.0, 1.0, 2.0, 3.0]
        streams = [stream(m, times, x=[c] * 4) for m, c in enumerate((1.0, 2.0, 6.0))]
        mean, err = bracket_average(streams, "x", SPEC)
        assert np.isclose(mean, 3.0)
        assert np.isclose(err, math.sqrt(np.var([1.0, 2.0, 6.0], ddof=1) / 3))

    def test_bracket_of_callable(self) -> None:
        times = [0.0, 1.0, 2.0, 3.0]
        streams = [stream(0, times, x=[[1.0, 2.0]] * 4)]
        mean, err = bracket_average(streams, lambda s: s.series("x").sum(axis=1), SPEC)
        assert np.isclose(mean, 3.0)
        assert err == 0.0

    def test_independent_of_member_order(self) -> None:
        times = np.linspace(0.0, 3.0, 7)
        rng = np.random.default_rng(0)
        streams = [stream(m, times, x=rng.normal(size=7)) for m in range(5)]
        a = bracket_average(streams, "x", SPEC)
        b = bracket_average(streams[::-1], "x", SPEC)
        assert np.isclose(a.mean, b.mean, rtol=1e-14) and np.isclose(a.stderr, b.stderr, rtol=1e-12)


class TestStructureFunctions:

    def test_shift(self) -> None:
        assert shift_of(0.25, 64) == 16
        with pytest.raises(AlignmentError):
            shift_of(0.3, 64)

    def test_increment_moment(self) -> None:
        g = GridField(np.array([1.0, -1.0, 1.0, -1.0]))
        assert increment_moment(g, 2.0, 1) == 4.0
        assert increment_moment(g, 1.0, 2) == 0.0
        with pytest.raises(DomainError):
            increment_moment(g, 0.0, 1)

    @pytest.mark.parametrize('k', [2, 4, 8, 16])
    def test_parseval(self, k: int) -> None:
        N = 64
        s = random_field(16, 7)
        g = to_grid(s, N)
        physical = increment_moment(g, 2.0, N // k)
        assert abs(physical - structure_function_spectral(s, 1.0 / k)) <= 1e-8 * physical

    def test_structure_function_from_grid(self) -> None:
        g = to_grid(random_field(8, 2), 32).values
        streams = [stream(0, [0.0, 1.0, 2.0, 3.0], grid=[g] * 4)]
        mean, _ = structure_function(streams, 2.0, 0.25, SPEC)
        assert np.isclose(mean, increment_moment(GridField(g), 2.0, 8))
        with pytest.raises(DomainError):
            structure_function(streams, 2.0, 0.75, SPEC)

    def test_structure_function_empty_ensemble(self) -> None:
        with pytest.raises(CoverageError, match="empty ensemble"):
            structure_function([], 2.0, 0.25, SPEC)

    def test_structure_table_and_flatness(self) -> None:
        g = to_grid(random_field(8, 3), 32)
        p_list, shifts = (1.0, 2.0, 4.0), (1, 2, 4)
        [increments] = resolve_probes(["increments"], p_list=p_list, shifts=shifts)
        row = increments(to_spectral(g), g)
        streams = [stream(0, [0.0, 1.0, 2.0, 3.0], increments=[row] * 4)]
        rep = structure_table(streams, p_list, shifts, 32, SPEC)
        assert rep.S.shape == (3, 3)
        assert np.allclose(rep.l, [1 / 32, 2 / 32, 4 / 32])
        assert np.isclose(rep.S[1, 2], increment_moment(g, 2.0, 4))
        assert np.allclose(rep.flatness(), rep.S[2] / rep.S[1] ** 2)


class TestSpectrum:

    def test_energy_layer(self) -> None:
        s = SpectralField(np.array([1.0, 2.0, 0.0, 2.0]))
        assert np.isclose(energy_layer(s, 2, 2.0), 0.5 * (1 + 4 + 0 + 4) / 4)
        assert np.isclose(energy_layer(s, 1, 2.0), 0.5 * (1 + 4) / 2)
        with pytest.raises(RangeError):
            energy_layer(s, 3, 2.0)
        with pytest.raises(DomainError):
            energy_layer(s, 0, 2.0)

    def test_layer_means_match(self) -> None:
        s = random_field(20, 4)
        modes = 0.5 * np.abs(s.coeffs) ** 2
        ks = [1, 2, 3, 5, 10]
        assert np.allclose(layer_means(modes, ks), [energy_layer(s, k) for k in ks])

    def test_shell_sum(self) -> None:
        s = random_field(37, 5)
        assert np.isclose(shell_energies(s).sum(), 0.5 * sobolev_norm_sq(s, 0))

    def test_spectrum_report(self) -> None:
        s = random_field(10, 6)
        modes = 0.5 * np.abs(s.coeffs) ** 2
        streams = [stream(0, [0.0, 1.0, 2.0, 3.0], spectrum=[modes] * 4)]
        rep = spectrum_report(streams, [1, 2, 4], 2.0, SPEC)
        assert np.allclose(rep.E, [energy_layer(s, k) for k in (1, 2, 4)])


class TestFits:

    def test_exact_power_law(self) -> None:
        x = np.arange(1.0, 20.0)
        points = list(zip(x, 3.0 * x ** -2.0, 0.01 * x ** -2.0))
        fit = fit_power_law(points, (2.0, 15.0))
        assert np.isclose(fit.exponent, -2.0)
        assert np.isclose(fit.prefactor, 3.0)
        assert fit.n_points == 14

    def test_unweighted(self) -> None:
        points = [(x, x ** 0.5, 0.0) for x in (0.01, 0.02, 0.04, 0.08)]
        assert np.isclose(fit_power_law(points, (0.0, 1.0)).exponent, 0.5)

    def test_too_few_points(self) -> None:
        points = [(x, x, 0.1) for x in (1.0, 2.0, 3.0)]
        with pytest.raises(FitError):
            fit_power_law(points, (1.0, 3.0))

    def test_nonpositive(self) -> None:
        points = [(x, -x, 0.1) for x in (1.0, 2.0, 3.0, 4.0)]
        with pytest.raises(DomainError):
            fit_power_law(points, (1.0, 4.0))

    def test_dissipation_scale(self) -> None:
        k = np.arange(1, 201)
        E = k ** -2.0 * np.exp(-(k / 50.0) ** 2)
        k_star = dissipation_scale(SpectrumReport(k, E, np.zeros_like(E), 2.0))
        assert 45 <= k_star <= 60

    def test_no_breakpoint(self) -> None:
        k = np.arange(1, 101)
        with pytest.raises(UnderResolutionError):
            dissipation_scale(SpectrumReport(k, k ** -2.0, np.zeros(100), 2.0))


class TestDiagnostics:

    def test_autocorrelation_white(self) -> None:
        x = np.random.default_rng(1).normal(size=4000)
        assert integrated_autocorrelation_time(x, 0.1) < 0.15

    def test_autocorrelation_ar1(self) -> None:
        rng = np.random.default_rng(2)
        x = np.zeros(20000)
        for i in range(1, len(x)):
            x[i] = 0.9 * x[i - 1] + rng.normal()
        assert abs(integrated_autocorrelation_time(x, 1.0) - 19.0) < 6.0

    def test_decorrelation_stride(self) -> None:
        rng = np.random.default_rng(4)
        times = np.linspace(0.0, 3.0, 20001)
        white = [stream(m, times, x=rng.normal(size=20001)) for m in range(2)]
        assert decorrelation_stride(white, "x", SPEC) <= 2
        assert decorrelation_stride([stream(0, times, x=np.ones(20001))], "x", SPEC) == 1
        correlated = []
        for m in range(4):
            x = np.zeros(20001)
            for i in range(1, len(x)):
                x[i] = 0.9 * x[i - 1] + rng.normal()
            correlated.append(stream(m, times, x=np.stack([x, x], axis=1)))
        assert 12 <= decorrelation_stride(correlated, "x", SPEC) <= 26
        with pytest.raises(CoverageError):
            decorrelation_stride([], "x", SPEC)

    def test_constant_series(self) -> None:
        assert integrated_autocorrelation_time(np.ones(10), 0.5) == 0.5

    def test_oleinik_moments(self) -> None:
        streams = [stream(0, [0.0, 1.0, 2.0, 3.0], oleinik=[[1.0, 2.0, 3.0]] * 4)]
        mean, _ = oleinik_moments(streams, 2, SPEC)
        assert np.isclose(mean, 14.0)


class TestMixing:

    def test_identical_ensembles(self) -> None:
        times = [0.0, 1.0, 2.0]
        rng = np.random.default_rng(3)
        ens = [stream(m, times, grid=rng.normal(size=(3, 8)), e=rng.normal(size=3)) for m in range(4)]
        d = mixing_distance(ens, ens, {"e": "e"}, times, coupled=True)
        assert np.all(d.distance["e"] == 0.0)
        assert d.l1 is not None and np.all(d.l1 == 0.0)

    def test_distance(self) -> None:
        times = [0.0, 1.0]
        a = [stream(m, times, e=[1.0, 1.0]) for m in range(2)]
        b = [stream(m, times, e=[0.0, 0.5]) for m in range(2)]
        d = mixing_distance(a, b, {"e": "e"}, [1.0])
        assert np.allclose(d.distance["e"], [0.5])
        assert np.allclose(d.stderr["e"], [0.0])

    def test_misaligned(self) -> None:
        a = [stream(0, [0.0, 1.0], e=[1.0, 1.0], grid=[[1.0, -1.0]] * 2)]
        b = [stream(0, [0.0, 0.5], e=[1.0, 1.0], grid=[[1.0, -1.0]] * 2)]
        with pytest.raises(AlignmentError):
            mixing_distance(a, b, {"e": "e"}, [1.0])
        with pytest.raises(AlignmentError):
            mixing_distance(a, a + a, {}, [0.0], coupled=True)

    def test_pathwise_rise_hidden_by_the_mean(self) -> None:
        times = [0.0, 1.0, 2.0]

        def member(m: int, amplitudes: tp.Sequence[float]) -> TrajectoryStream:
            return stream(m, times, grid=[[x, -x] for x in amplitudes])

        a = [member(0, [1.0, 0.5, 0.6]), member(1, [1.0, 0.2, 0.1])]
        b = [member(0, [0.0, 0.0, 0.0]), member(1, [0.0, 0.0, 0.0])]
        paths = pathwise_l1(a, b, times)
        assert np.allclose(paths, [[1.0, 0.5, 0.6], [1.0, 0.2, 0.1]])
        d = mixing_distance(a, b, {}, times, coupled=True)
        assert d.l1 is not None and np.allclose(d.l1, [1.0, 0.35, 0.35])
        assert np.isclose(contraction_violation(paths), 0.1)
        assert contraction_violation(d.l1) == 0.0
        assert contraction_violation(paths[1]) == 0.0

    def test_contraction_violation_edge_cases(self) -> None:
        assert contraction_violation(np.array([[2.0]])) == 0.0
        assert np.isclose(contraction_violation(np.array([2.0, 1.0, 1.5, 1.2])), 0.25)
        with pytest.raises(DomainError):
            contraction_violation(np.array([[0.0, 1.0]]))
        with pytest.raises(CoverageError):
            pathwise_l1([], [], [0.0])
