import math
import tempfile
import typing as tp
from pathlib import Path as p

import numpy as np
import pytest

from burgulence.config import ExperimentConfig, from_mapping
from burgulence.ensemble import RunStore
from burgulence.errors import ConfigurationError
from burgulence.experiments import (EXPERIMENTS, e1, log_shifts, random_low_modes, run_inviscid_experiment,
                                    run_mixing_experiment, run_scaling_experiment, run_spectrum_experiment,
                                    run_structure_experiment, viscous_inviscid_gaps)
from burgulence.fields import sobolev_norm_sq, to_grid

TINY = {
    'nu_list': [0.2, 0.1, 0.02],
    'seed': 3,
    'bracket': {'T': 1.0, 'sigma': 1.0, 'ensemble_size': 2},
    'schedule': {'dt_max': 0.01, 'observable_stride': 10, 'checkpoint_every': 50},
    'structure': {'n_l': 8},
    'mixing': {'nu_list': [0.1], 't_end': 2.0, 't_step': 0.5, 'ensemble_size': 2, 'contraction_pairs': 3},
    'inviscid': {'N': 128, 'compare_N': 64, 'compare_nu': [0.1, 0.05, 0.02], 'compare_t_end': 0.2},
}


def tiny(**changes: tp.Any) -> ExperimentConfig:
    return from_mapping(ExperimentConfig, {**TINY, **changes}).validate()


def law_ids(section: tp.Any) -> tp.Set[str]:
    return {r.law_id for r in section.laws}


class TestHelpers:

    def test_log_shifts(self) -> None:
        shifts = log_shifts(64, 8)
        assert shifts[0] == 1 and shifts[-1] == 32
        assert list(shifts) == sorted(set(shifts))

    def test_e1(self) -> None:
        g = to_grid(e1(1.0), 16)
        assert np.isclose(g.values[0], math.sqrt(2.0))
        assert np.isclose(np.mean(g.values ** 2), 1.0)

    def test_registry(self) -> None:
        assert set(EXPERIMENTS) == {'scaling', 'spectrum', 'structure', 'mixing', 'inviscid'}


class TestSweepChecks:

    @pytest.mark.parametrize('run', [run_scaling_experiment, run_spectrum_experiment, run_structure_experiment])
    def test_needs_a_decade(self, run: tp.Callable[..., tp.Any]) -> None:
        with pytest.raises(ConfigurationError):
            run(tiny(nu_list=[0.2, 0.1, 0.05]))
        with pytest.raises(ConfigurationError):
            run(tiny(nu_list=[0.2, 0.02]))

    def test_rejects_inviscid_model(self) -> None:
        with pytest.raises(ConfigurationError):
            run_scaling_experiment(tiny(model="inviscid"))


class TestScaling:

    def test_laws(self) -> None:
        section = run_scaling_experiment(tiny())
        ids = law_ids(section)
        assert {"energy_balance:nu=0.2", "energy_balance:nu=0.1", "energy_balance:nu=0.02"} <= ids
        assert {f"up_down:m={m}" for m in (-1, 0, 1, 2, 3)} <= ids
        assert {"oleinik_moment:p=1", "oleinik_moment:p=2"} <= ids
        asserted = {r.law_id for r in section.laws if r.asserted}
        assert "up_down:m=1" in asserted and "up_down:m=3" not in asserted
        assert section.summary['B0'] > 0
        assert "tau_int:nu=0.02" in section.summary
        assert all(section.summary[f"sample_stride:nu={nu}"] >= 1 for nu in ("0.2", "0.1", "0.02"))
        assert len(section.tables["sobolev"]["rows"]) == 15
        # the Sobolev-1 bracket grows as nu decreases
        m1 = [row[2] for row in section.tables["sobolev"]["rows"] if row[1] == 1]
        assert m1[0] < m1[2]

    def test_without_decorrelation(self) -> None:
        section = run_scaling_experiment(tiny(bracket={'T': 1.0, 'sigma': 1.0, 'ensemble_size': 2, 'decorrelate': False}))
        assert not any(key.startswith("sample_stride") for key in section.summary)

    def test_linearized(self) -> None:
        section = run_scaling_experiment(tiny(model="linearized"))
        assert "up_down_linearized:m=1" in law_ids(section)
        assert "up_down:m=2" not in law_ids(section)

    def test_sensitivity(self) -> None:
        section = run_scaling_experiment(tiny(bracket={'T': 1.0, 'sigma': 1.0, 'ensemble_size': 2, 'sensitivity': True}))
        assert {"sensitivity:sigma", "sensitivity:T"} <= law_ids(section)

    def test_store_reuse(self) -> None:
        with tempfile.TemporaryDirectory() as tmpdirname:
            store = RunStore(p(tmpdirname))
            first = run_scaling_experiment(tiny(), store)
            again = run_scaling_experiment(tiny(), store)
            assert (store.root / "scaling" / "checkpoints").is_dir()
        assert first.tables["sobolev"] == again.tables["sobolev"]


class TestSpectrum:

    def test_laws(self) -> None:
        section = run_spectrum_experiment(tiny())
        ids = law_ids(section)
        assert {"power:nu=0.2", "power:nu=0.1", "power:nu=0.02", "dissipation_scale"} <= ids
        assert "beyond_dissipation:nu=0.02" in ids
        power = {r.law_id: r for r in section.laws}
        assert power["power:nu=0.02"].asserted and not power["power:nu=0.2"].asserted
        # a window [4, 1.25] holds no modes
        assert math.isnan(power["power:nu=0.2"].measured)
        assert not power["power:nu=0.2"].passed and not power["power:nu=0.2"].failed
        assert not power["beyond_dissipation:nu=0.02"].asserted
        assert "nu=0.02/spectrum" in section.tables


class TestStructure:

    def test_laws(self) -> None:
        section = run_structure_experiment(tiny())
        ids = law_ids(section)
        for p_ in ("0.5", "1", "2", "3", "4"):
            assert f"inertial_scale:p={p_}:nu=0.02" in ids
            assert f"diss_scale:p={p_}:nu=0.2" in ids
        assert "diss_prefactor:p=0.5" in ids
        assert "nu=0.02/flatness" in section.tables
        records = {r.law_id: r for r in section.laws}
        assert records["diss_scale:p=2:nu=0.2"].asserted
        assert not records["diss_scale:p=2:nu=0.02"].asserted


class TestMixing:

    def test_laws(self) -> None:
        section = run_mixing_experiment(tiny())
        records = {r.law_id: r for r in section.laws}
        assert {"contraction:nu=0.1", "coupled_decay:nu=0.1", "low_modes:nu=0.1", "mixing_uniformity"} <= set(records)
        assert records["contraction:nu=0.1"].passed
        assert not records["mixing_uniformity"].asserted
        rows = section.tables["nu=0.1/mixing"]["rows"]
        assert [r[0] for r in rows] == pytest.approx([0.0, 0.5, 1.0, 1.5, 2.0])
        coupled = [r[1] for r in rows]
        assert coupled[0] > 0 and all(b <= a * 1.01 for a, b in zip(coupled, coupled[1:]))
        assert "5 pairs" in records["contraction:nu=0.1"].note
        assert records["contraction:nu=0.1"].measured <= 0.01

    def test_contraction_without_random_pairs(self) -> None:
        section = run_mixing_experiment(tiny(mixing={**TINY["mixing"], "contraction_pairs": 0}))
        records = {r.law_id: r for r in section.laws}
        assert "2 pairs" in records["contraction:nu=0.1"].note
        assert records["contraction:nu=0.1"].passed

    def test_random_pairs_are_distinct(self) -> None:
        a, b = random_low_modes(1.0, 3, 0, 0), random_low_modes(1.0, 3, 0, 1)
        assert np.isclose(sobolev_norm_sq(a, 0), 1.0) and np.isclose(sobolev_norm_sq(b, 0), 1.0)
        assert not np.allclose(a.coeffs, b.coeffs)
        assert np.array_equal(a.coeffs, random_low_modes(1.0, 3, 0, 0).coeffs)
        assert not np.allclose(a.coeffs, random_low_modes(1.0, 3, 1, 0).coeffs)


class TestInviscid:

    def test_gaps(self) -> None:
        gaps = viscous_inviscid_gaps(tiny())
        assert [nu for nu, _ in gaps] == [0.1, 0.05, 0.02]
        assert all(g > 0 for _, g in gaps)
        values = [g for _, g in gaps]
        assert all(b < a for a, b in zip(values, values[1:]))

    def test_laws(self) -> None:
        section = run_inviscid_experiment(tiny())
        ids = law_ids(section)
        assert {"power", "structure:p=1", "structure:p=2", "viscous_convergence"} <= ids
        assert section.summary['N'] == 128
        assert len(section.tables["convergence"]["rows"]) == 3
        records = {r.law_id: r for r in section.laws}
        assert records["viscous_convergence"].measured == 0.0
        assert records["viscous_convergence"].passed
