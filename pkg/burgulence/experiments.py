"""
The experiments behind the acceptance report. Each run_* function runs its
ensembles (through the run store when one is given), reduces them with the
stats module and returns a ReportSection of law records, tables and summary
values.
"""
import dataclasses
import logging
import math
import typing as tp

import numpy as np
from rich.logging import RichHandler

from burgulence.checkpoint import Scheme
from burgulence.config import ExperimentConfig, cnf
from burgulence.console import console
from burgulence.data import TrajectoryStream
from burgulence.ensemble import MemberJob, RunStore, run_ensemble
from burgulence.errors import ConfigurationError, DomainError, FitError, UnderResolutionError
from burgulence.fields import SpectralField, cell_averages, sobolev_norm_sq
from burgulence.forcing import b_constant
from burgulence.integrator import SolverState, StepSchedule, dealiased_modes, simulate
from burgulence.inviscid import CellField, simulate_inviscid
from burgulence.report import LawRecord, ReportSection
from burgulence.stats import (BracketSpec, PowerLawFit, bracket_average, contraction_violation, decorrelation_stride,
                              dissipation_scale, energy_balance_ratio, fit_power_law, integrated_autocorrelation_time,
                              mixing_distance, oleinik_moments, pathwise_l1, spectrum_report, structure_table)
from burgulence.utils import mytimer

FORMAT = "%(message)s"
logging.basicConfig(level=cnf['LOGLEVEL'], format=FORMAT, datefmt="[%X]", handlers=[
                    RichHandler(show_level=True, show_path=True, markup=True, console=console)])
log = logging.getLogger(__name__)


def bracket_spec(cfg: ExperimentConfig, T: tp.Optional[float] = None, sigma: tp.Optional[float] = None) -> BracketSpec:
    b = cfg.bracket
    return BracketSpec(T=b.T if T is None else T, sigma=b.sigma if sigma is None else sigma,
                       ensemble_size=b.ensemble_size, sigma_min=b.sigma_min)


def decorrelated(cfg: ExperimentConfig, spec: BracketSpec, streams: tp.Sequence[TrajectoryStream],
                 observable: tp.Any, section: ReportSection, key: str) -> BracketSpec:
    """the bracket with its time samples thinned to one per decorrelation time"""
    if not cfg.bracket.decorrelate:
        return spec
    stride = decorrelation_stride(streams, observable, spec)
    section.summary[f"sample_stride:{key}"] = stride
    if stride > 1:
        log.debug(f"{section.name} {key}: bracket samples thinned to every {stride}th")
    return dataclasses.replace(spec, sample_stride=stride)


def schedule(cfg: ExperimentConfig, t_end: float, stride: tp.Optional[int] = None,
             cfl: tp.Optional[float] = None) -> StepSchedule:
    s = cfg.schedule
    return StepSchedule(dt_max=s.dt_max, cfl=s.cfl if cfl is None else cfl, t_end=t_end,
                        observable_stride=s.observable_stride if stride is None else stride,
                        min_substeps=s.min_substeps)


def log_shifts(N: int, n_l: int) -> tuple[int, ...]:
    """integer shifts on a log grid from 1 to N/2"""
    return tuple(int(s) for s in np.unique(np.round(np.logspace(0.0, math.log10(N // 2), n_l)).astype(int)))


def e1(amplitude: float) -> SpectralField:
    """amplitude * sqrt2 cos(2 pi x)"""
    return SpectralField.from_modes({1: amplitude / math.sqrt(2.0)})


def random_low_modes(amplitude: float, seed: int, pair: int, side: int, modes: int = 3) -> SpectralField:
    """modes 1..modes with gaussian coefficients, scaled to |u|_L2 = amplitude"""
    rng = np.random.default_rng((seed, pair, side))
    s = SpectralField(rng.normal(size=modes) + 1j * rng.normal(size=modes))
    return s.scaled(amplitude / math.sqrt(sobolev_norm_sq(s, 0)))


def ensemble(cfg: ExperimentConfig, experiment: str, variant: str, nu: float, probes: tp.Sequence[str], t_end: float,
             store: tp.Optional[RunStore], *, scheme: Scheme = Scheme.SPECTRAL, u0: tp.Any = None,
             u0_of: tp.Optional[tp.Callable[[int], tp.Any]] = None,
             members: tp.Optional[range] = None, N: tp.Optional[int] = None, stride: tp.Optional[int] = None,
             shifts: tuple[int, ...] = (), cfl: tp.Optional[float] = None) -> tp.List[TrajectoryStream]:
    N = N or cfg.grid_size(nu)
    if members is None:
        members = range(cfg.bracket.ensemble_size)
    if u0 is None:
        u0 = CellField(np.zeros(N)) if scheme == Scheme.GODUNOV else SpectralField.zeros(1)
    sched = schedule(cfg, t_end, stride, cfl)
    run = f"{experiment}/{variant}/nu={nu:g}/N={N}/t={t_end:g}/dt={sched.dt_max:g}/stride={sched.observable_stride}"
    jobs = [MemberJob(run=run, scheme=scheme, spec=cfg.forcing.spec(cfg.seed, m), sched=sched,
                      u0=u0_of(m) if u0_of else u0, N=N, nu=nu,
                      probes=tuple(probes), p_list=tuple(cfg.structure.p_list), shifts=shifts,
                      checkpoint_every=cfg.schedule.checkpoint_every if store else 0,
                      checkpoint_dir=store.checkpoints(experiment) if store else None,
                      dbname=store.dbname if store else None)
            for m in members]
    log.debug(f"{run}: {len(jobs)} members")
    return run_ensemble(jobs, label=f"{experiment} {variant} nu={nu:g}")


def fit_law(section: ReportSection, law_id: str, points: tp.Sequence[tuple[float, float, float]],
            window: tuple[float, float], target: float, tolerance: float, timer: mytimer, *,
            asserted: bool = True, min_points: int = 4, transform: tp.Callable[[float], float] = lambda b: b) -> tp.Optional[PowerLawFit]:
    """fit, record the law, and keep going when the window holds too few points"""
    try:
        fit = fit_power_law(points, window, min_points=min_points)
    except (FitError, DomainError) as e:
        section.law(LawRecord.check(law_id, math.nan, math.nan, target, tolerance, window, timer.seconds,
                                    asserted, note=str(e)))
        return None
    section.law(LawRecord.check(law_id, transform(fit.exponent), fit.stderr, target, tolerance, window,
                                timer.seconds, asserted, note=f"{fit.n_points} points"))
    return fit


def _check_sweep(cfg: ExperimentConfig) -> None:
    if cfg.model == "inviscid":
        raise ConfigurationError("model 'inviscid' has no viscosity sweep, use the inviscid experiment")
    nus = cfg.nu_list
    if len(nus) < 3 or max(nus) / min(nus) < 10.0 * (1 - 1e-9):
        raise ConfigurationError(f"a nu-sweep needs >= 3 values spanning a decade, got {list(nus)}")


def run_scaling_experiment(cfg: ExperimentConfig, store: tp.Optional[RunStore] = None) -> ReportSection:
    """<<||u||_m^2>> ~ nu^-(2m-1), the energy balance and the Oleinik moments"""
    _check_sweep(cfg)
    timer = mytimer()
    tol = cfg.tolerance
    section = ReportSection("scaling")
    linear = cfg.model == "linearized"
    spec = bracket_spec(cfg)
    t_end = spec.t_end
    if cfg.bracket.sensitivity:
        t_end = max(spec.T + 2 * spec.sigma, 2 * spec.T + spec.sigma)
    ms = (-1, 0, 1, 2, 3)
    probes = tuple(f"sobolev:{m}" for m in ms) + ("oleinik",)
    B0 = b_constant(cfg.forcing.spec(cfg.seed), 0)

    per_m: tp.Dict[int, tp.List[tuple[float, float, float]]] = {m: [] for m in ms}
    per_p: tp.Dict[int, tp.List[tuple[float, float, float]]] = {1: [], 2: []}
    sens_sigma: tp.List[float] = []
    sens_T: tp.List[tuple[float, float, float]] = []
    rows, balance_rows = [], []
    for nu in cfg.nu_list:
        streams = ensemble(cfg, "scaling", cfg.model, nu, probes, t_end, store,
                           scheme=Scheme.LINEARIZED if linear else Scheme.SPECTRAL)
        bs = decorrelated(cfg, spec, streams, "sobolev:0", section, f"nu={nu:g}")
        for m in ms:
            mean, err = bracket_average(streams, f"sobolev:{m}", bs)
            per_m[m].append((nu, mean, err))
            rows.append((nu, m, mean, err))
        _, mean1, _ = per_m[1][-1]
        ratio, ratio_err = energy_balance_ratio(streams, nu, B0, bs)
        balance_rows.append((nu, ratio, ratio_err))
        section.law(LawRecord.check(f"energy_balance:nu={nu:g}", ratio, ratio_err, 1.0, tol.energy_balance,
                                    (spec.T, spec.t_end), timer.seconds, note="nu <<||u||_1^2>> / (B_0/2)"))
        for p in per_p:
            mean, err = oleinik_moments(streams, p, bs)
            per_p[p].append((nu, mean, err))
        dt_sample = cfg.schedule.dt_max * cfg.schedule.observable_stride
        section.summary[f"tau_int:nu={nu:g}"] = integrated_autocorrelation_time(streams[0].series("sobolev:0"), dt_sample)
        if cfg.bracket.sensitivity:
            doubled, _ = bracket_average(streams, "sobolev:1", dataclasses.replace(bs, sigma=2 * spec.sigma))
            sens_sigma.append(abs(doubled - mean1) / mean1)
            mean_T, err_T = bracket_average(streams, "sobolev:1", dataclasses.replace(bs, T=2 * spec.T))
            sens_T.append((nu, mean_T, err_T))

    window = (min(cfg.nu_list), max(cfg.nu_list))
    if linear:
        fit_law(section, "up_down_linearized:m=1", per_m[1], window, -1.0, tol.sobolev_m1, timer, min_points=3)
    else:
        targets = {1: (-1.0, tol.sobolev_m1, True), 2: (-3.0, tol.sobolev_m2, True), 3: (-5.0, 1.0, False),
                   0: (0.0, tol.sobolev_m1, False), -1: (0.0, tol.sobolev_m1, False)}
        fits = {m: fit_law(section, f"up_down:m={m}", per_m[m], window, target, t, timer, asserted=asserted, min_points=3)
                for m, (target, t, asserted) in targets.items()}
        for p, points in per_p.items():
            fit_law(section, f"oleinik_moment:p={p}", points, window, 0.0, tol.sobolev_m1, timer, asserted=False,
                    min_points=3)
        if cfg.bracket.sensitivity:
            section.law(LawRecord.check("sensitivity:sigma", max(sens_sigma), 0.0, tol.sensitivity, 0.0, None,
                                        timer.seconds, bound="upper", note="relative drift of <<||u||_1^2>>"))
            try:
                fit_T: tp.Optional[PowerLawFit] = fit_power_law(sens_T, window, min_points=3)
            except (FitError, DomainError):
                fit_T = None
            base = fits[1]
            drift = abs(fit_T.exponent - base.exponent) if base is not None and fit_T is not None else math.nan
            section.law(LawRecord.check("sensitivity:T", drift, fit_T.stderr if fit_T else math.nan,
                                        0.5 * tol.sobolev_m1, 0.0, window,
                                        timer.seconds, bound="upper", note="m=1 exponent change with T doubled"))

    section.table("sobolev", ("nu", "m", "mean", "stderr"), rows)
    section.table("energy_balance", ("nu", "ratio", "stderr"), balance_rows)
    section.table("oleinik", ("nu", "p", "mean", "stderr"),
                  [(nu, p, mean, err) for p, pts in per_p.items() for nu, mean, err in pts])
    section.summary.update({'B0': B0, 'runtime': timer.seconds, 'config': cfg.echo()})
    return section


def run_spectrum_experiment(cfg: ExperimentConfig, store: tp.Optional[RunStore] = None) -> ReportSection:
    """E_k ~ k^-2 in the inertial range, l_d ~ nu^-1 from spectrum breakpoints"""
    _check_sweep(cfg)
    timer = mytimer()
    tol = cfg.tolerance
    sc = cfg.spectrum
    section = ReportSection("spectrum")
    spec = bracket_spec(cfg)
    nu_min = min(cfg.nu_list)
    breakpoints: tp.List[tuple[float, float, float]] = []
    for nu in cfg.nu_list:
        N = cfg.grid_size(nu)
        ks = list(range(1, int(dealiased_modes(N) / sc.M) + 1))
        streams = ensemble(cfg, "spectrum", cfg.model, nu, ("spectrum",), spec.t_end, store)
        rep = spectrum_report(streams, ks, sc.M, decorrelated(cfg, spec, streams, "spectrum", section, f"nu={nu:g}"))
        window = (float(sc.k_lo), sc.inertial_c / nu)
        points = list(zip(rep.k.tolist(), rep.E.tolist(), rep.stderr.tolist()))
        fit = fit_law(section, f"power:nu={nu:g}", points, window, -2.0, tol.spectrum_slope, timer,
                      asserted=nu == nu_min)
        try:
            k_star = dissipation_scale(rep, sc.decay_threshold, sc.band)
            breakpoints.append((nu, k_star, 0.0))
            section.summary[f"k_star:nu={nu:g}"] = k_star
        except UnderResolutionError as e:
            section.summary[f"k_star:nu={nu:g}"] = str(e)
        if fit is not None:
            k_beyond = min(sc.beyond_factor / nu, float(rep.k[-1]))
            i = int(np.searchsorted(rep.k, k_beyond, side='right')) - 1
            k_hi = min(window[1], float(rep.k[-1]))
            j = int(np.searchsorted(rep.k, k_hi, side='right')) - 1
            extrapolated = rep.E[j] * (rep.k[i] / rep.k[j]) ** -2.0
            decay = math.log10(extrapolated / rep.E[i]) if rep.E[i] > 0 else math.inf
            section.law(LawRecord.check(f"beyond_dissipation:nu={nu:g}", decay, 0.0, math.log10(sc.beyond_decay), 0.0,
                                        (k_hi, float(rep.k[i])), timer.seconds, asserted=False, bound="lower",
                                        note=f"log10 decay below k^-2 at k={rep.k[i]}"))
        section.table(f"nu={nu:g}/spectrum", ("k", "E", "stderr"), points)

    if len(breakpoints) >= 3:
        fit_law(section, "dissipation_scale", breakpoints, (nu_min, max(cfg.nu_list)), 1.0, tol.c_d, timer,
                min_points=3, transform=lambda b: -b)
    else:
        section.law(LawRecord.check("dissipation_scale", math.nan, math.nan, 1.0, tol.c_d, None, timer.seconds,
                                    note=f"breakpoints found for {len(breakpoints)} of {len(cfg.nu_list)} viscosities"))
    section.table("breakpoints", ("nu", "k_star"), [(nu, k) for nu, k, _ in breakpoints])
    section.summary.update({'M': sc.M, 'runtime': timer.seconds, 'config': cfg.echo()})
    return section


def run_structure_experiment(cfg: ExperimentConfig, store: tp.Optional[RunStore] = None) -> ReportSection:
    """S_{p,l} ~ |l|^min(p,1) in the inertial range and ~ |l|^p nu^(1-min(p,1)) below nu"""
    _check_sweep(cfg)
    timer = mytimer()
    tol = cfg.tolerance
    st = cfg.structure
    section = ReportSection("structure")
    spec = bracket_spec(cfg)
    nu_min, nu_max = min(cfg.nu_list), max(cfg.nu_list)
    prefactor: tp.List[tuple[float, float, float]] = []
    for nu in cfg.nu_list:
        N = cfg.grid_size(nu)
        shifts = log_shifts(N, st.n_l)
        streams = ensemble(cfg, "structure", cfg.model, nu, ("increments",), spec.t_end, store, shifts=shifts)
        rep = structure_table(streams, st.p_list, shifts, N,
                              decorrelated(cfg, spec, streams, "increments", section, f"nu={nu:g}"))
        for i, p in enumerate(rep.p):
            points = list(zip(rep.l.tolist(), rep.S[i].tolist(), rep.stderr[i].tolist()))
            low = p <= 1.0
            fit_law(section, f"inertial_scale:p={p:g}:nu={nu:g}", points, (st.inertial_c * nu, st.c1), min(p, 1.0),
                    tol.structure_low if low else tol.structure_high, timer,
                    asserted=nu == nu_min and p in (0.5, 1.0, 2.0, 3.0))
            fit_law(section, f"diss_scale:p={p:g}:nu={nu:g}", points, (1.0 / N, st.dissipation_c * nu), p,
                    tol.dissipation_range, timer, asserted=nu == nu_max and p in (0.5, 2.0))
            if p == st.prefactor_p:
                prefactor.append((nu, rep.S[i][0] / rep.l[0] ** p, rep.stderr[i][0] / rep.l[0] ** p))
        section.table(f"nu={nu:g}/structure", ("l", "p", "S", "stderr"),
                      [(l, p, rep.S[i][j], rep.stderr[i][j]) for i, p in enumerate(rep.p) for j, l in enumerate(rep.l)])
        if 2.0 in rep.p and 4.0 in rep.p:
            section.table(f"nu={nu:g}/flatness", ("l", "flatness"), zip(rep.l.tolist(), rep.flatness().tolist()))
    if prefactor:
        fit_law(section, f"diss_prefactor:p={st.prefactor_p:g}", prefactor, (nu_min, nu_max),
                1.0 - min(st.prefactor_p, 1.0), tol.dissipation_range, timer, asserted=False, min_points=3)
    section.summary.update({'runtime': timer.seconds, 'config': cfg.echo()})
    return section


def _low_modes(n: int) -> tp.Callable[[TrajectoryStream], np.ndarray]:
    return lambda s: s.series("spectrum")[:, :n]


def run_mixing_experiment(cfg: ExperimentConfig, store: tp.Optional[RunStore] = None) -> ReportSection:
    """coupled-noise L1 contraction and convergence of independent ensembles from distinct data"""
    timer = mytimer()
    mc = cfg.mixing
    section = ReportSection("mixing")
    stride = max(1, int(round(mc.t_step / cfg.schedule.dt_max)))
    probes = ("grid", "sobolev:0", "lp:1", "spectrum")
    functionals = {"L1": "lp:1", "L2sq": "sobolev:0", "low_modes": _low_modes(mc.low_modes)}
    fractions: tp.Dict[float, float] = {}
    n = mc.ensemble_size
    for nu in mc.nu_list:
        N = cfg.grid_size(nu)
        if N > cfg.resolution.n_max:
            raise ConfigurationError(f"mixing nu={nu} needs N={N} > n_max={cfg.resolution.n_max}")
        kw: tp.Dict[str, tp.Any] = dict(stride=stride)
        ens_a = ensemble(cfg, "mixing", "zero", nu, probes, mc.t_end, store, members=range(n), **kw)
        ens_b = ensemble(cfg, "mixing", "e1", nu, probes, mc.t_end, store, u0=e1(mc.amplitude), members=range(n), **kw)
        ens_c = ensemble(cfg, "mixing", "e1", nu, probes, mc.t_end, store, u0=e1(mc.amplitude),
                         members=range(n, 2 * n), **kw)
        t_grid = ens_a[0].t()
        paths = pathwise_l1(ens_a, ens_b, t_grid)
        l1 = paths.mean(axis=0)
        if mc.contraction_pairs:
            pairs = range(mc.contraction_pairs)
            ens_pa = ensemble(cfg, "mixing", "pair_a", nu, ("grid",), mc.t_end, store, members=pairs,
                              u0_of=lambda m: random_low_modes(mc.amplitude, cfg.seed, m, 0), **kw)
            ens_pb = ensemble(cfg, "mixing", "pair_b", nu, ("grid",), mc.t_end, store, members=pairs,
                              u0_of=lambda m: random_low_modes(mc.amplitude, cfg.seed, m, 1), **kw)
            paths = np.vstack([paths, pathwise_l1(ens_pa, ens_pb, t_grid)])
        section.law(LawRecord.check(f"contraction:nu={nu:g}", contraction_violation(paths), 0.0, 0.0,
                                    mc.contraction_slack, (t_grid[0], t_grid[-1]), timer.seconds, bound="upper",
                                    note=f"largest rise of |u_A-u_B|_L1 over its running minimum / initial, {len(paths)} pairs"))
        section.law(LawRecord.check(f"coupled_decay:nu={nu:g}", float(l1[-1] / l1[0]), 0.0, mc.decay_fraction, 0.0,
                                    (t_grid[0], t_grid[-1]), timer.seconds, bound="upper"))
        indep = mixing_distance(ens_a, ens_c, functionals, t_grid)
        d, e = indep.distance["low_modes"][-1], indep.stderr["low_modes"][-1]
        z = np.where(e > 0, d / np.where(e > 0, e, 1.0), np.where(d > 0, np.inf, 0.0))
        section.law(LawRecord.check(f"low_modes:nu={nu:g}", float(np.max(z)), 0.0, 2.0, 0.0, (t_grid[-1], t_grid[-1]),
                                    timer.seconds, bound="upper", note="distance / joint stderr at t_end"))
        i1 = int(np.argmin(np.abs(t_grid - 1.0)))
        l2 = indep.distance["L2sq"]
        fractions[nu] = float(l2[-1] / l2[i1]) if l2[i1] > 0 else math.nan
        section.table(f"nu={nu:g}/mixing", ("t", "coupled_l1", "L1", "L1_stderr", "L2sq", "L2sq_stderr"),
                      zip(t_grid.tolist(), l1.tolist(), indep.distance["L1"].tolist(), indep.stderr["L1"].tolist(),
                          l2.tolist(), indep.stderr["L2sq"].tolist()))
    finite = [f for f in fractions.values() if math.isfinite(f) and f > 0]
    spread = max(finite) / min(finite) if len(finite) >= 2 else math.nan
    section.law(LawRecord.check("mixing_uniformity", spread, 0.0, mc.uniformity_factor, 0.0, None, timer.seconds,
                                asserted=False, bound="upper", note="spread of L2 decay fractions across nu"))
    section.summary.update({'decay_fractions': {f"{k:g}": v for k, v in fractions.items()},
                            'runtime': timer.seconds, 'config': cfg.echo()})
    return section


def _final(states: tp.List[tp.Any]) -> tp.Callable[[tp.Any, int, TrajectoryStream], None]:
    return lambda state, n, stream: states.append(state)


def _block_average(values: np.ndarray, n: int) -> np.ndarray:
    return values.reshape(n, -1).mean(axis=1)


def viscous_inviscid_gaps(cfg: ExperimentConfig) -> tp.List[tuple[float, float]]:
    """L1 distance at compare_t_end between the viscous runs and the Godunov run on one kick path"""
    ic = cfg.inviscid
    spec = cfg.forcing.spec(cfg.seed, 0)
    sched = schedule(cfg, ic.compare_t_end, stride=max(1, int(round(ic.compare_t_end / cfg.schedule.dt_max))), cfl=ic.cfl)
    checkpoint_every = sched.n_steps
    cells: tp.List[CellField] = []
    simulate_inviscid(CellField(np.zeros(ic.compare_N)), spec, sched, [], on_checkpoint=_final(cells),
                      checkpoint_every=checkpoint_every)
    reference = cells[-1].averages
    gaps = []
    for nu in sorted(ic.compare_nu, reverse=True):
        N = max(cfg.grid_size(nu), ic.compare_N)
        states: tp.List[SolverState] = []
        simulate(SpectralField.zeros(1), nu, spec, schedule(cfg, ic.compare_t_end, stride=sched.observable_stride), [],
                 N=N, on_checkpoint=_final(states), checkpoint_every=checkpoint_every)
        viscous = _block_average(cell_averages(states[-1].u, N).values, ic.compare_N)
        gaps.append((nu, float(np.mean(np.abs(viscous - reference)))))
    return gaps


def run_inviscid_experiment(cfg: ExperimentConfig, store: tp.Optional[RunStore] = None) -> ReportSection:
    """entropy solutions: E_k ~ k^-2 up to the grid, S_{p,l} ~ |l|^min(p,1), vanishing-viscosity convergence"""
    timer = mytimer()
    tol = cfg.tolerance
    ic = cfg.inviscid
    section = ReportSection("inviscid")
    spec = bracket_spec(cfg)
    N = ic.N
    shifts = log_shifts(N, cfg.structure.n_l)
    streams = ensemble(cfg, "inviscid", "godunov", 0.0, ("spectrum", "increments"), spec.t_end, store,
                       scheme=Scheme.GODUNOV, N=N, shifts=shifts, cfl=ic.cfl)
    ks = list(range(1, int((N // 2 - 1) / cfg.spectrum.M) + 1))
    bs = decorrelated(cfg, spec, streams, "spectrum", section, "godunov")
    rep = spectrum_report(streams, ks, cfg.spectrum.M, bs)
    points = list(zip(rep.k.tolist(), rep.E.tolist(), rep.stderr.tolist()))
    fit_law(section, "power", points, (float(ic.k_lo), N * ic.k_hi_fraction), -2.0, tol.inviscid_slope, timer)
    section.table("spectrum", ("k", "E", "stderr"), points)

    srep = structure_table(streams, cfg.structure.p_list, shifts, N, bs)
    window = (4.0 / N, ic.c1)
    for i, p in enumerate(srep.p):
        spoints = list(zip(srep.l.tolist(), srep.S[i].tolist(), srep.stderr[i].tolist()))
        tolerance = {1.0: tol.inviscid_s1, 2.0: tol.inviscid_s2}.get(p, tol.structure_high)
        fit_law(section, f"structure:p={p:g}", spoints, window, min(p, 1.0), tolerance, timer,
                asserted=p in (1.0, 2.0))
    section.table("structure", ("l", "p", "S", "stderr"),
                  [(l, p, srep.S[i][j], srep.stderr[i][j]) for i, p in enumerate(srep.p) for j, l in enumerate(srep.l)])

    gaps = viscous_inviscid_gaps(cfg)
    rises = sum(1 for (_, a), (_, b) in zip(gaps, gaps[1:]) if b >= a)
    section.law(LawRecord.check("viscous_convergence", float(rises), 0.0, 0.0, 0.0,
                                (min(ic.compare_nu), max(ic.compare_nu)), timer.seconds, bound="upper",
                                note="steps where the L1 gap does not shrink as nu decreases"))
    section.table("convergence", ("nu", "l1_gap"), gaps)
    section.summary.update({'N': N, 'runtime': timer.seconds, 'config': cfg.echo()})
    return section


EXPERIMENTS: tp.Dict[str, tp.Callable[[ExperimentConfig, tp.Optional[RunStore]], ReportSection]] = {
    'scaling': run_scaling_experiment,
    'spectrum': run_spectrum_experiment,
    'structure': run_structure_experiment,
    'mixing': run_mixing_experiment,
    'inviscid': run_inviscid_experiment,
}
