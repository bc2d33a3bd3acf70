"""Scenario presets, sweeps, and the CSV/metadata output contract.

A scenario is one physical configuration propagated once: build the mode
set and couplings, integrate, reduce to observables, write files.  The six
presets fig1..fig6 reproduce the standard emission / front-sharpening /
bounded-below-spectrum experiments at a configurable desk scale; scale 1 is
the full-size setup (band of ~10^4 modes around mode 5001), scale s shrinks
every mode count and the resonance index proportionally while keeping decay
rates, detuning, positions, and time windows fixed.  Causality structure
depends on geometry and time units only, so scaled runs stay faithful.

Output contract per run (all in the chosen output directory):

    <id>_<policy><count>_series.csv        t,p1,p2,p3,norm2,energy
    <id>_<policy><count>_profile_t<t>.csv  x,e2
    <id>_<policy><count>_metadata.txt      flat key=value, one per line
    <id>_tails.csv                         mode_count,t,tail_fraction,precausal_avg

Floats are written with repr(), i.e. shortest string that round-trips, and
rows end with a single newline.  Re-running an identical configuration in
the same environment reproduces the CSV bodies byte for byte (fixed
summation order, fixed BLAS thread count); the metadata file carries a
timestamp and is excluded from that guarantee.  A run interrupted by
Ctrl-C flushes the rows recorded so far and appends a `# truncated`
trailer line.
"""

from __future__ import annotations

import dataclasses
import math
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import (
    IntegrationError,
    IntegrationInterrupted,
    IntegratorConfig,
    initial_state,
    integrate,
)
from .model import AtomParams, ModeSet, asymmetric_mode_set, coupling_matrix, symmetric_mode_set
from .observables import (
    FieldProfile,
    TailReport,
    field_profile,
    precausal_average,
    tail_fraction,
)

DEFAULT_SCALE = 0.5

# Empirical norm-drift law for the order-4 predictor-corrector on these
# systems: |norm^2 - 1| ~= 0.325 * (h*w1)^5 * w1 * t_end, measured constant
# across step sizes and mode counts.  The step rule below budgets a fifth
# of the conservation tolerance against twice that constant, leaving an
# order of magnitude of headroom at the gate.
NORM_DRIFT_CONSTANT = 0.65

# Crude wall-clock model per integrator step (seconds); used only to refuse
# runs that would blow an explicit time budget, never to change results.
PER_STEP_BASE_SECONDS = 5e-6
PER_STEP_PER_MODE_SECONDS = 2.2e-8

_PRESET_IDS = ("fig1", "fig2", "fig3", "fig4", "fig5", "fig6")


class BudgetExceeded(RuntimeError):
    """A run was refused because its cost estimate exceeds the budget."""


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything needed to reproduce one run.

    mode_count is the total number of retained modes; symmetric bands must
    be odd (center mode plus equal halves).  center_index and omega1_index
    default to the band center when unset.  step_size is normally derived
    from conservation_tolerance via the empirical drift law; setting it
    overrides the rule (the resolution cap still applies).
    """

    scenario_id: str = "custom"
    mode_policy: str = "symmetric"
    mode_count: int = 5001
    lowest_index: int = 1
    center_index: int | None = None
    omega1_index: int | None = None
    gamma1: float = 1.0
    gamma2: float = 16.0
    gamma3: float = 256.0
    delta: float = 4.0
    position1: float = 0.25
    position2: float = 0.5
    position3: float = 0.75
    t_end: float = 0.25
    time_granularity: float = 0.05
    snapshot_times: tuple = (0.25,)
    grid_points: int = 2001
    sample_target: int = 2000
    causality_time: float = 0.5
    step_size: float | None = None
    conservation_tolerance: float = 1e-8
    resolution_cap: float = 0.3
    corrector_iterations: int = 1

    def __post_init__(self):
        if self.mode_policy not in ("symmetric", "asymmetric"):
            raise ValueError(
                f"mode_policy must be 'symmetric' or 'asymmetric', "
                f"got {self.mode_policy!r}"
            )
        if self.mode_count < 1:
            raise ValueError(f"mode_count must be >= 1, got {self.mode_count}")
        if self.mode_policy == "symmetric" and self.mode_count % 2 == 0:
            raise ValueError(
                f"symmetric bands hold a center mode plus equal halves, so "
                f"mode_count must be odd, got {self.mode_count}"
            )
        if self.lowest_index < 1:
            raise ValueError(f"lowest_index must be >= 1, got {self.lowest_index}")
        for name in ("gamma1", "gamma2", "gamma3"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")
        for name in ("position1", "position2", "position3"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValueError(f"{name} must lie strictly inside (0, 1), got {v}")
        if not self.t_end > 0:
            raise ValueError(f"t_end must be positive, got {self.t_end}")
        if not self.time_granularity > 0:
            raise ValueError(
                f"time_granularity must be positive, got {self.time_granularity}"
            )
        if not _is_multiple(self.t_end, self.time_granularity):
            raise ValueError(
                f"t_end {self.t_end} is not a multiple of time_granularity "
                f"{self.time_granularity}"
            )
        for ts in self.snapshot_times:
            if ts < 0 or ts > self.t_end or not _is_multiple(ts, self.time_granularity):
                raise ValueError(
                    f"snapshot time {ts} must lie in [0, t_end] on the "
                    f"time_granularity grid"
                )
        if self.grid_points < 2:
            raise ValueError(f"grid_points must be >= 2, got {self.grid_points}")
        if self.sample_target < 2:
            raise ValueError(f"sample_target must be >= 2, got {self.sample_target}")
        if not self.causality_time > 0:
            raise ValueError(
                f"causality_time must be positive, got {self.causality_time}"
            )
        if self.step_size is not None and not self.step_size > 0:
            raise ValueError(f"step_size must be positive, got {self.step_size}")
        if not self.conservation_tolerance > 0:
            raise ValueError(
                f"conservation_tolerance must be positive, "
                f"got {self.conservation_tolerance}"
            )
        if not self.resolution_cap > 0:
            raise ValueError(
                f"resolution_cap must be positive, got {self.resolution_cap}"
            )
        if self.corrector_iterations < 1:
            raise ValueError(
                f"corrector_iterations must be >= 1, got {self.corrector_iterations}"
            )


def _is_multiple(value: float, unit: float) -> bool:
    k = round(value / unit)
    return abs(k * unit - value) <= 1e-9 * max(1.0, abs(value))


@dataclass
class ObservableSeries:
    """Reduced per-sample observables of one run, column per CSV field."""

    times: np.ndarray
    p1: np.ndarray
    p2: np.ndarray
    p3: np.ndarray
    norm2: np.ndarray
    energy: np.ndarray


@dataclass(frozen=True)
class TailRow:
    mode_count: int
    t: float
    tail_fraction: float
    precausal_avg: float


@dataclass
class ScenarioResult:
    config: ScenarioConfig
    series: ObservableSeries
    profiles: list
    tails: list
    precausal_avg: float | None
    max_norm_drift: float
    max_energy_drift: float
    step_size: float
    step_count: int
    runtime_seconds: float
    paths: dict


def preset(scenario_id: str, scale: float = DEFAULT_SCALE):
    """Resolve a preset id to (base config, mode counts to run).

    fig1/fig4: single symmetric band (emission profile / long-time p3).
    fig2/fig5: symmetric pair, half then full count (front sharpening).
    fig3/fig6: asymmetric 1x/2x/3x sweep with the resonance index pinned
    (only the upper cut-off grows).  fig1-3 stop at t=0.25, fig4-6 run to
    t=0.6 to cover the causality time 0.5 of the atom-1 to atom-3 hop.
    """
    if not 0.0 < scale <= 1.0:
        raise ValueError(f"scale must lie in (0, 1], got {scale}")
    if scenario_id not in _PRESET_IDS:
        raise ValueError(
            f"unknown scenario {scenario_id!r}; presets are "
            f"{', '.join(_PRESET_IDS)} (or build a custom config)"
        )
    half = round(5000 * scale)
    if half < 1:
        raise ValueError(f"scale {scale} leaves no modes below the resonance")
    sym_full = 2 * half + 1
    sym_half_band = 2 * round(2500 * scale) + 1
    asym_counts = (round(10000 * scale), round(20000 * scale), round(30000 * scale))
    t_end = 0.25 if scenario_id in ("fig1", "fig2", "fig3") else 0.6

    if scenario_id in ("fig1", "fig4"):
        counts = (sym_full,)
        policy = "symmetric"
    elif scenario_id in ("fig2", "fig5"):
        counts = (sym_half_band, sym_full)
        policy = "symmetric"
    else:
        counts = asym_counts
        policy = "asymmetric"

    base = ScenarioConfig(
        scenario_id=scenario_id,
        mode_policy=policy,
        mode_count=counts[-1],
        lowest_index=1,
        omega1_index=(half + 1) if policy == "asymmetric" else None,
        t_end=t_end,
        snapshot_times=(0.25,),
    )
    return base, counts


def resolve_indices(config: ScenarioConfig):
    """(center_index, omega1_index) after defaulting rules."""
    if config.mode_policy == "symmetric":
        half = (config.mode_count - 1) // 2
        center = config.center_index if config.center_index is not None else half + 1
        omega1_index = config.omega1_index if config.omega1_index is not None else center
        return center, omega1_index
    lowest = config.lowest_index
    if config.omega1_index is not None:
        return None, config.omega1_index
    return None, lowest + config.mode_count // 2


def build_system(config: ScenarioConfig):
    """Construct (atoms, modes, couplings, omega1) for a resolved config."""
    center, omega1_index = resolve_indices(config)
    if config.mode_policy == "symmetric":
        half = (config.mode_count - 1) // 2
        modes = symmetric_mode_set(center, half)
    else:
        modes = asymmetric_mode_set(config.lowest_index, config.mode_count)
    omega1 = omega1_index * math.pi
    if omega1 - config.delta <= 0:
        raise ValueError(
            f"atom 2 frequency omega1 - delta = {omega1 - config.delta:.6g} "
            f"must be positive"
        )
    positions = (config.position1, config.position2, config.position3)
    gammas = (config.gamma1, config.gamma2, config.gamma3)
    freqs = (omega1, omega1 - config.delta, omega1)
    atoms = tuple(
        AtomParams(
            index=j + 1,
            position_fraction=positions[j],
            transition_frequency=freqs[j],
            decay_rate=gammas[j],
        )
        for j in range(3)
    )
    return atoms, modes, coupling_matrix(atoms, modes), omega1


def plan_steps(config: ScenarioConfig, omega1: float, omega_max: float):
    """(step_size, n_steps, sample_stride) on the time_granularity grid.

    The step is the smaller of the resolution cap and the drift-law step,
    then snapped so a whole number of steps fits each granularity unit;
    snapshot instants therefore land exactly on step boundaries.
    """
    if config.step_size is not None:
        h_target = config.step_size
    else:
        budget = config.conservation_tolerance / 5.0
        theta = (budget / (NORM_DRIFT_CONSTANT * omega1 * config.t_end)) ** 0.2
        h_target = theta / omega1
    h_target = min(h_target, config.resolution_cap / omega_max)
    per_unit = max(1, math.ceil(config.time_granularity / h_target))
    h = config.time_granularity / per_unit
    units = round(config.t_end / config.time_granularity)
    n_steps = units * per_unit
    stride = max(1, n_steps // config.sample_target)
    return h, n_steps, stride


def estimate_runtime_seconds(mode_count: int, n_steps: int, corrector_iterations: int = 1):
    per_step = PER_STEP_BASE_SECONDS + PER_STEP_PER_MODE_SECONDS * mode_count
    per_step *= 0.5 + 0.5 * (1 + corrector_iterations)
    return n_steps * per_step


def _fmt(v) -> str:
    return repr(float(v))


def _prefix(config: ScenarioConfig) -> str:
    return f"{config.scenario_id}_{config.mode_policy}{config.mode_count}"


def write_series_csv(path: Path, series: ObservableSeries, truncated: bool = False):
    lines = ["t,p1,p2,p3,norm2,energy"]
    for i in range(series.times.size):
        lines.append(
            f"{_fmt(series.times[i])},{_fmt(series.p1[i])},{_fmt(series.p2[i])},"
            f"{_fmt(series.p3[i])},{_fmt(series.norm2[i])},{_fmt(series.energy[i])}"
        )
    if truncated:
        lines.append("# truncated")
    path.write_text("\n".join(lines) + "\n", encoding="ascii", newline="\n")


def write_profile_csv(path: Path, profile: FieldProfile):
    lines = ["x,e2"]
    for i in range(profile.grid.size):
        lines.append(f"{_fmt(profile.grid[i])},{_fmt(profile.values[i])}")
    path.write_text("\n".join(lines) + "\n", encoding="ascii", newline="\n")


def write_tails_csv(path: Path, rows):
    lines = ["mode_count,t,tail_fraction,precausal_avg"]
    for r in rows:
        lines.append(
            f"{r.mode_count},{_fmt(r.t)},{_fmt(r.tail_fraction)},{_fmt(r.precausal_avg)}"
        )
    path.write_text("\n".join(lines) + "\n", encoding="ascii", newline="\n")


def write_metadata(path: Path, meta: dict):
    lines = [f"{k}={v}" for k, v in meta.items()]
    path.write_text("\n".join(lines) + "\n", encoding="ascii", newline="\n")


def _metadata(config, omega1, h, n_steps, stride, extra):
    center, omega1_index = resolve_indices(config)
    meta = {
        "scenario": config.scenario_id,
        "mode_policy": config.mode_policy,
        "mode_count": config.mode_count,
        "lowest_index": config.lowest_index if config.mode_policy == "asymmetric" else "",
        "center_index": center if center is not None else "",
        "omega1_index": omega1_index,
        "omega1": _fmt(omega1),
        "gamma1": _fmt(config.gamma1),
        "gamma2": _fmt(config.gamma2),
        "gamma3": _fmt(config.gamma3),
        "delta": _fmt(config.delta),
        "position1": _fmt(config.position1),
        "position2": _fmt(config.position2),
        "position3": _fmt(config.position3),
        "t_end": _fmt(config.t_end),
        "time_granularity": _fmt(config.time_granularity),
        "snapshot_times": ",".join(_fmt(t) for t in config.snapshot_times),
        "grid_points": config.grid_points,
        "sample_target": config.sample_target,
        "causality_time": _fmt(config.causality_time),
        "integrator": "adams-bashforth-moulton-4",
        "corrector_mode": f"pece-{config.corrector_iterations}",
        "bootstrap": "rk4-single-step-x3",
        "step_size": _fmt(h),
        "step_count": n_steps,
        "sample_stride": stride,
        "resolution_cap": _fmt(config.resolution_cap),
        "conservation_tolerance": _fmt(config.conservation_tolerance),
        "code_version": __version__,
    }
    meta.update(extra)
    meta["created_utc"] = datetime.now(timezone.utc).isoformat()
    return meta


def run_scenario(
    config: ScenarioConfig,
    outdir: Path | str,
    budget_seconds: float | None = None,
    write_outputs: bool = True,
) -> ScenarioResult:
    """Build, integrate, observe, and write one scenario.

    Refuses up front (BudgetExceeded) if the cost estimate breaks
    budget_seconds.  After integration the conservation gate is enforced:
    a run whose norm or energy drift exceeds conservation_tolerance raises
    IntegrationError instead of returning (and writes nothing).  On
    Ctrl-C the partial series is flushed with a `# truncated` trailer and
    IntegrationInterrupted propagates.
    """
    outdir = Path(outdir)
    atoms, modes, couplings, omega1 = build_system(config)
    h, n_steps, stride = plan_steps(config, omega1, float(modes.frequencies[-1]))
    est = estimate_runtime_seconds(len(modes), n_steps, config.corrector_iterations)
    if budget_seconds is not None and est > budget_seconds:
        raise BudgetExceeded(
            f"estimated {est:.1f}s for {n_steps} steps x {len(modes)} modes "
            f"exceeds budget {budget_seconds:.1f}s"
        )
    if write_outputs:
        outdir.mkdir(parents=True, exist_ok=True)
    prefix = _prefix(config)
    icfg = IntegratorConfig(
        step_size=h,
        corrector_iterations=config.corrector_iterations,
        sample_stride=stride,
        resolution_cap=config.resolution_cap,
    )
    psi0 = initial_state(modes)
    t_wall = time.perf_counter()
    try:
        traj = integrate(
            psi0, atoms, modes, couplings, icfg, config.t_end,
            snapshot_times=config.snapshot_times,
        )
    except IntegrationInterrupted as stop:
        if write_outputs:
            part = stop.trajectory
            series = ObservableSeries(
                times=part.times, p1=part.probs[:, 0], p2=part.probs[:, 1],
                p3=part.probs[:, 2], norm2=part.norm2, energy=part.energy,
            )
            write_series_csv(outdir / f"{prefix}_series.csv", series, truncated=True)
            meta = _metadata(config, omega1, h, n_steps, stride, {"truncated": "true"})
            write_metadata(outdir / f"{prefix}_metadata.txt", meta)
        raise
    runtime = time.perf_counter() - t_wall

    max_norm_drift = float(np.max(np.abs(traj.norm2 - 1.0)))
    max_energy_drift = float(np.max(np.abs(traj.energy / traj.energy[0] - 1.0)))
    if max_norm_drift > config.conservation_tolerance:
        raise IntegrationError(
            f"norm drift {max_norm_drift:.3e} exceeds conservation tolerance "
            f"{config.conservation_tolerance:.1e}; run rejected"
        )
    if max_energy_drift > config.conservation_tolerance:
        raise IntegrationError(
            f"energy drift {max_energy_drift:.3e} exceeds conservation tolerance "
            f"{config.conservation_tolerance:.1e}; run rejected"
        )

    series = ObservableSeries(
        times=traj.times, p1=traj.probs[:, 0], p2=traj.probs[:, 1],
        p3=traj.probs[:, 2], norm2=traj.norm2, energy=traj.energy,
    )
    profiles = [
        field_profile(s, modes, omega1, config.grid_points) for s in traj.snapshots
    ]
    cone_limit = min(config.position1, 1.0 - config.position1)
    tails = [
        tail_fraction(p, config.position1)
        for p in profiles
        if p.t <= cone_limit * (1 + 1e-12)
    ]
    n_pre = int(np.sum(series.times < config.causality_time))
    precausal = (
        precausal_average(series.times, series.p3, config.causality_time)
        if n_pre >= 2
        else None
    )

    paths = {}
    if write_outputs:
        p = outdir / f"{prefix}_series.csv"
        write_series_csv(p, series)
        paths["series"] = p
        for prof in profiles:
            p = outdir / f"{prefix}_profile_t{prof.t:g}.csv"
            write_profile_csv(p, prof)
            paths[f"profile_t{prof.t:g}"] = p
        extra = {
            "max_norm_drift": _fmt(max_norm_drift),
            "max_energy_drift": _fmt(max_energy_drift),
            "precausal_average": _fmt(precausal) if precausal is not None else "",
            "runtime_seconds": f"{runtime:.3f}",
        }
        p = outdir / f"{prefix}_metadata.txt"
        write_metadata(p, _metadata(config, omega1, h, n_steps, stride, extra))
        paths["metadata"] = p

    return ScenarioResult(
        config=config,
        series=series,
        profiles=profiles,
        tails=tails,
        precausal_avg=precausal,
        max_norm_drift=max_norm_drift,
        max_energy_drift=max_energy_drift,
        step_size=h,
        step_count=n_steps,
        runtime_seconds=runtime,
        paths=paths,
    )


def sweep_configs(base: ScenarioConfig, counts):
    """Per-count configs for a sweep: identical physics, resized band.

    Symmetric sweeps recenter each band (center and resonance track the
    band); asymmetric sweeps keep lowest_index and the resonance placement
    fixed so only the upper cut-off moves.
    """
    out = []
    for count in counts:
        out.append(dataclasses.replace(base, mode_count=int(count), center_index=None))
    return out


def convergence_study(
    base: ScenarioConfig,
    counts,
    outdir: Path | str,
    budget_seconds: float | None = None,
):
    """Run the same scenario across mode counts and tabulate tail metrics.

    Writes <scenario_id>_tails.csv with one row per count.  The whole
    sweep is costed before the first run when a budget is given.
    """
    if len(counts) < 1:
        raise ValueError("sweep needs at least one mode count")
    configs = sweep_configs(base, counts)
    if budget_seconds is not None:
        total = 0.0
        for cfg in configs:
            atoms, modes, couplings, omega1 = build_system(cfg)
            h, n_steps, _ = plan_steps(cfg, omega1, float(modes.frequencies[-1]))
            total += estimate_runtime_seconds(
                len(modes), n_steps, cfg.corrector_iterations
            )
        if total > budget_seconds:
            raise BudgetExceeded(
                f"estimated {total:.1f}s for the {len(configs)}-run sweep "
                f"exceeds budget {budget_seconds:.1f}s"
            )
    outdir = Path(outdir)
    results = [run_scenario(cfg, outdir, budget_seconds=None) for cfg in configs]
    rows = []
    for res in results:
        if res.tails:
            t = res.tails[0].t
            frac = res.tails[0].tail_fraction
        else:
            t = math.nan
            frac = math.nan
        pre = res.precausal_avg if res.precausal_avg is not None else math.nan
        rows.append(
            TailRow(
                mode_count=res.config.mode_count,
                t=t,
                tail_fraction=frac,
                precausal_avg=pre,
            )
        )
    path = outdir / f"{base.scenario_id}_tails.csv"
    write_tails_csv(path, rows)
    return results, rows, path
