"""Command-line front end.

Subcommands:

    run           one scenario -> series/profile CSVs + metadata
    sweep         same scenario across mode counts -> per-run CSVs + tails table
    validate      parse and cost a config without running it
    oracle-check  integrator vs. exact-propagator cross-check on a small system

Configuration is a flat INI-style key=value file with sections; every key is
listed in the table below (also shown by --help).  Unknown keys are errors.
Values given with repeatable --set section.key=value flags override the file.
Exit codes: 0 success, 2 bad configuration, 3 runtime failure, 4 budget
refusal.  Ctrl-C flushes partial series CSVs with a `# truncated` trailer
and exits 130.  The default output directory is $CAVITYFRONT_OUTDIR, else
./runs.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import (
    IntegrationError,
    IntegrationInterrupted,
    IntegratorConfig,
    initial_state,
    integrate,
    propagate_oracle,
)
from .experiments import (
    DEFAULT_SCALE,
    BudgetExceeded,
    ScenarioConfig,
    build_system,
    convergence_study,
    estimate_runtime_seconds,
    plan_steps,
    preset,
    run_scenario,
)
from .model import asymmetric_mode_set, coupling_matrix, default_atoms

ENV_OUTDIR = "CAVITYFRONT_OUTDIR"


class ConfigError(Exception):
    pass


def _pfloat(raw: str) -> float:
    return float(raw)


def _pint(raw: str) -> int:
    v = int(raw, 10)
    return v


def _pstr(raw: str) -> str:
    return raw.strip()


def _ppolicy(raw: str) -> str:
    v = raw.strip()
    if v not in ("symmetric", "asymmetric"):
        raise ValueError("must be 'symmetric' or 'asymmetric'")
    return v


def _pfloats(raw: str) -> tuple:
    raw = raw.strip()
    if not raw:
        return ()
    return tuple(float(v) for v in raw.split(","))


def _pints(raw: str) -> tuple:
    raw = raw.strip()
    if not raw:
        return ()
    return tuple(int(v, 10) for v in raw.split(","))


# (section, key, parser, ScenarioConfig field or None, help text with units)
KEY_SPECS = [
    ("scenario", "id", _pstr, None,
     "preset fig1..fig6 or custom (default custom)"),
    ("scenario", "scale", _pfloat, None,
     "preset band scale factor in (0, 1], dimensionless (default 0.5)"),
    ("scenario", "t_end", _pfloat, "t_end",
     "integration end time, cavity crossings"),
    ("scenario", "time_granularity", _pfloat, "time_granularity",
     "step/snapshot alignment unit, cavity crossings (default 0.05)"),
    ("scenario", "causality_time", _pfloat, "causality_time",
     "precausal-window edge for atom 3, cavity crossings (default 0.5)"),
    ("atoms", "gamma1", _pfloat, "gamma1",
     "decay rate of atom 1, reference units (default 1)"),
    ("atoms", "gamma2", _pfloat, "gamma2",
     "decay rate of atom 2, units of gamma1 (default 16)"),
    ("atoms", "gamma3", _pfloat, "gamma3",
     "decay rate of atom 3, units of gamma1 (default 256)"),
    ("atoms", "delta", _pfloat, "delta",
     "detuning omega1 - omega2, inverse crossings (default 4)"),
    ("atoms", "position1", _pfloat, "position1",
     "atom 1 position, units of L (default 0.25)"),
    ("atoms", "position2", _pfloat, "position2",
     "atom 2 position, units of L (default 0.5)"),
    ("atoms", "position3", _pfloat, "position3",
     "atom 3 position, units of L (default 0.75)"),
    ("modes", "policy", _ppolicy, "mode_policy",
     "symmetric (band centered on the resonance) or asymmetric (bounded below)"),
    ("modes", "count", _pint, "mode_count",
     "number of retained modes; odd for symmetric bands"),
    ("modes", "counts", _pints, None,
     "comma-separated mode counts for sweep (overrides preset counts)"),
    ("modes", "center_index", _pint, "center_index",
     "symmetric band center mode index (default: (count-1)/2 + 1)"),
    ("modes", "lowest_index", _pint, "lowest_index",
     "lowest retained mode index for asymmetric bands (default 1)"),
    ("modes", "omega1_index", _pint, "omega1_index",
     "resonance placement: omega1 = index * pi per crossing (default: band center)"),
    ("integrator", "step_size", _pfloat, "step_size",
     "fixed step in crossings; default derived from conservation_tolerance"),
    ("integrator", "conservation_tolerance", _pfloat, "conservation_tolerance",
     "max |norm^2 - 1| and relative energy drift accepted (default 1e-8)"),
    ("integrator", "resolution_cap", _pfloat, "resolution_cap",
     "max step_size * omega_max, radians per step (default 0.3)"),
    ("integrator", "corrector_iterations", _pint, "corrector_iterations",
     "corrector applications per step, PECE = 1 (default 1)"),
    ("observables", "grid_points", _pint, "grid_points",
     "field profile grid size over [0, 1] (default 2001)"),
    ("observables", "snapshot_times", _pfloats, "snapshot_times",
     "comma-separated profile snapshot times, crossings (default 0.25)"),
    ("observables", "sample_target", _pint, "sample_target",
     "approximate number of stored series rows (default 2000)"),
]

_SPEC_BY_KEY = {(s, k): (p, f) for s, k, p, f, _ in KEY_SPECS}


def _key_table() -> str:
    lines = ["configuration keys (file sections or --set section.key=value):", ""]
    section = None
    for s, k, _, _, help_text in KEY_SPECS:
        if s != section:
            lines.append(f"  [{s}]")
            section = s
        lines.append(f"    {k:24s} {help_text}")
    return "\n".join(lines)


def _read_config_file(path: str) -> dict:
    import configparser

    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {path}")
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string(p.read_text())
    except configparser.Error as e:
        raise ConfigError(f"cannot parse {path}: {e}") from None
    kv = {}
    for sec in cp.sections():
        for key, raw in cp.items(sec):
            if (sec, key) not in _SPEC_BY_KEY:
                raise ConfigError(f"unknown key '{sec}.{key}' in {path}")
            kv[(sec, key)] = raw
    return kv


def _apply_set_flags(kv: dict, set_flags) -> dict:
    for flag in set_flags or ():
        if "=" not in flag:
            raise ConfigError(f"--set expects section.key=value, got {flag!r}")
        name, raw = flag.split("=", 1)
        if "." not in name:
            raise ConfigError(f"--set expects section.key=value, got {flag!r}")
        sec, key = name.split(".", 1)
        if (sec, key) not in _SPEC_BY_KEY:
            raise ConfigError(f"unknown key '{sec}.{key}'")
        kv[(sec, key)] = raw
    return kv


def _assemble(kv: dict, cli_scenario=None, cli_scale=None):
    """Resolve key/value pairs to (config, counts).

    Preset ids expand first; remaining keys override preset fields.  counts
    carries the sweep axis (presets fig2/3/5/6 have several; single runs
    use the last, headline count).
    """
    sid = cli_scenario or kv.get(("scenario", "id"), "custom").strip()
    if ("scenario", "id") in kv and cli_scenario and cli_scenario != kv[("scenario", "id")].strip():
        raise ConfigError("--scenario disagrees with scenario.id in the config file")
    scale_raw = kv.get(("scenario", "scale"))
    scale = cli_scale if cli_scale is not None else (
        float(scale_raw) if scale_raw is not None else DEFAULT_SCALE
    )
    if sid == "custom":
        if scale_raw is not None or cli_scale is not None:
            raise ConfigError("scenario.scale applies only to presets")
        base, counts = ScenarioConfig(), None
    else:
        try:
            base, counts = preset(sid, scale)
        except ValueError as e:
            raise ConfigError(str(e)) from None

    repl = {}
    counts_override = None
    for (sec, key), raw in kv.items():
        parser_fn, field = _SPEC_BY_KEY[(sec, key)]
        if (sec, key) == ("modes", "counts"):
            try:
                counts_override = parser_fn(raw)
            except ValueError as e:
                raise ConfigError(f"invalid value for modes.counts: {raw!r} ({e})") from None
            continue
        if field is None:
            continue
        try:
            repl[field] = parser_fn(raw)
        except ValueError as e:
            raise ConfigError(f"invalid value for {sec}.{key}: {raw!r} ({e})") from None
    try:
        config = dataclasses.replace(base, **repl)
    except ValueError as e:
        raise ConfigError(str(e)) from None
    if counts_override:
        counts = counts_override
    if counts is None:
        counts = (config.mode_count,)
    return config, counts


def _collect(args) -> tuple:
    kv = _read_config_file(args.config) if getattr(args, "config", None) else {}
    kv = _apply_set_flags(kv, getattr(args, "set", None))
    return _assemble(
        kv,
        cli_scenario=getattr(args, "scenario", None),
        cli_scale=getattr(args, "scale", None),
    )


def _outdir(args) -> Path:
    if getattr(args, "outdir", None):
        return Path(args.outdir)
    return Path(os.environ.get(ENV_OUTDIR, "runs"))


def _cmd_run(args) -> int:
    config, counts = _collect(args)
    config = dataclasses.replace(config, mode_count=counts[-1])
    outdir = _outdir(args)
    res = run_scenario(config, outdir, budget_seconds=args.budget)
    if not args.quiet:
        pre = (
            repr(res.precausal_avg) if res.precausal_avg is not None else "undefined"
        )
        tail = repr(res.tails[0].tail_fraction) if res.tails else "undefined"
        print(
            f"run complete: scenario={config.scenario_id} "
            f"policy={config.mode_policy} modes={config.mode_count} "
            f"steps={res.step_count} step_size={res.step_size:.6e} "
            f"runtime={res.runtime_seconds:.2f}s "
            f"norm_drift={res.max_norm_drift:.3e} "
            f"tail_fraction={tail} precausal_average={pre}"
        )
        print(f"outputs: {res.paths['series'].parent}")
    return 0


def _cmd_sweep(args) -> int:
    config, counts = _collect(args)
    if len(counts) < 2:
        raise ConfigError(
            "sweep needs at least two mode counts (modes.counts or a "
            "multi-count preset)"
        )
    outdir = _outdir(args)
    results, rows, path = convergence_study(
        config, counts, outdir, budget_seconds=args.budget
    )
    if not args.quiet:
        for row in rows:
            print(
                f"modes={row.mode_count} t={row.t:g} "
                f"tail_fraction={repr(row.tail_fraction)} "
                f"precausal_average={repr(row.precausal_avg)}"
            )
        print(f"tails table: {path}")
    return 0


def _cmd_validate(args) -> int:
    kv = _read_config_file(args.config_file)
    kv = _apply_set_flags(kv, args.set)
    config, counts = _assemble(kv)
    for count in counts:
        cfg = dataclasses.replace(config, mode_count=count, center_index=None)
        atoms, modes, couplings, omega1 = build_system(cfg)
        h, n_steps, stride = plan_steps(cfg, omega1, float(modes.frequencies[-1]))
        est = estimate_runtime_seconds(len(modes), n_steps, cfg.corrector_iterations)
        print(
            f"valid: scenario={cfg.scenario_id} policy={cfg.mode_policy} "
            f"modes={len(modes)} omega1={omega1:.6g} step_size={h:.6e} "
            f"steps={n_steps} estimated_seconds={est:.1f}"
        )
    return 0


def _cmd_oracle_check(args) -> int:
    # 8 retained modes around a carrier at 6*pi, the standard atom triple;
    # small enough for the dense propagator, integrated over one crossing
    modes = asymmetric_mode_set(2, 8)
    atoms = default_atoms(omega1=6 * np.pi)
    couplings = coupling_matrix(atoms, modes)
    psi0 = initial_state(modes)
    n = 2000
    cfg = IntegratorConfig(step_size=1.0 / n, sample_stride=n)
    traj = integrate(psi0, atoms, modes, couplings, cfg, 1.0, snapshot_times=(1.0,))
    got = traj.snapshots[-1]
    want = propagate_oracle(psi0, atoms, modes, couplings, 1.0)
    err = max(
        float(np.max(np.abs(got.c - want.c))),
        float(np.max(np.abs(got.b - want.b))),
    )
    tol = 1e-8
    print(f"oracle-check: max amplitude error = {err:.3e} (tolerance {tol:.0e})")
    if err > tol:
        print("oracle-check: FAIL", file=sys.stderr)
        return 3
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cavityfront",
        description=(
            "Spontaneous emission and excitation transfer of three two-level "
            "atoms in a 1D cavity; writes series/profile/tails CSVs."
        ),
        epilog=_key_table(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, budget=True):
        p.add_argument("--scenario", help="preset id fig1..fig6 (default: config file or custom)")
        p.add_argument("--scale", type=float, help="preset scale factor in (0, 1]")
        p.add_argument("--config", help="key=value config file")
        p.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE",
                       help="override one config key (repeatable)")
        p.add_argument("--outdir", help=f"output directory (default ${ENV_OUTDIR} or ./runs)")
        if budget:
            p.add_argument("--budget", type=float, default=None, metavar="SECONDS",
                           help="refuse runs whose cost estimate exceeds this")
        p.add_argument("--quiet", action="store_true", help="suppress summary lines")

    p_run = sub.add_parser(
        "run", help="run one scenario",
        epilog=_key_table(), formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    common(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser(
        "sweep", help="run a scenario across mode counts and tabulate tails",
        epilog=_key_table(), formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    common(p_sweep)
    p_sweep.set_defaults(func=_cmd_sweep)

    p_val = sub.add_parser(
        "validate", help="check a config file without running",
        epilog=_key_table(), formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p_val.add_argument("config_file")
    p_val.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE")
    p_val.set_defaults(func=_cmd_validate)

    p_oracle = sub.add_parser(
        "oracle-check",
        help="integrator vs. exact propagator on the 8-mode reference system",
    )
    p_oracle.set_defaults(func=_cmd_oracle_check)

    return parser


def parse_and_dispatch(argv) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config-error: {e}", file=sys.stderr)
        return 2
    except BudgetExceeded as e:
        print(f"budget-error: {e}", file=sys.stderr)
        return 4
    except (IntegrationInterrupted, KeyboardInterrupt):
        print("interrupted: partial output flushed", file=sys.stderr)
        return 130
    except IntegrationError as e:
        print(f"runtime-error: {e}", file=sys.stderr)
        return 3
    except ValueError as e:
        # construction-time rejections are configuration problems
        print(f"config-error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"runtime-error: {e}", file=sys.stderr)
        return 3


def main(argv=None) -> int:
    return parse_and_dispatch(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
