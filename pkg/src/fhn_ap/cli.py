"""Command-line entry point: ``fhn-ap {run,sweep,modes,validate} --config FILE``."""

from __future__ import annotations

import argparse
import os
import sys
import time
from dataclasses import replace
from pathlib import Path

from .config import ConfigError, RunConfig, parse_config
from .experiments import (
    front_position,
    modes_for,
    output_dir,
    run_accuracy_sweep,
    run_entropy_sweep,
    run_field_experiment,
    snapshot_name,
    write_probe_csv,
)
from .kernel import QuadratureError, KernelIntegrationError
from .spectral import Field, write_csv_1d, write_snapshot
from .timestepping import BlowUpError

EXIT_OK, EXIT_CONFIG, EXIT_BLOWUP, EXIT_IO = 0, 1, 2, 3
THREADS_ENV = "FHN_AP_THREADS"


class _Parser(argparse.ArgumentParser):
    # usage errors are configuration errors, not blow-ups
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fhn-ap", description="Asymptotic-preserving solver for the kinetic FitzHugh-Nagumo model.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (
        ("run", "run one simulation and write snapshots, probes and series"),
        ("sweep", "run an accuracy or entropy sweep and write its table"),
        ("modes", "precompute and cache kernel modes"),
        ("validate", "check a configuration file and exit"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", required=True, help="TOML configuration file")
        p.add_argument("--output", help="output directory (overrides output.directory)")
        p.add_argument("--threads", type=int, help=f"worker threads (default: ${THREADS_ENV} or CPU count)")
        p.add_argument("--quiet", action="store_true", help="suppress progress lines")
    return parser


def resolve_threads(flag: int | None) -> int:
    if flag is not None:
        return max(1, flag)
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError([f"{THREADS_ENV} must be an integer, got '{env}'"])
    return os.cpu_count() or 1


def _log(quiet: bool, message: str) -> None:
    if not quiet:
        print(message, file=sys.stderr, flush=True)


def cmd_validate(rc: RunConfig, args) -> int:
    s = rc.setup
    print(f"config OK: experiment={rc.experiment} d={s.grid.d} n_x={s.grid.n} "
          f"scheme={s.scheme.scheme.value} dt={s.scheme.dt} eps={s.scheme.eps} M={s.M}")
    return EXIT_OK


def cmd_modes(rc: RunConfig, args) -> int:
    cache = rc.mode_cache or Path(rc.output_dir) / "modes"
    started = time.perf_counter()
    setup = rc.setup
    if setup.scheme.scheme.is_limit:
        print("limit schemes use no kernel modes")
        return EXIT_OK
    eps_values = rc.sweep_values if rc.experiment == "entropy" else (setup.scheme.eps,)
    for eps in eps_values:
        modes_for(setup.with_scheme(eps=eps), cache)
    print(f"cached {len(eps_values)} mode set(s) under {cache} in {time.perf_counter() - started:.2f} s")
    return EXIT_OK


def cmd_sweep(rc: RunConfig, args) -> int:
    if rc.experiment not in ("accuracy", "entropy"):
        raise ConfigError([f"sweep needs experiment 'accuracy' or 'entropy', got '{rc.experiment}'"])
    out = output_dir(rc.output_dir)
    runner = run_accuracy_sweep if rc.experiment == "accuracy" else run_entropy_sweep
    report = runner(rc.setup, rc.sweep_values, threads=args.threads, cache_dir=rc.mode_cache)
    report.write_csv(out / "report.csv")
    print(report.format_table())
    print(f"wall time {report.metadata['wall_time']:.2f} s")
    return EXIT_OK


def cmd_run(rc: RunConfig, args) -> int:
    setup = rc.setup
    out = output_dir(rc.output_dir)
    started = time.perf_counter()

    def progress(state):
        V = Field(state.grid, state.V_M)
        peak = float(abs(V.values).max())
        _log(args.quiet, f"t={state.t:10.3f}  max|V|={peak:.4e}  wall={time.perf_counter() - started:8.2f}s")

    result = run_field_experiment(
        setup, rc.snapshot_times, rc.probes, sample_dt=rc.sample_dt, cache_dir=rc.mode_cache,
        progress=progress, progress_every=rc.progress_every,
    )
    if rc.snapshot_times:
        snap_dir = output_dir(out / "snapshots")
        for t, field in result.snapshots:
            write_snapshot(snap_dir / snapshot_name("V", t), field, t)
    for name, series in result.probes.items():
        write_probe_csv(out / f"probe_{name}.csv", series)
    write_series(out / "series.csv", result)
    final = Field(setup.grid, result.final.V_M)
    if setup.grid.d == 1:
        write_csv_1d(out / "final_V.csv", final)
    speed = result.front_speed()
    print(f"experiment {rc.experiment}: t_end={result.final.t:.6g} steps={result.final.step} "
          f"max|V|={abs(final.values).max():.6e} front={front_position(final):.6g} front_speed={speed:.6g}")
    print(f"wall time {time.perf_counter() - started:.2f} s")
    return EXIT_OK


def write_series(path, result) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("t,max_abs_V,front\n")
        for (t, peak), (_, front) in zip(result.peaks, result.fronts):
            fh.write(f"{t!r},{peak!r},{front!r}\n")


COMMANDS = {"run": cmd_run, "sweep": cmd_sweep, "modes": cmd_modes, "validate": cmd_validate}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        rc = parse_config(args.config)
        if args.output:
            rc = replace(rc, output_dir=args.output)
        args.threads = resolve_threads(args.threads)
        return COMMANDS[args.command](rc, args)
    except ConfigError as exc:
        print(exc, file=sys.stderr)
        return EXIT_CONFIG
    except BlowUpError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    except (QuadratureError, KernelIntegrationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
