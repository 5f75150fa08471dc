"""Heterogeneous-density and spiral runs in 2D with snapshots and probe series."""

import argparse
from dataclasses import replace
from pathlib import Path

import numpy as np

from fhn_ap.experiments import (
    hetero_test,
    output_dir,
    run_field_experiment,
    snapshot_name,
    spiral_test,
    write_probe_csv,
)
from fhn_ap.spectral import write_snapshot

PROBES = {"a": (-6.0, 3.0), "b": (-8.0, 4.0), "c": (-8.0, 2.0)}


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("case", choices=["hetero", "spiral"])
    parser.add_argument("--eps", type=float)
    parser.add_argument("--n", type=int, default=128)
    parser.add_argument("--M", type=int, default=10)
    parser.add_argument("--t-end", type=float)
    parser.add_argument("--v-width", type=float, help="spread of the particle potentials")
    parser.add_argument("--w-width", type=float, help="spread of the particle adaptations")
    parser.add_argument("--output")
    args = parser.parse_args()

    build = hetero_test if args.case == "hetero" else spiral_test
    kwargs = {k: v for k, v in (("eps", args.eps), ("t_end", args.t_end)) if v is not None}
    setup = build(n=args.n, M=args.M, **kwargs)
    widths = {k: v for k, v in (("v_width", args.v_width), ("w_width", args.w_width)) if v is not None}
    if widths:
        setup = replace(setup, data=replace(setup.data, **widths))
    t_end = setup.scheme.t_end
    times = [t for t in np.linspace(0.0, t_end, 9)]
    run = run_field_experiment(setup, times, PROBES if args.case == "spiral" else {},
                               progress=lambda s: print(f"t={s.t:8.2f}  max|V|={np.abs(s.V_M).max():.4f}",
                                                        flush=True),
                               progress_every=int(round(50.0 / setup.scheme.dt)))
    out = Path(output_dir(args.output or f"output/{args.case}_eps{setup.scheme.eps:g}"))
    snaps = output_dir(out / "snapshots")
    for t, field in run.snapshots:
        write_snapshot(snaps / snapshot_name("V", t), field, t)
    for name, series in run.probes.items():
        write_probe_csv(out / f"probe_{name}.csv", series)
        values = np.array([v for _, v in series])
        print(f"probe {name} {PROBES[name]}: range [{values.min():.3f}, {values.max():.3f}]")
    print(f"final max|V| = {np.abs(run.final.V_M).max():.4e}; outputs in {out}")


if __name__ == "__main__":
    main()
