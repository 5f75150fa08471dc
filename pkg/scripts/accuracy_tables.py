"""Order tables for both kinetic schemes on the linear test."""

import argparse
from pathlib import Path

from fhn_ap.experiments import linear_test, output_dir, run_accuracy_sweep
from fhn_ap.timestepping import Scheme

PUBLISHED = {
    "RK1": {2e-2: 1.09e-04, 1e-2: 5.47e-05, 5e-3: 2.73e-05, 2e-3: 1.09e-05, 1e-3: 5.47e-06},
    "HSDIRK2": {2e-2: 8.35e-09, 1e-2: 2.07e-08, 5e-3: 5.01e-09, 2e-3: 1.23e-09, 1e-3: 2.95e-10},
}


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=128)
    parser.add_argument("--dts", type=float, nargs="+", default=[2e-2, 1e-2, 5e-3, 2e-3, 1e-3])
    parser.add_argument("--output", default="output/accuracy")
    args = parser.parse_args()
    out = output_dir(args.output)
    for scheme in (Scheme.RK1, Scheme.HSDIRK2):
        report = run_accuracy_sweep(linear_test(scheme, n=args.n), args.dts)
        report.write_csv(Path(out) / f"{scheme.value}.csv")
        print(f"\n{scheme.value}  (fitted order {report.slope():.3f})")
        print(f"{'dt':>10}  {'error':>10}  {'order':>6}  {'published':>10}")
        for dt, err, order in report.rows:
            ref = PUBLISHED[scheme.value].get(dt)
            print(f"{dt:10.3g}  {err:10.3e}  {order:6.2f}  {ref if ref else float('nan'):10.2e}")


if __name__ == "__main__":
    main()
