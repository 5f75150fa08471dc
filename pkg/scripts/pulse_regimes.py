"""Front speed and final amplitude of the 1D box data over a range of eps."""

import argparse

import numpy as np

from fhn_ap.experiments import pulse_test, run_field_experiment
from fhn_ap.timestepping import Scheme


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--eps", type=float, nargs="+", default=[0.5, 1.0, 2.0, 3.0, 4.0, 5.0])
    parser.add_argument("--n", type=int, default=512)
    parser.add_argument("--dt", type=float, default=0.01)
    parser.add_argument("--t-end", type=float, default=250.0)
    parser.add_argument("--scheme", default="RK1", choices=[s.value for s in Scheme if not s.is_limit])
    args = parser.parse_args()
    print(f"{'eps':>6}  {'front speed':>12}  {'final max|V|':>12}")
    for eps in args.eps:
        run = run_field_experiment(pulse_test(Scheme(args.scheme), eps, args.dt, args.n, args.t_end))
        peak = float(np.abs(run.final.V_M).max())
        print(f"{eps:6.2f}  {run.front_speed():12.4g}  {peak:12.3e}")


if __name__ == "__main__":
    main()
