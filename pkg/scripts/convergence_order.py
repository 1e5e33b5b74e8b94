"""Measure the empirical order of the DP45 integrator on u' = u^3 (exact solution known).

    python3 scripts/convergence_order.py [--t-end 0.375] [--out convergence.csv]
"""
import argparse

import numpy as np

from ineqcert.odesim import IntegratorOptions, blowup_oracle_cubic, integrate


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--t-end", type=float, default=0.375)
    parser.add_argument("--out", default=None)
    args = parser.parse_args(argv)
    exact = blowup_oracle_cubic(1.0, 1.0, args.t_end)
    rows = []
    for rtol in np.geomspace(1e-4, 1e-11, 8):
        opts = IntegratorOptions(rtol=float(rtol), atol=float(rtol) * 1e-2)
        traj = integrate(lambda t, x: x ** 3, [1.0], 0.0, args.t_end, opts)
        err = abs(traj.states[-1, 0] - exact) / exact
        rows.append((rtol, traj.n_steps, err))
    steps = np.log([r[1] for r in rows])
    errs = np.log([r[2] for r in rows])
    slope = np.polyfit(steps, errs, 1)[0]
    lines = ["rtol,steps,rel_error"] + [f"{r:.3g},{n},{e:.6g}" for r, n, e in rows]
    print("\n".join(lines))
    print(f"# slope log(error) vs log(steps): {slope:.3f}")
    if args.out:
        with open(args.out, "w") as fh:
            fh.write("\n".join(lines) + "\n")


if __name__ == "__main__":
    main()
