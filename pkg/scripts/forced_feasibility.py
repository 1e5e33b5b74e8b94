"""Map the feasible region of the forced power-decay design over (c1, nu).

Prints one row per grid point with the optimal lambda and admissible initial radius.
"""
import argparse

import numpy as np

from ineqcert.families import design_forced_power_decay


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--c0", type=float, default=1.0)
    parser.add_argument("--c2", type=float, default=1.0)
    parser.add_argument("--p", type=float, default=2.0)
    parser.add_argument("--q1", type=float, default=0.5)
    parser.add_argument("--q2", type=float, default=2.0)
    parser.add_argument("--points", type=int, default=9)
    args = parser.parse_args(argv)
    print("c1,nu,feasible,lambda0,u0_radius,failed_condition")
    for c1 in np.linspace(0.5, 4.0, args.points):
        for nu in np.linspace(0.1, 1.5, args.points):
            d = design_forced_power_decay(args.c0, args.c2, args.p, args.q1, args.q2, float(nu), float(c1))
            if d.feasible:
                print(f"{c1:g},{nu:g},true,{d.lambda0:.8g},{d.u0_radius:.8g},")
            else:
                print(f"{c1:g},{nu:g},false,,,{d.condition}")


if __name__ == "__main__":
    main()
