"""Compare detected blow-up times with the closed form 1/(2 c u0^2) for u' = c u^3."""
import argparse

from ineqcert.odesim import Status, cubic_blowup_time, integrate


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--c", type=float, nargs="+", default=[0.5, 1.0, 2.0])
    parser.add_argument("--u0", type=float, nargs="+", default=[0.25, 0.5, 1.0, 2.0])
    args = parser.parse_args(argv)
    print("c,u0,tb_exact,tb_estimate,abs_error,status")
    for c in args.c:
        for u0 in args.u0:
            exact = cubic_blowup_time(c, u0)
            traj = integrate(lambda t, x, c=c: c * x ** 3, [u0], 0.0, 2.0 * exact)
            est = traj.tb_estimate if traj.status is Status.BLOWUP else float("nan")
            print(f"{c:g},{u0:g},{exact:.10g},{est:.10g},{abs(est - exact):.3g},{traj.status.value}")


if __name__ == "__main__":
    main()
