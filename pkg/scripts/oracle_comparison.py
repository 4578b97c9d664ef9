"""Compare a grid propagation with the k-space channel predictions.

Usage: python scripts/oracle_comparison.py [--t-max FS] [--a NM]

Runs Crank-Nicolson on a rectangular GaAs barrier, then prints the late-time
region norms, the fitted centre-of-mass lines of each side and the
transmission counterpart state next to their k-space values.  The defaults
match the reference run of the test suite and take about a minute.
"""

import argparse

from tunneltime import PacketKind, PacketSpec, delay_times, moments, norms, rectangular
from tunneltime.propagator import GridConfig, cm_trajectory, counterpart_from, fit_line, run

M_EFF = 0.067


def compare(t_max: float, a: float, l0: float, dx: float, dt: float) -> None:
    spec = PacketSpec.from_energy(0.02, l0, M_EFF)
    p = rectangular(0.3, a, 5.0)
    grid = GridConfig(dx=dx, dt=dt)
    rec = run(spec, p, t_max, 10.0, grid)
    T, R = norms(spec, p)
    left, barrier, right = rec.norms[-1]
    print(f"grid: {rec.final.n_points} points, max leak {rec.max_leak:.1e}")
    print(f"norms      grid left {left:.6f} right {right:.4e} barrier {barrier:.1e}")
    print(f"           k-space R {R:.6f} T {T:.4e}")
    for region, kind, t_from in (("right", PacketKind.TRANSMITTED, 0.5 * t_max),
                                 ("left", PacketKind.REFLECTED, 2 * t_max / 3)):
        slope, intercept = fit_line(*cm_trajectory(rec, region), t_from=t_from)
        m = moments(spec, p, kind)
        print(f"{kind.value:12s} grid x = {slope:.6f} t {intercept:+.3f}; "
              f"k-space x = {m.x_of_t[0]:.6f} t {m.x_of_t[1]:+.3f}")
    cp = counterpart_from(rec.final, p, "transmission", grid, M_EFF)
    x_tr = delay_times(spec, p).x_tr
    print(f"counterpart norm {cp.norm:.4e} (T {T:.4e}), centre {cp.mean_x:.4f} nm "
          f"(minus the spatial delay {-x_tr:.4f} nm)")


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--t-max", type=float, default=3000.0)
    ap.add_argument("--a", type=float, default=150.0)
    ap.add_argument("--l0", type=float, default=10.0)
    ap.add_argument("--dx", type=float, default=0.1)
    ap.add_argument("--dt", type=float, default=0.2)
    args = ap.parse_args(argv)
    compare(args.t_max, args.a, args.l0, args.dx, args.dt)


if __name__ == "__main__":
    main()
