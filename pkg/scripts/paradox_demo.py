"""Show how the standard wave-packet times depend on where the packet starts.

Usage: python scripts/paradox_demo.py

Keeps the packet and barrier shape fixed and moves the barrier away from the
starting point.  The standard transmission time grows linearly with the
distance ``a`` because the transmitted packet is faster than the incident
one, while the channel delay times stay put.
"""

import warnings

from tunneltime import (PacketKind, PacketSpec, delay_times, k_from_energy, k_moment,
                        rectangular, scattering_window, swpa_times)

M_EFF = 0.067
L = 25.0


def main() -> None:
    spec = PacketSpec(k_from_energy(0.02, M_EFF), 5.0, M_EFF)
    print(f"{'a (nm)':>8} {'swpa tr (fs)':>13} {'delay tr (fs)':>14} {'delay ref (fs)':>15} "
          f"{'tau_scatt (fs)':>15}")
    for a in (50.0, 100.0, 200.0, 500.0, 1000.0):
        p = rectangular(0.3, a, 5.0)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            t_swpa, _ = swpa_times(spec, p, L, L)
        d = delay_times(spec, p)
        w = scattering_window(spec, p)
        print(f"{a:8.0f} {t_swpa:13.3f} {d.tau_tr:14.6f} {d.tau_ref_minus:15.6f} "
              f"{w.tau_scatt:15.3f}")
    p = rectangular(0.3, 100.0, 5.0)
    k_tr = k_moment(spec, p, PacketKind.TRANSMITTED, 1)
    slope = (1 / k_tr - 1 / spec.k0) / spec.hbar_over_m
    print(f"predicted swpa slope (1/<k>_tr - 1/k0) m/hbar = {slope:.6f} fs/nm")


if __name__ == "__main__":
    main()
