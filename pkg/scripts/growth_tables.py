"""Print M+, M, r^2 N and S along a trajectory for one medium.

    python scripts/growth_tables.py [constant|two-shell|slabs] [--L 2] [--seed 1]
"""

import argparse

import numpy as np

from kato_growth.coefficients import audit_assumptions, power_gauges
from kato_growth.functionals import find_m0_r0, functional_series
from kato_growth.media import LayeredMedium, build_layered_medium, kato_field
from kato_growth.radial import InitialData, assemble, integrate
from kato_growth.sphere_basis import cached_basis

MEDIA = {
    "constant": lambda: (kato_field(3, 0.5), power_gauges(0.5)),
    "two-shell": lambda: build_layered_medium(LayeredMedium.shells([2.0], [1.0, 4.0]), 0.5),
    "slabs": lambda: build_layered_medium(
        LayeredMedium.slabs([-2.0, -5.0], [3.0, 6.0], [1.5, 2.5], 1.0, [2.0, 3.0]), 0.5),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("medium", nargs="?", default="two-shell", choices=sorted(MEDIA))
    ap.add_argument("--L", type=int, default=2)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--r-end", type=float, default=30.0)
    args = ap.parse_args()

    fld, g = MEDIA[args.medium]()
    grid = np.linspace(1.0, args.r_end, 300)
    audit = audit_assumptions(fld, g, grid)
    g = audit.gauges(g)
    system = assemble(cached_basis(3, args.L), fld, (1.0, args.r_end))
    init = InitialData.random(system.n_modes, 1.0, np.random.default_rng(args.seed))
    traj = integrate(system, init, grid)
    m0 = find_m0_r0(traj, g, audit.c0, audit.c1)
    ser = functional_series(traj, g, m=m0.m0())
    print(f"audit passed: {audit.passed('full')}; m0 = {m0.m0():.4g}; r0 = {m0.r0}")
    print(f"{'r':>8s} {'M+':>12s} {'M':>12s} {'r^2 N':>12s} {'S':>12s} {'E':>12s}")
    for k in range(0, len(ser.r), 15):
        r = ser.r[k]
        print(f"{r:8.3f} {ser.Mplus[k]:12.5g} {ser.M[k]:12.5g} {r * r * ser.N[k]:12.5g} "
              f"{ser.S[k]:12.5g} {ser.E[k]:12.5g}")


if __name__ == "__main__":
    main()
