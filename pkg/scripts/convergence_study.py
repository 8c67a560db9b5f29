#!/usr/bin/env python3
"""Step-size sweep for the implicit one-step method on the free spline.

Integrates from a state whose exact flow is a cubic, then tabulates the
endpoint error, the energy drift over the whole run, and the observed order
between consecutive step sizes.  The endpoint error should shrink like h^2
and the drift should stay at rounding level for every h.
"""

import argparse

import numpy as np

from geodisc.hamiltonian import integrate, second_order_hamiltonian
from geodisc.lifts import second_order_phase_map


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--h", default="0.04,0.02,0.01,0.005", help="comma list of step sizes")
    ap.add_argument("--T", type=float, default=1.0, help="horizon; must be a multiple of every h")
    args = ap.parse_args()

    hs = [float(x) for x in args.h.split(",")]
    C = second_order_phase_map(1)
    H = second_order_hamiltonian(1)
    z0 = np.array([0.0, 0.0, 12.0, 6.0])  # q, qdot, p0, p1
    T = args.T
    # exact endpoint of the cubic with constant p0 and affine p1
    q_exact = z0[0] + z0[1] * T + z0[3] * T**2 / 2 - z0[2] * T**3 / 6

    rows = []
    for h in hs:
        steps = int(round(T / h))
        if abs(steps * h - T) > 1e-9 * max(1.0, T):
            raise SystemExit(f"error: bad-discretization: T={T} is not a multiple of h={h}")
        traj = integrate(C, H, h, steps, z0)
        err = abs(traj.states[-1].q[0] - q_exact)
        drift = float(np.max(np.abs(traj.energies - traj.energies[0])))
        rows.append((h, err, drift))

    print(f"{'h':>10}  {'endpoint error':>15}  {'H drift':>10}  {'order':>6}")
    prev = None
    for h, err, drift in rows:
        order = "" if prev is None else f"{np.log(prev[1] / err) / np.log(prev[0] / h):6.3f}"
        print(f"{h:10.4g}  {err:15.6e}  {drift:10.2e}  {order:>6}")
        prev = (h, err)


if __name__ == "__main__":
    main()
