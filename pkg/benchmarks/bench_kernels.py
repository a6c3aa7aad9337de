"""Compare the numba and numpy kernel backends at oracle-check sizes.

Each backend runs in a fresh interpreter because the backend is fixed at
import time by WEHRL_EUR_DISABLE_NUMBA.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--cutoff 40] [--order 24]
"""

import argparse
import json
import os
import subprocess
import sys

CHILD = r"""
import json, sys, time
import numpy as np
from wehrl_eur import _kernels as k
from wehrl_eur import fock, symplectic as sp, wehrl
from wehrl_eur.quadrature import grid_for_covariance

cutoff, order, repeat = (int(x) for x in sys.argv[1:4])
rho = fock.tmsv_fock(3.0, fock.FockSpace(2, cutoff)).density()
d = cutoff + 1
rho4 = np.ascontiguousarray(rho.matrix.reshape(d, d, d, d))
grid = grid_for_covariance(sp.marginal(sp.two_mode_squeezed(3.0), "A").sigma, order, order)
z = np.ascontiguousarray(grid.nodes[:, 0])
coh = k.coherent_amplitudes(z, cutoff)
lam = np.linalg.eigvalsh(k.conditional_operators(rho4, coh)).clip(0.0)
r = np.random.default_rng(0).normal(size=(z.size * 16, 4))
inv = np.eye(4) * 0.7

cases = {
    "coherent_amplitudes": lambda: k.coherent_amplitudes(z, cutoff),
    "conditional_operators": lambda: k.conditional_operators(rho4, coh),
    "neg_xlogx_sum": lambda: k.neg_xlogx_sum(lam),
    "gaussian_quadform": lambda: k.gaussian_quadform(r, inv),
    "oracle_case_end_to_end": lambda: wehrl.conditional_wehrl_fock(rho, 1, grid, kappa=2.0),
}
out = {"backend": k.BACKEND}
for name, fn in cases.items():
    times = []
    for _ in range(repeat + 1):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    out[name] = {"first_call_s": times[0], "best_s": min(times[1:])}
print(json.dumps(out))
"""


def run(disable: bool, cutoff: int, order: int, repeat: int) -> dict:
    env = dict(os.environ)
    if disable:
        env["WEHRL_EUR_DISABLE_NUMBA"] = "1"
    else:
        env.pop("WEHRL_EUR_DISABLE_NUMBA", None)
    proc = subprocess.run([sys.executable, "-c", CHILD, str(cutoff), str(order), str(repeat)],
                          capture_output=True, text=True, env=env, check=True)
    return json.loads(proc.stdout)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--cutoff", type=int, default=40)
    ap.add_argument("--order", type=int, default=24)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", action="store_true", help="print raw JSON")
    args = ap.parse_args()

    results = [run(False, args.cutoff, args.order, args.repeat), run(True, args.cutoff, args.order, args.repeat)]
    if args.json:
        print(json.dumps(results, indent=2))
        return
    first, second = results
    print(f"cutoff={args.cutoff} order={args.order} repeat={args.repeat}")
    print(f"{'kernel':<26}{first['backend'] + ' best':>14}{second['backend'] + ' best':>14}"
          f"{first['backend'] + ' 1st':>14}{'ratio':>8}")
    for name in first:
        if name == "backend":
            continue
        a, b = first[name], second[name]
        print(f"{name:<26}{a['best_s']:>13.4f}s{b['best_s']:>13.4f}s{a['first_call_s']:>13.4f}s"
              f"{b['best_s'] / a['best_s']:>8.2f}")


if __name__ == "__main__":
    main()
