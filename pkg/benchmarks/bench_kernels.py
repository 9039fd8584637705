"""Compare the numba and numpy cell-sum kernels.

    python benchmarks/bench_kernels.py [--levels 6 8 10] [--repeat 5]

Part one times a single level sum through both kernels in-process.  Part two
runs a full ``eval_extension`` in fresh interpreters with ``LIOUVILLE_NUMBA``
set to 1 and 0, so the flag is honoured exactly as in production.
"""
import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np

from liouville import _kernels
from liouville.currents import partition_box
from liouville.families import PowerStretchFamily
from liouville.holder import bump
from liouville.projective import GeodesicBox

BOX = GeodesicBox(0, 1, 2, 3)

E2E = """
import json, time
from liouville import _kernels
from liouville.engine import EvalParams, eval_extension
from liouville.errors import ToleranceNotReached
from liouville.families import PowerStretchFamily
from liouville.holder import bump
from liouville.projective import GeodesicBox
xi, fam = bump(GeodesicBox(0, 1, 2, 3)), PowerStretchFamily()
eval_extension(xi, None, fam, 0.1 + 0.1j, EvalParams(n_min=2, n_max=2, tolerance=1.0))  # warm up
t0 = time.perf_counter()
try:
    # an unreachable tolerance forces every level up to n_max
    eval_extension(xi, None, fam, 0.1 + 0.1j, EvalParams(n_max={n}, tolerance=1e-300))
except ToleranceNotReached:
    pass
print(json.dumps({{"backend": _kernels.backend(), "seconds": time.perf_counter() - t0}}))
"""


def level_inputs(n, t=0.1 + 0.1j):
    p = partition_box(BOX, n)
    fam = PowerStretchFamily()
    za, wa = fam.apply_h(t, p.za, p.wa)
    zc, wc = fam.apply_h(t, p.zc, p.wc)
    m = 2 ** n
    s = np.arange(1, m + 1) / m
    vals = np.ascontiguousarray(bump(BOX).profile_grid(s, s))
    return [np.ascontiguousarray(a, dtype=complex) for a in (za, wa, zc, wc)], vals


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--levels", type=int, nargs="+", default=[6, 8, 10])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--e2e-level", type=int, default=10)
    args = ap.parse_args(argv)
    if _kernels.block_sum_numba is None:
        sys.exit("numba is not installed")

    print(f"{'level':>5} {'cells':>9} {'numpy s':>10} {'numba s':>10} {'speedup':>8} {'|diff|':>9}")
    for n in args.levels:
        (za, wa, zc, wc), vals = level_inputs(n)
        _kernels.block_sum_numba(za, wa, zc, wc, 0, vals[:1], 0.0, 0.0)  # compile
        t_np, a = best_of(lambda: _kernels.block_sum_numpy(za, wa, zc, wc, 0, vals, 0.0, 0.0), args.repeat)
        t_nb, b = best_of(lambda: _kernels.block_sum_numba(za, wa, zc, wc, 0, vals, 0.0, 0.0), args.repeat)
        print(f"{n:5d} {vals.size:9d} {t_np:10.4f} {t_nb:10.4f} {t_np / t_nb:8.1f} {abs(a[0] - b[0]):9.1e}")

    print(f"\nend to end, levels 0..{args.e2e_level}, fresh interpreter per backend")
    for flag in ("0", "1"):
        env = dict(os.environ, LIOUVILLE_NUMBA=flag)
        out = subprocess.run([sys.executable, "-c", E2E.format(n=args.e2e_level)], env=env,
                             capture_output=True, text=True, check=True)
        r = json.loads(out.stdout)
        print(f"  LIOUVILLE_NUMBA={flag}: {r['backend']:6s} {r['seconds']:.3f} s")


if __name__ == "__main__":
    main()
