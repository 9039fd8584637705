import json
import os
import subprocess
import sys

import numpy as np
import pytest

from liouville import _kernels
from liouville.currents import partition_box
from liouville.families import PowerStretchFamily
from liouville.projective import GeodesicBox

pytestmark = pytest.mark.skipif(_kernels.block_sum_numba is None, reason="numba unavailable")


def _level(n, t=0.2 + 0.1j):
    p = partition_box(GeodesicBox(0, 1, 2, 3), n)
    fam = PowerStretchFamily()
    za, wa = fam.apply_h(t, p.za, p.wa)
    zc, wc = fam.apply_h(t, p.zc, p.wc)
    dza, dwa = fam.boundary_dt(t, p.za, p.wa)
    dzc, dwc = fam.boundary_dt(t, p.zc, p.wc)
    arrs = [np.ascontiguousarray(a, dtype=complex) for a in (za, wa, zc, wc, dza, dwa, dzc, dwc)]
    return arrs


@pytest.mark.parametrize("n", [2, 5, 7])
def test_sum_kernels_agree(n):
    za, wa, zc, wc, *_ = _level(n)
    m = 2 ** n
    rng = np.random.default_rng(n)
    vals = rng.normal(size=(m // 2, m)) + 1j * rng.normal(size=(m // 2, m))
    a = _kernels.block_sum_numpy(za, wa, zc, wc, m // 4, vals, 0.0, 1e-300)
    b = _kernels.block_sum_numba(za, wa, zc, wc, m // 4, vals, 0.0, 1e-300)
    assert a[1:] == b[1:] == (-1, -1, 0)
    assert abs(a[0] - b[0]) <= 1e-13 * np.abs(vals).sum()


@pytest.mark.parametrize("n", [2, 6])
def test_derivative_kernels_agree(n):
    za, wa, zc, wc, dza, dwa, dzc, dwc = _level(n)
    m = 2 ** n
    vals = np.ones((m, m))
    a = _kernels.block_dsum_numpy(za, wa, dza, dwa, zc, wc, dzc, dwc, 0, vals, 0.0, 0.0)
    b = _kernels.block_dsum_numba(za, wa, dza, dwa, zc, wc, dzc, dwc, 0, vals, 0.0, 0.0)
    assert a[1:] == b[1:]
    assert abs(a[0] - b[0]) <= 1e-13 * m * m


def test_status_codes_agree():
    za, wa, zc, wc, *_ = _level(2)
    vals = np.ones((4, 4))
    for guard in (0.5, 1e-3):
        a = _kernels.block_sum_numpy(za, wa, zc, wc, 0, vals, guard, 0.0)
        b = _kernels.block_sum_numba(za, wa, zc, wc, 0, vals, guard, 0.0)
        assert a[1:] == b[1:]
    assert a[3] == _kernels.GUARD
    # folding the boundary reverses part of one side: cells cross the branch cut
    p = partition_box(GeodesicBox(0, 1, 2, 3), 1)
    fold = [np.ascontiguousarray(v) for v in ((p.za - 1.5 * p.wa) ** 2, p.wa ** 2, (p.zc - 1.5 * p.wc) ** 2, p.wc ** 2)]
    a = _kernels.block_sum_numpy(*fold, 0, np.ones((2, 2)), 0.0, 0.0)
    b = _kernels.block_sum_numba(*fold, 0, np.ones((2, 2)), 0.0, 0.0)
    assert a[1:] == b[1:] and a[3] == _kernels.BRANCH_CUT
    zc2 = zc.copy()
    zc2[1] = zc2[0]
    wc2 = wc.copy()
    wc2[1] = wc2[0]
    a = _kernels.block_sum_numpy(za, wa, zc2, wc2, 0, vals, 0.0, 0.0)
    b = _kernels.block_sum_numba(za, wa, zc2, wc2, 0, vals, 0.0, 0.0)
    assert a[1:] == b[1:] and a[3] == _kernels.DEGENERATE


SNIPPET = """
import json
from liouville import _kernels
from liouville.engine import EvalParams, eval_extension
from liouville.families import PowerStretchFamily
from liouville.holder import bump
from liouville.projective import GeodesicBox
v, tr = eval_extension(bump(GeodesicBox(0, 1, 2, 3)), None, PowerStretchFamily(), 0.1 + 0.2j, EvalParams(n_min=8))
print(json.dumps({"backend": _kernels.backend(), "re": v.real, "im": v.imag, "levels": tr.n_levels}))
"""


def _run(flag):
    env = dict(os.environ, LIOUVILLE_NUMBA=flag)
    out = subprocess.run([sys.executable, "-c", SNIPPET], env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout)


def test_env_flag_selects_backend_and_results_match():
    a, b = _run("0"), _run("1")
    assert a["backend"] == "numpy" and b["backend"] == "numba"
    assert _run("off")["backend"] == "numpy"
    assert a["levels"] == b["levels"]
    assert abs(complex(a["re"], a["im"]) - complex(b["re"], b["im"])) <= 1e-12
