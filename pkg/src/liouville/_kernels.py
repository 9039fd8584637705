"""Hot inner loops of the dyadic cell sums.

Every kernel exists twice: a numba ``@njit`` version and a pure-numpy
version with identical semantics.  The numba path is used when numba imports
and ``LIOUVILLE_NUMBA`` is not set to ``0``/``false``/``off``.

Conventions shared by both paths.  A level-n partition of a box is given by
two arrays of homogeneous boundary points ``(za, wa)`` and ``(zc, wc)`` of
length ``2**n + 1``.  Cell ``(i, j)`` (1-based) has corners
``a[i-1], a[i], c[j-1], c[j]`` and

    u_ij = det(a[i-1], a[i]) det(c[j-1], c[j]) / (det(a[i-1], c[j]) det(a[i], c[j-1]))

is ``cr - 1`` of the cell.  ``vals`` holds the weights for a block of rows
``i0 + 1 .. i0 + B``.

Status codes returned with each sum: 0 ok, 1 cross-ratio crossed the branch
cut ``Re(cr) <= 0``, 2 ``|cr - 1| >= guard``, 3 degenerate cell.
"""
import os

import numpy as np

_flag = os.environ.get("LIOUVILLE_NUMBA", "1").strip().lower()
USE_NUMBA = _flag not in ("0", "false", "no", "off")

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    USE_NUMBA = False

OK, BRANCH_CUT, GUARD, DEGENERATE = 0, 1, 2, 3


# ---------------------------------------------------------------- numpy path

def _log1p_np(u):
    ur = u.real
    ui = u.imag
    re = 0.5 * np.log1p(2.0 * ur + ur * ur + ui * ui)
    im = np.arctan2(ui, 1.0 + ur)
    return re + 1j * im


def _cell_u_np(za, wa, zc, wc, i0, nrows):
    ap_z = za[i0:i0 + nrows, None]
    ap_w = wa[i0:i0 + nrows, None]
    ac_z = za[i0 + 1:i0 + nrows + 1, None]
    ac_w = wa[i0 + 1:i0 + nrows + 1, None]
    cp_z = zc[None, :-1]
    cp_w = wc[None, :-1]
    cc_z = zc[None, 1:]
    cc_w = wc[None, 1:]
    A = ap_z * ac_w - ac_z * ap_w
    C = cp_z * cc_w - cc_z * cp_w
    X = ap_z * cc_w - cc_z * ap_w
    Y = ac_z * cp_w - cp_z * ac_w
    return A, C, X, Y


def _first_bad(mask):
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        return -1, -1
    r, c = np.unravel_index(idx[0], mask.shape)
    return int(r), int(c)


def block_sum_numpy(za, wa, zc, wc, i0, vals, guard, skip_tol):
    nrows = vals.shape[0]
    A, C, X, Y = _cell_u_np(za, wa, zc, wc, i0, nrows)
    den = X * Y
    if np.any(den == 0) or np.any(A == 0) or np.any(C == 0):
        r, c = _first_bad((den == 0) | (A == 0) | (C == 0))
        return 0j, i0 + r + 1, c + 1, DEGENERATE
    u = A * C / den
    bad = (1.0 + u.real) <= 0.0
    if bad.any():
        r, c = _first_bad(bad)
        return 0j, i0 + r + 1, c + 1, BRANCH_CUT
    if guard > 0.0:
        bad = np.abs(u) >= guard
        if bad.any():
            r, c = _first_bad(bad)
            return 0j, i0 + r + 1, c + 1, GUARD
    terms = vals * _log1p_np(u)
    if skip_tol > 0.0:
        terms = np.where(np.abs(u) < skip_tol, 0.0, terms)
    total = complex(np.sum(np.sum(terms, axis=1)))
    return total, -1, -1, OK


def block_dsum_numpy(za, wa, dza, dwa, zc, wc, dzc, dwc, i0, vals, guard, skip_tol):
    nrows = vals.shape[0]
    A, C, X, Y = _cell_u_np(za, wa, zc, wc, i0, nrows)
    den = X * Y
    if np.any(den == 0) or np.any(A == 0) or np.any(C == 0):
        r, c = _first_bad((den == 0) | (A == 0) | (C == 0))
        return 0j, i0 + r + 1, c + 1, DEGENERATE
    u = A * C / den
    bad = (1.0 + u.real) <= 0.0
    if bad.any():
        r, c = _first_bad(bad)
        return 0j, i0 + r + 1, c + 1, BRANCH_CUT
    if guard > 0.0:
        bad = np.abs(u) >= guard
        if bad.any():
            r, c = _first_bad(bad)
            return 0j, i0 + r + 1, c + 1, GUARD
    ap_z = za[i0:i0 + nrows, None]
    ap_w = wa[i0:i0 + nrows, None]
    ac_z = za[i0 + 1:i0 + nrows + 1, None]
    ac_w = wa[i0 + 1:i0 + nrows + 1, None]
    dap_z = dza[i0:i0 + nrows, None]
    dap_w = dwa[i0:i0 + nrows, None]
    dac_z = dza[i0 + 1:i0 + nrows + 1, None]
    dac_w = dwa[i0 + 1:i0 + nrows + 1, None]
    cp_z, cp_w = zc[None, :-1], wc[None, :-1]
    cc_z, cc_w = zc[None, 1:], wc[None, 1:]
    dcp_z, dcp_w = dzc[None, :-1], dwc[None, :-1]
    dcc_z, dcc_w = dzc[None, 1:], dwc[None, 1:]
    dA = dap_z * ac_w + ap_z * dac_w - dac_z * ap_w - ac_z * dap_w
    dC = dcp_z * cc_w + cp_z * dcc_w - dcc_z * cp_w - cc_z * dcp_w
    dX = dap_z * cc_w + ap_z * dcc_w - dcc_z * ap_w - cc_z * dap_w
    dY = dac_z * cp_w + ac_z * dcp_w - dcp_z * ac_w - cp_z * dac_w
    s = dA / A + dC / C - dX / X - dY / Y
    terms = vals * (u / (1.0 + u)) * s
    if skip_tol > 0.0:
        terms = np.where(np.abs(u) < skip_tol, 0.0, terms)
    return complex(np.sum(np.sum(terms, axis=1))), -1, -1, OK


# ---------------------------------------------------------------- numba path

if numba is not None:

    @numba.njit(cache=True, nogil=True)
    def _log1p_nb(u):
        ur = u.real
        ui = u.imag
        re = 0.5 * np.log1p(2.0 * ur + ur * ur + ui * ui)
        im = np.arctan2(ui, 1.0 + ur)
        return complex(re, im)

    @numba.njit(cache=True, nogil=True)
    def block_sum_numba(za, wa, zc, wc, i0, vals, guard, skip_tol):
        nrows, ncols = vals.shape
        C = np.empty(ncols, dtype=np.complex128)
        for j in range(ncols):
            C[j] = zc[j] * wc[j + 1] - zc[j + 1] * wc[j]
        total = 0j
        for r in range(nrows):
            i = i0 + r
            apz = za[i]
            apw = wa[i]
            acz = za[i + 1]
            acw = wa[i + 1]
            A = apz * acw - acz * apw
            row = 0j
            for j in range(ncols):
                X = apz * wc[j + 1] - zc[j + 1] * apw
                Y = acz * wc[j] - zc[j] * acw
                den = X * Y
                if den == 0 or A == 0 or C[j] == 0:
                    return 0j, i + 1, j + 1, 3
                u = A * C[j] / den
                if 1.0 + u.real <= 0.0:
                    return 0j, i + 1, j + 1, 1
                au = abs(u)
                if guard > 0.0 and au >= guard:
                    return 0j, i + 1, j + 1, 2
                if au < skip_tol:
                    continue
                row += vals[r, j] * _log1p_nb(u)
            total += row
        return total, -1, -1, 0

    @numba.njit(cache=True, nogil=True)
    def block_dsum_numba(za, wa, dza, dwa, zc, wc, dzc, dwc, i0, vals, guard, skip_tol):
        nrows, ncols = vals.shape
        C = np.empty(ncols, dtype=np.complex128)
        dCC = np.empty(ncols, dtype=np.complex128)
        for j in range(ncols):
            C[j] = zc[j] * wc[j + 1] - zc[j + 1] * wc[j]
            dCC[j] = (dzc[j] * wc[j + 1] + zc[j] * dwc[j + 1]
                      - dzc[j + 1] * wc[j] - zc[j + 1] * dwc[j])
        total = 0j
        for r in range(nrows):
            i = i0 + r
            apz, apw, acz, acw = za[i], wa[i], za[i + 1], wa[i + 1]
            dapz, dapw, dacz, dacw = dza[i], dwa[i], dza[i + 1], dwa[i + 1]
            A = apz * acw - acz * apw
            dA = dapz * acw + apz * dacw - dacz * apw - acz * dapw
            row = 0j
            for j in range(ncols):
                X = apz * wc[j + 1] - zc[j + 1] * apw
                Y = acz * wc[j] - zc[j] * acw
                den = X * Y
                if den == 0 or A == 0 or C[j] == 0:
                    return 0j, i + 1, j + 1, 3
                u = A * C[j] / den
                if 1.0 + u.real <= 0.0:
                    return 0j, i + 1, j + 1, 1
                au = abs(u)
                if guard > 0.0 and au >= guard:
                    return 0j, i + 1, j + 1, 2
                if au < skip_tol:
                    continue
                dX = dapz * wc[j + 1] + apz * dwc[j + 1] - dzc[j + 1] * apw - zc[j + 1] * dapw
                dY = dacz * wc[j] + acz * dwc[j] - dzc[j] * acw - zc[j] * dacw
                s = dA / A + dCC[j] / C[j] - dX / X - dY / Y
                row += vals[r, j] * (u / (1.0 + u)) * s
            total += row
        return total, -1, -1, 0

else:  # pragma: no cover
    block_sum_numba = None
    block_dsum_numba = None


def block_sum(za, wa, zc, wc, i0, vals, guard, skip_tol):
    if USE_NUMBA:
        return block_sum_numba(za, wa, zc, wc, i0, vals, guard, skip_tol)
    return block_sum_numpy(za, wa, zc, wc, i0, vals, guard, skip_tol)


def block_dsum(za, wa, dza, dwa, zc, wc, dzc, dwc, i0, vals, guard, skip_tol):
    if USE_NUMBA:
        return block_dsum_numba(za, wa, dza, dwa, zc, wc, dzc, dwc, i0, vals, guard, skip_tol)
    return block_dsum_numpy(za, wa, dza, dwa, zc, wc, dzc, dwc, i0, vals, guard, skip_tol)


def backend():
    return "numba" if USE_NUMBA else "numpy"
