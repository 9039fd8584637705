"""Liouville measure of geodesic boxes and their controlled dyadic partitions."""
from __future__ import annotations

import math

import numpy as np

from .errors import BranchViolation, DegenerateBox, LevelTooDeep
from .projective import (DEFAULT_Z0, GeodesicBox, MobiusTransform, boundary_angle,
                         cr_minus_one, log1p_complex, mobius_through)

MAX_LEVEL = 16
SCHEMES = ("normalized", "angle")


def liouville_box_measure(box: GeodesicBox) -> float:
    """``log cr(a, b, c, d)``, the Liouville mass of ``[a,b] x [c,d]``."""
    if not isinstance(box, GeodesicBox):
        box = GeodesicBox(*box)
    return box.measure


def c_star(L):
    """``1/(2 e^L - 1)``: the normalised box ``[-1,0] x [c*,1]`` has mass ``L``."""
    return 1.0 / (2.0 * math.expm1(L) + 1.0)


def partition_constant(cs):
    """``(1 - c*)/c*^2``: level-n cells of the normalised partition have mass
    at most this times ``4**-n``."""
    return (1.0 - cs) / (cs * cs)


def normalize_box(box: GeodesicBox):
    """Real ``g`` with ``g([a,b] x [c,d]) = [-1,0] x [c*,1]``, and ``c*``."""
    if not isinstance(box, GeodesicBox):
        box = GeodesicBox(*box)
    u = cr_minus_one(*box.points).real
    if not u > 0:
        raise DegenerateBox("box has no mass")
    cs = 1.0 / (1.0 + 2.0 * u)
    g = mobius_through(box.a, box.b, box.c, -1.0, 0.0, cs)
    if not g.preserves_orientation():
        raise DegenerateBox("normalising transform is not in PSL2(R)")
    # strip the round-off imaginary parts
    g = MobiusTransform(g.matrix.real)
    return g, cs


def homogeneous_image(m: MobiusTransform, x):
    """Image of real values ``x`` under ``m`` as unit-norm homogeneous arrays."""
    x = np.asarray(x, dtype=float)
    (a, b), (c, d) = m.matrix
    z = a * x + b
    w = c * x + d
    n = np.sqrt(np.abs(z) ** 2 + np.abs(w) ** 2)
    return z / n, w / n


def _real_rep(z, w):
    # (z, w) on the real circle -> real unit-norm representative
    zr = (z * np.conj(w)).real
    wr = (w * np.conj(w)).real
    zr = np.where(wr == 0, np.abs(z) ** 2, zr)
    n = np.hypot(zr, wr)
    return (zr / n).astype(complex), (wr / n).astype(complex)


def angle_points(theta, z0=DEFAULT_Z0):
    """Boundary points whose angle seen from ``z0`` is ``theta``."""
    e = np.exp(1j * np.asarray(theta, dtype=float))
    z0 = complex(z0)
    return _real_rep(z0 - np.conj(z0) * e, 1.0 - e)


class BoxPartition:
    """Level-n partition ``a_0..a_{2^n}`` of ``[a,b]`` and ``c_0..c_{2^n}`` of ``[c,d]``.

    ``scheme="normalized"`` splits the normalised box ``[-1,0] x [c*,1]``
    uniformly; ``scheme="angle"`` splits both arcs into pieces of equal
    angle seen from ``z0``.
    """

    def __init__(self, box: GeodesicBox, n: int, scheme="normalized", z0=DEFAULT_Z0):
        if not isinstance(box, GeodesicBox):
            box = GeodesicBox(*box)
        n = int(n)
        if n < 0 or n > MAX_LEVEL:
            raise LevelTooDeep(f"level {n} outside 0..{MAX_LEVEL}")
        if scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {scheme!r}")
        self.box, self.n, self.scheme, self.z0 = box, n, scheme, z0
        self.gamma, self.c_star = normalize_box(box)
        s = np.arange(2 ** n + 1) / 2 ** n
        if scheme == "normalized":
            ginv = self.gamma.inverse()
            self.za, self.wa = homogeneous_image(ginv, -1.0 + s)
            self.zc, self.wc = homogeneous_image(ginv, self.c_star + (1.0 - self.c_star) * s)
        else:
            self.za, self.wa = self._angle_side(box.a, box.b, s)
            self.zc, self.wc = self._angle_side(box.c, box.d, s)
        # exact corners
        for arr_z, arr_w, p0, p1 in ((self.za, self.wa, box.a, box.b), (self.zc, self.wc, box.c, box.d)):
            for k, p in ((0, p0), (-1, p1)):
                nz = math.hypot(abs(p.z), abs(p.w))
                arr_z[k], arr_w[k] = p.z / nz, p.w / nz

    def _angle_side(self, p, q, s):
        t0 = boundary_angle(p, self.z0)
        span = (boundary_angle(q, self.z0) - t0) % (2 * math.pi)
        return angle_points(t0 + span * s, self.z0)

    @property
    def constant(self):
        return partition_constant(self.c_star)

    @property
    def bound(self):
        return self.constant * 4.0 ** -self.n

    def a_values(self):
        with np.errstate(divide="ignore"):
            return np.where(self.wa == 0, np.inf, (self.za / np.where(self.wa == 0, 1, self.wa)).real)

    def c_values(self):
        with np.errstate(divide="ignore"):
            return np.where(self.wc == 0, np.inf, (self.zc / np.where(self.wc == 0, 1, self.wc)).real)

    def refine(self):
        return BoxPartition(self.box, self.n + 1, self.scheme, self.z0)

    def __repr__(self):
        return f"BoxPartition({self.box!r}, n={self.n}, scheme={self.scheme!r})"


def partition_box(box, n, scheme="normalized", z0=DEFAULT_Z0) -> BoxPartition:
    return BoxPartition(box, n, scheme, z0)


def family_map(fam, t):
    """Homogeneous boundary map of ``f^t``."""
    return lambda z, w: fam.apply_h(t, z, w)


def cell_u_row(za, wa, zc, wc, i):
    """``cr - 1`` of the cells in row ``i`` (1-based)."""
    A = za[i - 1] * wa[i] - za[i] * wa[i - 1]
    C = zc[:-1] * wc[1:] - zc[1:] * wc[:-1]
    X = za[i - 1] * wc[1:] - zc[1:] * wa[i - 1]
    Y = za[i] * wc[:-1] - zc[:-1] * wa[i]
    return A * C / (X * Y)


def _mapped(p: BoxPartition, boundary_map):
    if boundary_map is None:
        return p.za, p.wa, p.zc, p.wc
    za, wa = boundary_map(p.za, p.wa)
    zc, wc = boundary_map(p.zc, p.wc)
    return (np.asarray(za, complex), np.asarray(wa, complex),
            np.asarray(zc, complex), np.asarray(wc, complex))


def cell_measures(p: BoxPartition, boundary_map=None, guard=1.0, skip_tol=1e-14):
    """Stream ``log cr`` of the image of every cell, row by row.

    ``boundary_map`` takes and returns homogeneous arrays.  At levels
    ``n >= 2`` a cell with ``|cr - 1| >= guard`` raises
    :class:`BranchViolation`; so does ``Re cr <= 0`` at any level.
    """
    za, wa, zc, wc = _mapped(p, boundary_map)
    for i in range(1, 2 ** p.n + 1):
        u = cell_u_row(za, wa, zc, wc, i)
        bad = np.flatnonzero(1.0 + u.real <= 0)
        if bad.size:
            raise BranchViolation("cross-ratio crossed the branch cut", p.n, (i, int(bad[0]) + 1))
        if p.n >= 2 and guard is not None:
            bad = np.flatnonzero(np.abs(u) >= guard)
            if bad.size:
                raise BranchViolation(f"|cr - 1| >= {guard}", p.n, (i, int(bad[0]) + 1))
        vals = log1p_complex(u)
        vals = np.where(np.abs(u) < skip_tol, 0.0, vals)
        yield from vals.tolist()


def cell_measure_array(p: BoxPartition, boundary_map=None, guard=1.0):
    """All cell masses as a ``2^n x 2^n`` array (small levels only)."""
    if p.n > 10:
        raise LevelTooDeep("use cell_measures to stream levels above 10")
    m = 2 ** p.n
    return np.fromiter(cell_measures(p, boundary_map, guard), dtype=complex, count=m * m).reshape(m, m)
