"""Hölder test functions supported in a geodesic box and their step
approximations.

A test function is stored as a box together with a profile on the unit
square: ``xi(x, y) = profile(s1, s2)`` where ``s1 = g(x) + 1`` and
``s2 = (g(y) - c*) / (1 - c*)`` are the coordinates of the normalised box
``[-1, 0] x [c*, 1]`` and ``g`` is the normalising transform.  Distances
between geodesics are ``max`` of the angle distances of the endpoints seen
from ``z0 = i``.
"""
from __future__ import annotations

import math

import numpy as np

from .currents import BoxPartition, angle_points, normalize_box
from .errors import LevelTooDeep
from .projective import DEFAULT_Z0, GeodesicBox, MobiusTransform

MAX_STEP_LEVEL = 12


# ------------------------------------------------------------------ profiles

class Profile:
    """A function on ``[0, 1]^2`` vanishing on the boundary of the square."""
    lam = 1.0
    slope = math.inf     # Lipschitz bound in s of the un-powered 1d factor

    def grid(self, s1, s2):
        """Values on the outer grid ``s1[:, None], s2[None, :]``."""
        raise NotImplementedError

    def __call__(self, s1, s2):
        raise NotImplementedError


class _Separable(Profile):
    def factor(self, s):
        raise NotImplementedError

    def grid(self, s1, s2):
        return np.outer(self.factor(s1), self.factor(s2)).astype(complex)

    def __call__(self, s1, s2):
        return (self.factor(s1) * self.factor(s2)).astype(complex)


class BumpProfile(_Separable):
    """``h(s1) h(s2)`` with ``h(s) = clamp(4 min(s, 1-s), 0, 1) ** lam``."""
    kind = "bump"
    slope = 4.0
    breaks = (0.25, 0.75)

    def __init__(self, lam=1.0):
        self.lam = float(lam)

    def factor(self, s):
        s = np.asarray(s, dtype=float)
        g = np.clip(4.0 * np.minimum(s, 1.0 - s), 0.0, 1.0)
        return g if self.lam == 1.0 else g ** self.lam


class ProductProfile(_Separable):
    """``(sin(pi s1) sin(pi s2)) ** lam`` on the square, zero outside."""
    kind = "product"
    slope = math.pi

    def __init__(self, lam=1.0):
        self.lam = float(lam)

    def factor(self, s):
        s = np.asarray(s, dtype=float)
        inside = (s >= 0) & (s <= 1)
        g = np.where(inside, np.sin(math.pi * np.clip(s, 0, 1)), 0.0)
        g = np.maximum(g, 0.0)
        return g if self.lam == 1.0 else g ** self.lam


class StepProfile(Profile):
    """Indicator of the closed box (not Hölder; engine-internal)."""
    kind = "step"

    def __init__(self):
        self.lam = 1.0

    def grid(self, s1, s2):
        a = ((s1 >= 0) & (s1 <= 1)).astype(float)
        b = ((s2 >= 0) & (s2 <= 1)).astype(float)
        return np.outer(a, b).astype(complex)

    def __call__(self, s1, s2):
        return (((s1 >= 0) & (s1 <= 1)) & ((s2 >= 0) & (s2 <= 1))).astype(complex)


class TableProfile(Profile):
    """Bilinear interpolation of an ``(m+1) x (m+1)`` table on the square.

    The table must vanish on the boundary rows and columns.
    """
    kind = "table"

    def __init__(self, values, lam=1.0):
        v = np.array(values, dtype=complex)
        if v.ndim != 2 or v.shape[0] != v.shape[1] or v.shape[0] < 3:
            raise ValueError("table must be square with at least 3 rows")
        if np.any(v[0] != 0) or np.any(v[-1] != 0) or np.any(v[:, 0] != 0) or np.any(v[:, -1] != 0):
            raise ValueError("table must vanish on the boundary of the square")
        self.values = v
        self.m = v.shape[0] - 1
        self.lam = float(lam)
        self.breaks = tuple(np.arange(1, self.m) / self.m)

    def __call__(self, s1, s2):
        s1 = np.asarray(s1, dtype=float)
        s2 = np.asarray(s2, dtype=float)
        inside = (s1 >= 0) & (s1 <= 1) & (s2 >= 0) & (s2 <= 1)
        u = np.clip(s1, 0, 1) * self.m
        v = np.clip(s2, 0, 1) * self.m
        i = np.minimum(np.floor(u).astype(int), self.m - 1)
        j = np.minimum(np.floor(v).astype(int), self.m - 1)
        fu, fv = u - i, v - j
        t = self.values
        val = ((1 - fu) * (1 - fv) * t[i, j] + fu * (1 - fv) * t[i + 1, j]
               + (1 - fu) * fv * t[i, j + 1] + fu * fv * t[i + 1, j + 1])
        return np.where(inside, val, 0.0)

    def grid(self, s1, s2):
        return self(np.asarray(s1)[:, None], np.asarray(s2)[None, :])

    def slopes(self):
        t = self.values
        lx = np.abs(np.diff(t, axis=0)).max() * self.m
        ly = np.abs(np.diff(t, axis=1)).max() * self.m
        return lx, ly


# ------------------------------------------------------------------ geometry

class _Side:
    """Angle coordinate along one side of a box as a function of ``s``."""

    def __init__(self, m: np.ndarray, z0=DEFAULT_Z0):
        # m: real 2x2 matrix with x = m(s); q: Cayley map x -> (x - z0)/(x - conj z0)
        q = np.array([[1.0, -z0], [1.0, -np.conj(z0)]], dtype=complex)
        self.m = m
        self.n = q @ m
        self.z0 = z0

    def point(self, s):
        s = np.asarray(s, dtype=float)
        z = self.m[0, 0] * s + self.m[0, 1]
        w = self.m[1, 0] * s + self.m[1, 1]
        nrm = np.hypot(z, w)
        return (z / nrm).astype(complex), (w / nrm).astype(complex)

    def theta(self, s):
        (a, b), (c, d) = self.n
        s = np.asarray(s, dtype=float)
        return np.mod(np.angle((a * s + b) / (c * s + d)), 2 * np.pi)

    def dtheta(self, s):
        """``d theta / ds`` (positive for a positively oriented side)."""
        (a, b), (c, d) = self.n
        s = np.asarray(s, dtype=float)
        return np.abs(((a * d - b * c) / ((a * s + b) * (c * s + d))).imag)

    def max_ds_dtheta(self):
        # theta' = 2 Im p / |s - p|^2 for some p in H, so its minimum over
        # [0, 1] sits at an endpoint
        return float(1.0 / min(self.dtheta(0.0), self.dtheta(1.0)))


def _side_matrices(gamma: MobiusTransform, cs):
    ginv = gamma.inverse().matrix.real
    m1 = ginv @ np.array([[1.0, -1.0], [0.0, 1.0]])
    m2 = ginv @ np.array([[1.0 - cs, cs], [0.0, 1.0]])
    return m1, m2


# ------------------------------------------------------------------ functions

class HolderFunction:
    """``sum_k coef_k * profile_k`` pulled back to a geodesic box.

    ``lam`` is the Hölder exponent (the smallest of the terms) and
    ``constant`` a declared upper bound for the Hölder constant in the angle
    metric.
    """

    def __init__(self, box: GeodesicBox, terms, z0=DEFAULT_Z0):
        if not isinstance(box, GeodesicBox):
            box = GeodesicBox(*box)
        self.box = box
        self.terms = tuple((complex(c), p) for c, p in terms)
        self.z0 = z0
        self.gamma, self.c_star = normalize_box(box)
        m1, m2 = _side_matrices(self.gamma, self.c_star)
        self.side1, self.side2 = _Side(m1, z0), _Side(m2, z0)
        self.lam = min((p.lam for _, p in self.terms), default=1.0)
        self.constant = self._constant()

    # construction helpers --------------------------------------------
    @property
    def kind(self):
        kinds = {p.kind for _, p in self.terms}
        return kinds.pop() if len(kinds) == 1 and len(self.terms) == 1 else "sum"

    def __add__(self, other):
        if not isinstance(other, HolderFunction):
            return NotImplemented
        if not self.box == other.box:
            raise ValueError("sums need a common support box")
        return HolderFunction(self.box, self.terms + other.terms, self.z0)

    def __mul__(self, alpha):
        return HolderFunction(self.box, [(alpha * c, p) for c, p in self.terms], self.z0)

    __rmul__ = __mul__

    def compose(self, m: MobiusTransform):
        """``xi o m``: supported in ``m^{-1}(box)`` with the same profile."""
        return HolderFunction(self.box.moved(m.inverse()), self.terms, self.z0)

    # constants ---------------------------------------------------------
    def _profile_constant(self, p: Profile):
        l1 = self.side1.max_ds_dtheta()
        l2 = self.side2.max_ds_dtheta()
        if isinstance(p, StepProfile):
            return math.inf
        if isinstance(p, TableProfile):
            sx, sy = p.slopes()
            lip = sx * l1 + sy * l2
            sup = np.abs(p.values).max()
            return (2 * sup) ** (1 - p.lam) * lip ** p.lam
        if p.lam < 1:
            return (p.slope * l1) ** p.lam + (p.slope * l2) ** p.lam
        if isinstance(p, BumpProfile):
            # |d xi/d theta1| + |d xi/d theta2| is convex along each ramp, so
            # its sup sits at a ramp end
            a = {s: 4.0 / self.side1.dtheta(s) for s in (0.0, 0.25, 0.75, 1.0)}
            b = {s: 4.0 / self.side2.dtheta(s) for s in (0.0, 0.25, 0.75, 1.0)}
            inner = max(a[0.25], a[0.75]) + max(b[0.25], b[0.75])
            return float(max(inner, a[0.0], a[1.0], b[0.0], b[1.0]))
        # smooth separable profile, lam = 1: sup on a fine grid with a small margin
        s = np.linspace(0.0, 1.0, 2049)
        f = p.factor(s)
        df = np.abs(np.gradient(f, s, edge_order=2))
        g1 = df / self.side1.dtheta(s)
        g2 = df / self.side2.dtheta(s)
        sup = np.max(g1[:, None] * f[None, :] + f[:, None] * g2[None, :])
        return float(sup) * (1 + 1e-4)

    def _constant(self):
        total = 0.0
        for c, p in self.terms:
            k = self._profile_constant(p)
            if k == 0 or c == 0:
                continue
            total += abs(c) * k * math.pi ** (p.lam - self.lam)
        return total

    # evaluation --------------------------------------------------------
    def normalized(self, z, w):
        """Normalised coordinates of homogeneous boundary points (``nan`` off
        the side)."""
        (a, b), (c, d) = self.gamma.matrix.real
        z = np.asarray(z)
        w = np.asarray(w)
        zz = a * z + b * w
        ww = c * z + d * w
        with np.errstate(divide="ignore", invalid="ignore"):
            v = np.where(ww != 0, (zz / np.where(ww != 0, ww, 1)).real, np.nan)
        return v

    def s_coords(self, zx, wx, zy, wy):
        g1 = self.normalized(zx, wx)
        g2 = self.normalized(zy, wy)
        s1 = g1 + 1.0
        s2 = (g2 - self.c_star) / (1.0 - self.c_star)
        eps = 1e-13
        ok = (s1 >= -eps) & (s1 <= 1 + eps) & (s2 >= -eps) & (s2 <= 1 + eps)
        return np.clip(s1, 0, 1), np.clip(s2, 0, 1), ok

    def eval_h(self, zx, wx, zy, wy):
        s1, s2, ok = self.s_coords(zx, wx, zy, wy)
        s1 = np.where(ok, s1, 0.0)
        s2 = np.where(ok, s2, 0.0)
        return np.where(ok, self.profile_values(s1, s2), 0.0)

    def profile_values(self, s1, s2):
        out = np.zeros(np.broadcast(s1, s2).shape, dtype=complex)
        for c, p in self.terms:
            out = out + c * p(s1, s2)
        return out

    def profile_grid(self, s1, s2):
        out = np.zeros((len(s1), len(s2)), dtype=complex)
        for c, p in self.terms:
            out += c * p.grid(s1, s2)
        return out

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        zx, wx = np.where(np.isinf(x), 1.0, x), np.where(np.isinf(x), 0.0, 1.0)
        zy, wy = np.where(np.isinf(y), 1.0, y), np.where(np.isinf(y), 0.0, 1.0)
        out = self.eval_h(zx, wx, zy, wy)
        return out[()] if out.ndim == 0 else out

    def sup_norm(self, n=257):
        s = np.linspace(0, 1, n)
        return float(np.abs(self.profile_grid(s, s)).max())

    def center(self):
        """A geodesic in the middle of the support, as real endpoint values."""
        z1, w1 = self.side1.point(0.5)
        z2, w2 = self.side2.point(0.5)
        return (z1 / w1).real, (z2 / w2).real

    def corner_values(self, n, rows=None):
        """``xi(a_i, c_j)`` at the level-n corners, ``i, j = 1..2^n``."""
        s = np.arange(1, 2 ** n + 1) / 2 ** n
        s1 = s if rows is None else s[rows]
        return self.profile_grid(s1, s)

    def __repr__(self):
        return f"HolderFunction({self.kind}, {self.box!r}, lam={self.lam:g}, C={self.constant:.6g})"


def bump(box, lam=1.0, z0=DEFAULT_Z0) -> HolderFunction:
    return HolderFunction(box, [(1.0, BumpProfile(lam))], z0)


def product_bump(box, lam=1.0, z0=DEFAULT_Z0) -> HolderFunction:
    return HolderFunction(box, [(1.0, ProductProfile(lam))], z0)


def step_function(box, z0=DEFAULT_Z0) -> HolderFunction:
    """Indicator of the closed box; its declared constant is infinite."""
    return HolderFunction(box, [(1.0, StepProfile())], z0)


def table_function(box, values, lam=1.0, z0=DEFAULT_Z0) -> HolderFunction:
    return HolderFunction(box, [(1.0, TableProfile(values, lam))], z0)


def zero_function(box, z0=DEFAULT_Z0) -> HolderFunction:
    return HolderFunction(box, [], z0)


# ------------------------------------------------------------------ sampling

CHUNK = 1000


def _theta_point(theta, z0):
    return angle_points(theta, z0)


def holder_constant_estimate(f: HolderFunction, samples=10 ** 4, seed=0):
    """Largest sampled quotient ``|xi(g1) - xi(g2)| / d(g1, g2) ** lam``.

    Pairs come in fixed chunks drawn from per-chunk seeds, so a smaller
    sample is always a prefix of a larger one and the estimate is monotone
    in ``samples``.  Three quarters of the pairs are near-diagonal with
    ``d`` log-uniform in ``[1e-6, 1e-1]``.
    """
    best = 0.0
    done = 0
    k = 0
    while done < samples:
        m = min(CHUNK, samples - done)
        rng = np.random.default_rng([seed, k])
        best = max(best, _chunk_quotient(f, rng, CHUNK)[:m].max(initial=0.0))
        done += m
        k += 1
    return float(best)


def _chunk_quotient(f: HolderFunction, rng, m):
    s1 = rng.uniform(-0.05, 1.05, m)
    s2 = rng.uniform(-0.05, 1.05, m)
    tx = f.side1.theta(s1)
    ty = f.side2.theta(s2)
    d = 10 ** rng.uniform(-6, -1, m)
    # direction on the unit sphere of the max norm
    major = rng.integers(0, 2, m).astype(bool)
    sign = rng.choice([-1.0, 1.0], size=(m, 2))
    other = rng.uniform(-1, 1, m)
    other = np.where(rng.uniform(size=m) < 0.3, np.sign(other), other)
    dx = np.where(major, 1.0, other) * sign[:, 0] * d
    dy = np.where(major, other, 1.0) * sign[:, 1] * d
    tx2 = tx + dx
    ty2 = ty + dy
    far = rng.uniform(size=m) < 0.25
    tx2 = np.where(far, f.side1.theta(rng.uniform(-0.05, 1.05, m)), tx2)
    ty2 = np.where(far, f.side2.theta(rng.uniform(-0.05, 1.05, m)), ty2)
    v1 = f.eval_h(*_theta_point(tx, f.z0), *_theta_point(ty, f.z0))
    v2 = f.eval_h(*_theta_point(tx2, f.z0), *_theta_point(ty2, f.z0))
    dist = np.maximum(_circ(tx, tx2), _circ(ty, ty2))
    with np.errstate(divide="ignore", invalid="ignore"):
        q = np.abs(v1 - v2) / dist ** f.lam
    return np.where(dist > 0, q, 0.0)


def _circ(a, b):
    d = np.abs(a - b) % (2 * np.pi)
    return np.minimum(d, 2 * np.pi - d)


def holder_norm_estimate(f: HolderFunction, samples=10 ** 4, seed=0):
    """``sup |xi| + Hölder constant`` (sampled)."""
    return f.sup_norm() + holder_constant_estimate(f, samples, seed)


# ------------------------------------------------------------------ steps

class StepApproximation:
    """``xi_n``: on cell ``(i, j)`` the value ``xi(a_i, c_j)``."""

    def __init__(self, source: HolderFunction, n: int):
        n = int(n)
        if n < 0 or n > MAX_STEP_LEVEL:
            raise LevelTooDeep(f"level {n} outside 0..{MAX_STEP_LEVEL}")
        self.source = source
        self.n = n
        self.partition = BoxPartition(source.box, n, "normalized", source.z0)
        self.values = source.corner_values(n)

    def eval_h(self, zx, wx, zy, wy):
        f = self.source
        s1, s2, ok = f.s_coords(zx, wx, zy, wy)
        m = 2 ** self.n
        i = np.clip(np.ceil(s1 * m).astype(int), 1, m) - 1
        j = np.clip(np.ceil(s2 * m).astype(int), 1, m) - 1
        return np.where(ok, self.values[i, j], 0.0)

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        zx, wx = np.where(np.isinf(x), 1.0, x), np.where(np.isinf(x), 0.0, 1.0)
        zy, wy = np.where(np.isinf(y), 1.0, y), np.where(np.isinf(y), 0.0, 1.0)
        return self.eval_h(zx, wx, zy, wy)

    def max_cell_diameter(self):
        """Largest cell diameter in the max-of-angles metric."""
        m = 2 ** self.n
        s = np.arange(m + 1) / m
        d1 = _circ(self.source.side1.theta(s[1:]), self.source.side1.theta(s[:-1])).max()
        d2 = _circ(self.source.side2.theta(s[1:]), self.source.side2.theta(s[:-1])).max()
        return float(max(d1, d2))

    def error_bound(self):
        return self.source.constant * self.max_cell_diameter() ** self.source.lam

    def sup_error(self, probes=10 ** 4, seed=0):
        """Sampled ``sup |xi - xi_n|`` over the support box."""
        rng = np.random.default_rng(seed)
        f = self.source
        s1 = rng.uniform(0, 1, probes)
        s2 = rng.uniform(0, 1, probes)
        zx, wx = f.side1.point(s1)
        zy, wy = f.side2.point(s2)
        return float(np.abs(f.eval_h(zx, wx, zy, wy) - self.eval_h(zx, wx, zy, wy)).max())


def step_approximation(f: HolderFunction, n: int) -> StepApproximation:
    return StepApproximation(f, n)


def exterior_probe(f: HolderFunction, count=10 ** 4, seed=0):
    """Max ``|xi|`` over random geodesics with an endpoint off the box arcs."""
    rng = np.random.default_rng(seed)
    s_out = np.concatenate([rng.uniform(-3, -1e-9, count // 2), rng.uniform(1 + 1e-9, 4, count - count // 2)])
    s_in = rng.uniform(0, 1, count)
    flip = rng.uniform(size=count) < 0.5
    s1 = np.where(flip, s_out, s_in)
    s2 = np.where(flip, s_in, s_out)
    zx, wx = f.side1.point(s1)
    zy, wy = f.side2.point(s2)
    return float(np.abs(f.eval_h(zx, wx, zy, wy)).max())
