"""Riemann sphere arithmetic in homogeneous coordinates.

A point of the sphere is a pair ``(z, w)`` standing for ``z / w``; infinity is
``(1, 0)``.  Nothing here ever divides by ``w`` on the way to a cross-ratio.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateBox, DegenerateQuadruple, DegenerateTriple, NonPositiveMass

# relative size below which a 2x2 determinant counts as zero
DET_EPS = 1e-14
DEFAULT_Z0 = 1j


@dataclass(frozen=True)
class SpherePoint:
    z: complex
    w: complex = 1.0

    def __post_init__(self):
        z, w = complex(self.z), complex(self.w)
        if z == 0 and w == 0:
            raise ValueError("(0, 0) is not a point of the sphere")
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "w", w)

    @property
    def is_infinity(self):
        return self.w == 0

    def value(self):
        """Affine value ``z/w`` (``inf`` for the point at infinity)."""
        if self.w == 0:
            return complex(math.inf, 0.0)
        return self.z / self.w

    def norm(self):
        return math.hypot(abs(self.z), abs(self.w))

    def same(self, other, tol=DET_EPS):
        other = as_point(other)
        return abs(det(self, other)) <= tol * self.norm() * other.norm()

    def __repr__(self):
        if self.w == 0:
            return "SpherePoint(inf)"
        v = self.z / self.w
        return f"SpherePoint({v.real if v.imag == 0 else v!r})"


INF = SpherePoint(1.0, 0.0)
ZERO = SpherePoint(0.0, 1.0)
ONE = SpherePoint(1.0, 1.0)


def as_point(x) -> SpherePoint:
    """Coerce numbers, ``inf`` and strings like ``"inf"`` or ``"1+2j"``."""
    if isinstance(x, SpherePoint):
        return x
    if isinstance(x, str):
        s = x.strip().lower()
        if s in ("inf", "+inf", "-inf", "infinity", "oo", "∞"):
            return INF
        return as_point(complex(s.replace("i", "j")))
    if isinstance(x, tuple) and len(x) == 2:
        return SpherePoint(x[0], x[1])
    x = complex(x)
    if cmath.isinf(x):
        return INF
    if cmath.isnan(x):
        raise ValueError("nan is not a point of the sphere")
    return SpherePoint(x, 1.0)


def det(p: SpherePoint, q: SpherePoint) -> complex:
    return p.z * q.w - q.z * p.w


def _check_distinct(points, exc):
    for i in range(len(points)):
        for j in range(i + 1, len(points)):
            p, q = points[i], points[j]
            if abs(det(p, q)) <= DET_EPS * p.norm() * q.norm():
                raise exc(f"points {i} and {j} coincide: {p!r}, {q!r}")


def cross_ratio(a, b, c, d) -> complex:
    """``(a-c)(b-d) / ((a-d)(b-c))`` in homogeneous coordinates."""
    a, b, c, d = map(as_point, (a, b, c, d))
    _check_distinct((a, b, c, d), DegenerateQuadruple)
    return det(a, c) * det(b, d) / (det(a, d) * det(b, c))


def cr_minus_one(a, b, c, d) -> complex:
    """``cr - 1`` computed without cancellation: ``(a-b)(c-d) / ((a-d)(b-c))``."""
    a, b, c, d = map(as_point, (a, b, c, d))
    _check_distinct((a, b, c, d), DegenerateQuadruple)
    return det(a, b) * det(c, d) / (det(a, d) * det(b, c))


def log1p_complex(u):
    """Principal ``log(1 + u)`` accurate for small ``u`` (scalar or array)."""
    u = np.asarray(u, dtype=complex)
    ur, ui = u.real, u.imag
    out = 0.5 * np.log1p(2.0 * ur + ur * ur + ui * ui) + 1j * np.arctan2(ui, 1.0 + ur)
    return out[()] if out.ndim == 0 else out


def log_cross_ratio(a, b, c, d) -> complex:
    return complex(log1p_complex(cr_minus_one(a, b, c, d)))


def cross_ratio_h(Z, W):
    """Vectorised cross-ratio; ``Z, W`` have shape ``(..., 4)``."""
    Z = np.asarray(Z, dtype=complex)
    W = np.asarray(W, dtype=complex)

    def dd(i, j):
        return Z[..., i] * W[..., j] - Z[..., j] * W[..., i]

    return dd(0, 2) * dd(1, 3) / (dd(0, 3) * dd(1, 2))


class MobiusTransform:
    """``z -> (m11 z + m12) / (m21 z + m22)`` with determinant normalised to 1.

    The sign ambiguity of ``SL2 -> PSL2`` is fixed by making the first
    nonzero entry have positive real part (or positive imaginary part when
    the real part vanishes).
    """

    __slots__ = ("_m",)

    def __init__(self, m11, m12=None, m21=None, m22=None):
        if m12 is None:
            m = np.array(m11, dtype=complex).reshape(2, 2)
        else:
            m = np.array([[m11, m12], [m21, m22]], dtype=complex)
        dt = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        scale = np.abs(m).max()
        if scale == 0 or abs(dt) <= 1e-28 * scale * scale:
            raise DegenerateTriple("singular matrix does not define a Mobius transform")
        m = m / np.sqrt(complex(dt))
        for v in m.flat:
            if v != 0:
                if v.real < 0 or (v.real == 0 and v.imag < 0):
                    m = -m
                break
        m.setflags(write=False)
        self._m = m

    @classmethod
    def identity(cls):
        return cls(1, 0, 0, 1)

    @classmethod
    def scaling(cls, lam):
        s = cmath.sqrt(complex(lam))
        return cls(s, 0, 0, 1 / s)

    @property
    def matrix(self):
        return self._m

    @property
    def entries(self):
        return tuple(complex(v) for v in self._m.flat)

    @property
    def det(self):
        m = self._m
        return complex(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])

    def is_real(self, tol=1e-12):
        """True when the transform preserves the real circle."""
        m = self._m
        scale = tol * np.abs(m).max()
        return bool(np.all(np.abs(m.imag) <= scale) or np.all(np.abs(m.real) <= scale))

    def preserves_orientation(self, tol=1e-12):
        """True for elements of PSL2(R)."""
        return bool(np.all(np.abs(self._m.imag) <= tol * np.abs(self._m).max()))

    def __call__(self, p):
        return apply(self, p)

    def apply_h(self, z, w):
        m = self._m
        return m[0, 0] * z + m[0, 1] * w, m[1, 0] * z + m[1, 1] * w

    def apply_value(self, x):
        """Apply to affine values (arrays allowed, no ``inf`` handling)."""
        m = self._m
        x = np.asarray(x, dtype=complex)
        return (m[0, 0] * x + m[0, 1]) / (m[1, 0] * x + m[1, 1])

    def derivatives(self, z):
        """First three derivatives at finite ``z``."""
        c, d = self._m[1, 0], self._m[1, 1]
        q = c * z + d
        return 1 / q ** 2, -2 * c / q ** 3, 6 * c * c / q ** 4

    def __matmul__(self, other):
        return MobiusTransform(self._m @ other._m)

    def compose(self, other):
        return self @ other

    def inverse(self):
        (a, b), (c, d) = self._m
        return MobiusTransform(d, -b, -c, a)

    def conjugate_by(self, g):
        return g @ self @ g.inverse()

    def allclose(self, other, tol=1e-10):
        return bool(np.abs(self._m - other._m).max() <= tol)

    def __eq__(self, other):
        return isinstance(other, MobiusTransform) and bool(np.array_equal(self._m, other._m))

    def __hash__(self):
        return hash(self._m.tobytes())

    def __repr__(self):
        (a, b), (c, d) = self._m
        if self.preserves_orientation():
            a, b, c, d = a.real, b.real, c.real, d.real
        return f"MobiusTransform([[{a:.6g}, {b:.6g}], [{c:.6g}, {d:.6g}]])"


def apply(m: MobiusTransform, p) -> SpherePoint:
    p = as_point(p)
    z, w = m.apply_h(p.z, p.w)
    n = math.hypot(abs(z), abs(w))
    # keep real inputs on w in {0, 1} where possible
    if w != 0:
        return SpherePoint(z / w, 1.0)
    return SpherePoint(z / n, 0.0)


def _to_zero_one_inf(p, q, r):
    dqr = det(q, r)
    dqp = det(q, p)
    return MobiusTransform(dqr * p.w, -dqr * p.z, dqp * r.w, -dqp * r.z)


def mobius_through(p, q, r, p2, q2, r2) -> MobiusTransform:
    """The unique transform sending ``(p, q, r)`` to ``(p2, q2, r2)``."""
    src = tuple(map(as_point, (p, q, r)))
    dst = tuple(map(as_point, (p2, q2, r2)))
    _check_distinct(src, DegenerateTriple)
    _check_distinct(dst, DegenerateTriple)
    m1 = _to_zero_one_inf(*src)
    m2 = _to_zero_one_inf(*dst)
    return m2.inverse() @ m1


def normalize_quadruple(a, b, c, d):
    """Real-when-possible ``g`` with ``g(a, c, d) = (1, inf, 0)``, and ``cr``."""
    a, b, c, d = map(as_point, (a, b, c, d))
    cr = cross_ratio(a, b, c, d)
    g = mobius_through(a, c, d, ONE, INF, ZERO)
    return g, cr


def boundary_angle(x, z0=DEFAULT_Z0) -> float:
    """Angle in ``[0, 2pi)`` of ``(x - z0)/(x - conj z0)`` on the unit circle."""
    p = as_point(x)
    z0 = complex(z0)
    if not z0.imag > 0:
        raise ValueError("reference point must lie in the upper half-plane")
    v = (p.z - z0 * p.w) / (p.z - z0.conjugate() * p.w)
    return math.atan2(v.imag, v.real) % (2 * math.pi)


def boundary_angles(x, z0=DEFAULT_Z0):
    """Vectorised :func:`boundary_angle` for finite real arrays."""
    x = np.asarray(x, dtype=float)
    v = (x - z0) / (x - np.conj(z0))
    return np.mod(np.angle(v), 2 * np.pi)


def angle_distance(x, y, z0=DEFAULT_Z0) -> float:
    d = abs(boundary_angle(x, z0) - boundary_angle(y, z0))
    return min(d, 2 * math.pi - d)


def angle_distances(tx, ty):
    """Circle distance between arrays of angles."""
    d = np.abs(np.asarray(tx) - np.asarray(ty)) % (2 * np.pi)
    return np.minimum(d, 2 * np.pi - d)


def in_positive_order(a, b, c, d, z0=DEFAULT_Z0):
    """True when ``a, b, c, d`` are met in this order going around the real circle upward."""
    ta = boundary_angle(a, z0)
    rel = [(boundary_angle(p, z0) - ta) % (2 * math.pi) for p in (b, c, d)]
    return 0 < rel[0] < rel[1] < rel[2]


class GeodesicBox:
    """Geodesics with one end in the arc ``[a, b]`` and the other in ``[c, d]``.

    The four points must be distinct real (or infinite) points met in
    positive cyclic order, which makes the arcs disjoint and ``cr > 1``.
    """

    __slots__ = ("a", "b", "c", "d", "_cr")

    def __init__(self, a, b, c, d):
        pts = tuple(as_point(x) for x in (a, b, c, d))
        for p in pts:
            if p.w != 0 and abs((p.z / p.w).imag) > 0:
                raise DegenerateBox(f"box corner {p!r} is not on the real circle")
        # canonical real representatives
        pts = tuple(INF if p.w == 0 else SpherePoint((p.z / p.w).real, 1.0) for p in pts)
        try:
            cr = cross_ratio(*pts)
        except DegenerateQuadruple as exc:
            raise DegenerateBox(str(exc)) from None
        if not in_positive_order(*pts):
            raise NonPositiveMass("box corners are not in positive cyclic order")
        if not cr.real > 1:
            raise NonPositiveMass(f"cross-ratio {cr.real!r} <= 1")
        self.a, self.b, self.c, self.d = pts
        self._cr = cr.real

    @property
    def points(self):
        return (self.a, self.b, self.c, self.d)

    @property
    def values(self):
        return tuple(p.value().real if p.w else math.inf for p in self.points)

    @property
    def cross_ratio(self):
        return self._cr

    @property
    def measure(self):
        return float(log1p_complex(cr_minus_one(*self.points)).real)

    def transpose(self):
        return GeodesicBox(self.c, self.d, self.a, self.b)

    def moved(self, m: MobiusTransform):
        """Image box ``m([a,b] x [c,d])`` for a real transform."""
        if not m.preserves_orientation():
            raise DegenerateBox("boxes can only be moved by elements of PSL2(R)")
        return GeodesicBox(*(apply(m, p) for p in self.points))

    def __eq__(self, other):
        return isinstance(other, GeodesicBox) and all(
            p.same(q) for p, q in zip(self.points, other.points))

    def __hash__(self):
        return hash(self.values)

    def __repr__(self):
        a, b, c, d = self.values
        return f"GeodesicBox([{a:g}, {b:g}] x [{c:g}, {d:g}])"
