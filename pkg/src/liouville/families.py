"""Closed-form holomorphic families of quasiconformal maps fixing 0, 1, inf.

Every family acts on homogeneous pairs ``(z, w)`` so the engine can push
boundary points through ``f^t`` without ever forming ``inf``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import NormOverflow, ParameterOutOfRange, UnsupportedFamily
from .projective import MobiusTransform


def _grid(window=4.0, n=100):
    # cell-centred grid so the origin is never hit
    s = (np.arange(n) + 0.5) / n * 2 * window - window
    x, y = np.meshgrid(s, s)
    return (x + 1j * y).ravel()


class BeltramiCoefficient:
    """A Beltrami coefficient ``mu`` with a declared essential sup."""

    def __init__(self, fn: Callable, norm=None, window=4.0):
        self.fn = fn
        self.window = window
        sampled = self.sampled_sup()
        if norm is None:
            norm = sampled
        elif sampled > norm + 1e-9:
            raise NormOverflow(f"declared norm {norm} below sampled sup {sampled}")
        if not norm < 1:
            raise NormOverflow(f"norm {norm} is not below 1")
        self.norm = float(norm)

    def __call__(self, z):
        return self.fn(np.asarray(z, dtype=complex))

    def sampled_sup(self, n=100):
        return float(np.max(np.abs(self.fn(_grid(self.window, n))), initial=0.0))

    @property
    def dilatation(self):
        return (1 + self.norm) / (1 - self.norm)

    @classmethod
    def zero(cls):
        return cls(lambda z: np.zeros_like(np.asarray(z, dtype=complex)), 0.0)


@dataclass(frozen=True)
class QCMap:
    """A map with closed-form Wirtinger derivatives (vectorised)."""
    map: Callable
    fz: Callable
    fzbar: Callable

    def __call__(self, z):
        return self.map(np.asarray(z, dtype=complex))

    def beltrami(self, z):
        z = np.asarray(z, dtype=complex)
        return self.fzbar(z) / self.fz(z)


@dataclass(frozen=True)
class CyclicFuchsianGroup:
    """The group generated by ``z -> lam z``, ``lam > 1``."""
    lam: float

    def __post_init__(self):
        if not self.lam > 1:
            raise ParameterOutOfRange("multiplier must exceed 1")

    @property
    def generator(self):
        return MobiusTransform.scaling(self.lam)


class HolomorphicQCFamily:
    """Base class.  Subclasses implement ``apply_h``, ``at`` and ``mu_norm``."""

    kind = "abstract"
    boundary_is_identity = False

    def __init__(self, r0):
        r0 = float(r0)
        if not 0 < r0 <= 1:
            raise ParameterOutOfRange(f"r0 = {r0} outside (0, 1]")
        self.r0 = r0
        self._check_fixed_points()

    def _check_fixed_points(self):
        for t in (0.5 * self.r0, 0.5j * self.r0, -0.4 * self.r0):
            z, w = self.apply_h(t, np.array([0, 1, 1], complex), np.array([1, 1, 0], complex))
            if abs(z[0]) > 1e-12 or abs(z[1] - w[1]) > 1e-12 or w[2] != 0:
                raise ParameterOutOfRange(f"{self.kind} family does not fix 0, 1, inf")

    def check_t(self, t):
        t = complex(t)
        if not abs(t) < self.r0:
            raise ParameterOutOfRange(f"|t| = {abs(t):.6g} not below r0 = {self.r0}")
        return t

    # maps --------------------------------------------------------------
    def apply_h(self, t, z, w):
        raise NotImplementedError

    def __call__(self, t, z):
        """Affine values of ``f^t``; ``inf`` maps to ``inf``."""
        z = np.asarray(z, dtype=complex)
        inf = np.isinf(z)
        zz = np.where(inf, 1.0, z)
        ww = np.where(inf, 0.0, 1.0).astype(complex)
        a, b = self.apply_h(t, zz, ww)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(b == 0, complex(np.inf), a / np.where(b == 0, 1, b))
        return out[()] if out.ndim == 0 else out

    def boundary_dt(self, t, z, w):
        """``d/dt`` of the homogeneous representative returned by ``apply_h``.

        Fallback: Richardson-extrapolated central differences, step
        ``1e-4 * r0``.
        """
        h = 1e-4 * self.r0

        def cd(h):
            zp, wp = self.apply_h(t + h, z, w)
            zm, wm = self.apply_h(t - h, z, w)
            return (zp - zm) / (2 * h), (wp - wm) / (2 * h)

        z1, w1 = cd(h)
        z2, w2 = cd(h / 2)
        return (4 * z2 - z1) / 3, (4 * w2 - w1) / 3

    def at(self, t) -> QCMap:
        raise NotImplementedError

    # Beltrami data -------------------------------------------------------
    def mu_norm(self, t):
        raise NotImplementedError

    def beltrami(self, t) -> BeltramiCoefficient:
        m = self.at(self.check_t(t))
        return BeltramiCoefficient(m.beltrami, self.mu_norm(t))

    def dilatation(self, t):
        k = self.mu_norm(t)
        return (1 + k) / (1 - k)

    def __repr__(self):
        return f"{type(self).__name__}(r0={self.r0})"


class IdentityFamily(HolomorphicQCFamily):
    kind = "identity"
    boundary_is_identity = True

    def __init__(self, r0=1.0):
        super().__init__(r0)

    def apply_h(self, t, z, w):
        return np.asarray(z, dtype=complex), np.asarray(w, dtype=complex)

    def boundary_dt(self, t, z, w):
        return np.zeros_like(np.asarray(z, dtype=complex)), np.zeros_like(np.asarray(w, dtype=complex))

    def at(self, t):
        one = lambda z: np.ones_like(z)
        return QCMap(lambda z: z, one, lambda z: np.zeros_like(z))

    def mu_norm(self, t):
        return 0.0


def _abs_pow(x, t):
    """``|x|**t`` with ``|0|**t = 0`` (valid for ``Re t > -1`` in use)."""
    a = np.abs(x)
    with np.errstate(divide="ignore"):
        la = np.log(np.where(a > 0, a, 1.0))
    return np.where(a > 0, np.exp(t * la), 0.0), np.where(a > 0, la, 0.0)


class PowerStretchFamily(HolomorphicQCFamily):
    """``f^t(z) = z |z|^t`` with ``mu(t) = t/(t+2) * z/conj(z)``."""

    kind = "power"

    def __init__(self, r0=1.0):
        super().__init__(r0)

    def apply_h(self, t, z, w):
        z = np.asarray(z, dtype=complex)
        w = np.asarray(w, dtype=complex)
        pz, _ = _abs_pow(z, t)
        pw, _ = _abs_pow(w, t)
        return z * pz, w * pw

    def boundary_dt(self, t, z, w):
        z = np.asarray(z, dtype=complex)
        w = np.asarray(w, dtype=complex)
        pz, lz = _abs_pow(z, t)
        pw, lw = _abs_pow(w, t)
        return z * pz * lz, w * pw * lw

    def at(self, t):
        t = complex(t)

        def fz(z):
            return (1 + t / 2) * _abs_pow(z, t)[0]

        def fzbar(z):
            with np.errstate(invalid="ignore", divide="ignore"):
                ph = np.where(z != 0, z / np.conj(np.where(z != 0, z, 1)), 0)
            return (t / 2) * _abs_pow(z, t)[0] * ph

        return QCMap(lambda z: z * _abs_pow(z, t)[0], fz, fzbar)

    def mu_norm(self, t):
        t = complex(t)
        return abs(t / (t + 2))


class VerticalStretchFamily(HolomorphicQCFamily):
    """``x + iy -> x + (1+t) iy`` above the real line, identity below.

    The boundary values are the identity for every ``t``.
    """

    kind = "vertical"
    boundary_is_identity = True

    def __init__(self, r0=1.0):
        super().__init__(r0)

    def apply_h(self, t, z, w):
        z = np.asarray(z, dtype=complex)
        w = np.asarray(w, dtype=complex)
        with np.errstate(divide="ignore", invalid="ignore"):
            v = np.where(w != 0, z / np.where(w != 0, w, 1), 0)
        up = (w != 0) & (v.imag > 0)
        zz = np.where(up, v.real + (1 + t) * 1j * v.imag, z)
        ww = np.where(up, 1.0 + 0j, w)
        return zz, ww

    def boundary_dt(self, t, z, w):
        z = np.asarray(z, dtype=complex)
        w = np.asarray(w, dtype=complex)
        with np.errstate(divide="ignore", invalid="ignore"):
            v = np.where(w != 0, z / np.where(w != 0, w, 1), 0)
        up = (w != 0) & (v.imag > 0)
        return np.where(up, 1j * v.imag, 0j), np.zeros_like(w)

    def at(self, t):
        t = complex(t)

        def f(z):
            return np.where(z.imag > 0, z.real + (1 + t) * 1j * z.imag, z)

        def fz(z):
            return np.where(z.imag > 0, 1 + t / 2, 1.0 + 0j)

        def fzbar(z):
            return np.where(z.imag > 0, -t / 2, 0j)

        return QCMap(f, fz, fzbar)

    def mu_norm(self, t):
        t = complex(t)
        return abs(t / (t + 2))


class ComposedFamily(HolomorphicQCFamily):
    """``t -> outer^t o inner^t`` for real ``t``.

    The composition is not holomorphic in ``t`` (its Beltrami coefficient
    involves ``conj(f_z)/f_z``), so complex parameters are refused.
    """

    kind = "composed"

    def __init__(self, inner: HolomorphicQCFamily, outer: HolomorphicQCFamily):
        self.inner = inner
        self.outer = outer
        self.boundary_is_identity = inner.boundary_is_identity and outer.boundary_is_identity
        super().__init__(min(inner.r0, outer.r0))

    def check_t(self, t):
        t = super().check_t(t)
        if t.imag != 0:
            raise ParameterOutOfRange("composed families take real parameters only")
        return t

    def apply_h(self, t, z, w):
        return self.outer.apply_h(t, *self.inner.apply_h(t, z, w))

    def at(self, t):
        f, g = self.inner.at(t), self.outer.at(t)
        h = compose_maps(f, g)
        return h

    def mu_norm(self, t):
        a, b = self.inner.mu_norm(t), self.outer.mu_norm(t)
        return (a + b) / (1 + a * b)

    def __repr__(self):
        return f"ComposedFamily({self.inner!r}, {self.outer!r})"


def compose_maps(f: QCMap, g: QCMap) -> QCMap:
    """Chain rule for ``g o f`` in Wirtinger form."""

    def hz(z):
        fz_ = f(z)
        return g.fz(fz_) * f.fz(z) + g.fzbar(fz_) * np.conj(f.fzbar(z))

    def hzbar(z):
        fz_ = f(z)
        return g.fz(fz_) * f.fzbar(z) + g.fzbar(fz_) * np.conj(f.fz(z))

    return QCMap(lambda z: g(f(z)), hz, hzbar)


FAMILIES = {
    "identity": IdentityFamily,
    "power": PowerStretchFamily,
    "vertical": VerticalStretchFamily,
}


def power_stretch_family(r0=1.0):
    return PowerStretchFamily(r0)


def vertical_stretch_family(r0=1.0):
    return VerticalStretchFamily(r0)


def max_dilatation(fam: HolomorphicQCFamily, r, n_angles=4096):
    """``sup_{|t| <= r} K(t)``.

    ``|mu(t)|`` is subharmonic in ``t`` so the sup sits on ``|t| = r``; the
    power and vertical families are maximised in closed form at ``t = -r``.
    """
    if not 0 < r <= fam.r0:
        raise ParameterOutOfRange(f"r = {r} outside (0, r0 = {fam.r0}]")
    if r >= 1:
        return math.inf
    if isinstance(fam, (PowerStretchFamily, VerticalStretchFamily)):
        return 1.0 / (1.0 - r)
    if isinstance(fam, IdentityFamily):
        return 1.0
    ts = r * np.exp(2j * np.pi * np.arange(n_angles) / n_angles)
    return max(fam.dilatation(t) for t in np.append(ts, -r))


def conjugated_group(fam: HolomorphicQCFamily, t, g: CyclicFuchsianGroup) -> MobiusTransform:
    """``g'`` with ``f^t o g = g' o f^t``."""
    t = fam.check_t(t)
    return MobiusTransform.scaling(_conjugate_multiplier(fam, t, g.lam))


def _conjugate_multiplier(fam, t, lam):
    if isinstance(fam, PowerStretchFamily):
        return complex(lam) ** (1 + t)
    if isinstance(fam, (IdentityFamily, VerticalStretchFamily)):
        return complex(lam)
    if isinstance(fam, ComposedFamily):
        return _conjugate_multiplier(fam.outer, t, _conjugate_multiplier(fam.inner, t, lam))
    raise UnsupportedFamily(f"no equivariance rule for {fam.kind} families")


def compose_beltrami(mu: BeltramiCoefficient, nu: BeltramiCoefficient, f_mu: QCMap) -> BeltramiCoefficient:
    """Beltrami coefficient of ``g o f_mu`` where ``g`` has coefficient ``nu``."""

    def fn(z):
        z = np.asarray(z, dtype=complex)
        m = mu(z)
        fz = f_mu.fz(z)
        theta = np.conj(fz) / fz
        e = nu(f_mu(z)) * theta
        return (m + e) / (1 + np.conj(m) * e)

    bound = (mu.norm + nu.norm) / (1 + mu.norm * nu.norm)
    out = BeltramiCoefficient(fn, None, window=mu.window)
    if out.norm > bound + 1e-9:
        raise NormOverflow(f"sampled norm {out.norm} exceeds {bound}")
    return out


def reflect_extension(mu_upper: BeltramiCoefficient) -> BeltramiCoefficient:
    """Extend from the upper half-plane by ``mu(z) = conj(mu(conj z))`` below."""

    def fn(z):
        z = np.asarray(z, dtype=complex)
        up = z.imag >= 0
        return np.where(up, mu_upper(np.where(up, z, np.conj(z))),
                        np.conj(mu_upper(np.where(up, z, np.conj(z)))))

    return BeltramiCoefficient(fn, mu_upper.norm, window=mu_upper.window)


def power_beltrami(t):
    t = complex(t)
    k = t / (t + 2)

    def fn(z):
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(z != 0, k * z / np.conj(np.where(z != 0, z, 1)), 0)

    return BeltramiCoefficient(fn, abs(k))
