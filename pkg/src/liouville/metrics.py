"""Hyperbolic distances on the upper half-plane and the punctured disk, and
the explicit density estimates used by the decay lemmas."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import OutOfDomain, RadiusExceeded

K_MAX = 8          # deck translates searched for the punctured-disk distance
DEFAULT_C1 = 0.9


@dataclass(frozen=True)
class MetricSample:
    location: complex
    density: float
    domain: str     # "H", "D*" or "C01-lower-bound"

    def __post_init__(self):
        if not self.density > 0:
            raise OutOfDomain("metric density must be positive")


def dist_H(z1, z2):
    """Hyperbolic distance in the upper half-plane (curvature -1)."""
    z1, z2 = np.asarray(z1, dtype=complex), np.asarray(z2, dtype=complex)
    if np.any(z1.imag <= 0) or np.any(z2.imag <= 0):
        raise OutOfDomain("points must lie in the upper half-plane")
    d = 2.0 * np.arcsinh(np.abs(z1 - z2) / (2.0 * np.sqrt(z1.imag * z2.imag)))
    return d[()] if d.ndim == 0 else d


def lift_punctured_disk(b):
    """A preimage of ``b`` under ``z -> exp(iz)``."""
    b = np.asarray(b, dtype=complex)
    r = np.abs(b)
    if np.any(r <= 0) or np.any(r >= 1):
        raise OutOfDomain("points must lie in the punctured unit disk")
    z = np.angle(b) + 1j * np.log(1.0 / r)
    return z[()] if z.ndim == 0 else z


def dist_punctured_disk(b1, b2, k_max=K_MAX):
    """Complete hyperbolic distance on ``0 < |z| < 1``."""
    z1 = lift_punctured_disk(b1)
    z2 = lift_punctured_disk(b2)
    ks = np.arange(-k_max, k_max + 1) * 2 * math.pi
    shape = np.broadcast(z1, z2).shape
    d = dist_H(np.asarray(z1)[..., None], np.asarray(z2)[..., None] + ks)
    out = d.min(axis=-1).reshape(shape)
    return out[()] if out.ndim == 0 else out


def radius_r_beta(beta):
    """Radius ``arcsinh(pi / (2 log(1/beta)))`` of the disk around ``beta`` on
    which the covering ``H -> D*`` is injective."""
    beta = np.asarray(beta, dtype=float)
    if np.any(beta <= 0) or np.any(beta >= 1):
        raise OutOfDomain("beta must lie in (0, 1)")
    r = np.arcsinh(math.pi / (2.0 * np.log(1.0 / beta)))
    return r[()] if r.ndim == 0 else r


@dataclass(frozen=True)
class PuncturedDiskReport:
    beta: float
    b1: complex
    rho: float
    radius: float
    lhs: float
    rhs: float
    holds: bool

    @property
    def margin(self):
        return self.rhs - self.lhs


def check_punctured_disk_bound(beta, b1, slack=1e-12):
    """Compare ``|b1|`` with ``beta ** exp(-rho(beta, b1))``."""
    if not 0 < beta < 1:
        raise OutOfDomain("beta must lie in (0, 1)")
    rho = float(dist_punctured_disk(beta, b1))
    r = float(radius_r_beta(beta))
    if rho >= r:
        raise RadiusExceeded(f"rho = {rho:.6g} is not below r(beta) = {r:.6g}")
    lhs = abs(b1)
    rhs = beta ** math.exp(-rho)
    return PuncturedDiskReport(beta, complex(b1), rho, r, lhs, rhs, lhs <= rhs * (1 + slack))


def lower_bound_density_01(z, C1=DEFAULT_C1):
    """``C1 / (|z-1| log(1/|z-1|))``, a lower bound for the hyperbolic density
    of the twice punctured plane near 1 (for ``|z-1|`` small enough)."""
    if not 0 < C1 < 1 + 1e-15:
        raise OutOfDomain("C1 must lie in (0, 1]")
    s = np.abs(np.asarray(z, dtype=complex) - 1.0)
    if np.any(s <= 0) or np.any(s >= 1):
        raise OutOfDomain("need 0 < |z - 1| < 1")
    out = C1 / (s * np.log(1.0 / s))
    return out[()] if out.ndim == 0 else out


def decay_bound(cr_minus_1, K, eps):
    """``|cr - 1| ** (1 / (K + eps))``."""
    x = np.asarray(cr_minus_1, dtype=float)
    if np.any(x < 0) or np.any(x >= 1):
        raise OutOfDomain("need 0 <= |cr - 1| < 1")
    if K < 1 or eps <= 0:
        raise OutOfDomain("need K >= 1 and eps > 0")
    out = x ** (1.0 / (K + eps))
    return out[()] if out.ndim == 0 else out


def density_01(z, dps=30, offset=None):
    """Hyperbolic density of the plane minus ``{0, 1}`` (curvature -1).

    Diagnostic only, computed from complete elliptic integrals with mpmath.
    Pass ``offset`` instead of ``z`` to evaluate at ``1 + offset`` without
    rounding the offset away.
    """
    import mpmath

    with mpmath.workdps(dps):
        if offset is not None:
            z = 1 + mpmath.mpc(complex(offset))
        else:
            z = mpmath.mpc(complex(z))
        if z == 0 or z == 1:
            raise OutOfDomain("density is singular at 0 and 1")
        k1 = mpmath.ellipk(z)
        k2 = mpmath.ellipk(1 - z)
        den = 4 * abs(z) * abs(1 - z) * mpmath.re(k2 * mpmath.conj(k1))
        return float(mpmath.pi / den)


def validity_radius(C1=DEFAULT_C1, n_angles=12, r_max=0.5, r_min=1e-40):
    """Largest ``r`` (found by bisection in ``log r``) such that the comparison
    density is below the true density on sampled circles ``|z - 1| = s``,
    ``s <= r``.

    The ratio of the two densities tends to 1 only like
    ``log(1/s) / (log(1/s) + log 16)``, so the radius shrinks very fast as
    ``C1 -> 1``.
    """
    thetas = 2 * math.pi * (np.arange(n_angles) + 0.5) / n_angles

    def ok(s):
        lb = C1 / (s * math.log(1 / s))
        dps = 30 + int(-math.log10(s))
        return all(density_01(None, dps=dps, offset=s * complex(math.cos(t), math.sin(t))) >= lb
                   for t in thetas)

    lo, hi = math.log(r_min), math.log(r_max)
    if ok(r_max):
        return r_max
    if not ok(r_min):
        return 0.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if ok(math.exp(mid)):
            lo = mid
        else:
            hi = mid
    return math.exp(lo)
