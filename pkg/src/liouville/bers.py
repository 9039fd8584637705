"""Chart machinery: Schwarzian derivatives, cusped forms, the Ahlfors-Weill
section and a windowed grid solver for the Beltrami equation."""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import DerivativeVanishes, NonConvergence, NormTooLarge
from .families import BeltramiCoefficient, QCMap, compose_beltrami

# radii quoted for the Bers charts; documented, not enforced
CHART_BALL_RADIUS = 0.5 * math.log(2)
CHART_INNER_RADIUS = 2.0 / 3.0
CHART_OUTER_RADIUS = 2.0
AHLFORS_WEILL_RADIUS = 0.5
CHART_EDGE = 0.45          # largest b-norm accepted by the translation chart

SCHWARZIAN_STEP = 3e-3


# ------------------------------------------------------------------ Schwarzian

def _fd_derivatives(f, z, h):
    fm3, fm2, fm1, f0, fp1, fp2, fp3 = (f(z + k * h) for k in (-3, -2, -1, 0, 1, 2, 3))
    d1 = (fm2 - 8 * fm1 + 8 * fp1 - fp2) / (12 * h)
    d2 = (-fm2 + 16 * fm1 - 30 * f0 + 16 * fp1 - fp2) / (12 * h * h)
    d3 = (fm3 - 8 * fm2 + 13 * fm1 - 13 * fp1 + 8 * fp2 - fp3) / (8 * h ** 3)
    return d1, d2, d3


def _cauchy_derivatives(f, z, r, m=64):
    # trapezoid rule on |w - z| = r: spectrally accurate for holomorphic f
    e = np.exp(2j * np.pi * np.arange(m) / m)
    v = np.asarray(f(z + r * e), dtype=complex)
    c = [np.mean(v * e ** -k) for k in (1, 2, 3)]
    return c[0] / r, 2 * c[1] / r ** 2, 6 * c[2] / r ** 3


def schwarzian(f, z, h=None, method="fd"):
    """``f'''/f' - 3/2 (f''/f')^2``.

    Uses ``f.derivatives(z)`` when the evaluator provides it.  Otherwise
    ``method="fd"`` takes fourth-order central differences with step ``h``
    (default ``3e-3 (1 + |z|)``) and ``method="cauchy"`` integrates over the
    circle of radius ``h`` (default ``0.1 (1 + |z|)``), which must lie in the
    domain of holomorphy.
    """
    z = complex(z)
    if hasattr(f, "derivatives"):
        d1, d2, d3 = f.derivatives(z)
    elif method == "cauchy":
        d1, d2, d3 = _cauchy_derivatives(f, z, 0.1 * (1 + abs(z)) if h is None else h)
    elif method == "fd":
        if h is None:
            h = SCHWARZIAN_STEP * (1 + abs(z))
        d1, d2, d3 = _fd_derivatives(f, z, h)
    else:
        raise ValueError(f"unknown method {method!r}")
    if abs(d1) < 1e-300 or not np.isfinite(d1):
        raise DerivativeVanishes(f"f' vanishes at {z}")
    return complex(d3 / d1 - 1.5 * (d2 / d1) ** 2)


# ------------------------------------------------------------------ cusped forms

def _nested(level, lo, hi):
    # interior points of the dyadic grid of [lo, hi]; level k+1 contains level k
    k = 2 ** level
    return lo + (hi - lo) * np.arange(1, k) / k


def _sample_points(level, lower=True):
    """Grid with ``log10 y`` in ``[-3, 3]`` and ``x = y tan(theta)``."""
    ly = np.concatenate([[-3.0], _nested(level, -3.0, 3.0), [3.0]])
    th = _nested(level, -math.pi / 2, math.pi / 2)
    y = 10.0 ** ly
    Y, T = np.meshgrid(y, th, indexing="ij")
    X = Y * np.tan(T)
    return X - 1j * Y if lower else X + 1j * Y, Y


def cusped_norm(phi, lower=True, level=7):
    """Sampled ``sup |y^2 phi(z)|`` on the half-plane; nondecreasing in ``level``."""
    z, y = _sample_points(level, lower)
    v = np.abs(y * y * np.asarray(phi(z)))
    return float(np.max(v, initial=0.0))


@dataclass
class CuspedForm:
    """Holomorphic ``phi`` on a half-plane (``lower=True`` for the lower one)."""
    phi: object
    lower: bool = True
    norm: float = None

    def __post_init__(self):
        if self.norm is None:
            self.norm = cusped_norm(self.phi, self.lower)

    def __call__(self, z):
        return self.phi(np.asarray(z, dtype=complex))

    def __mul__(self, c):
        return CuspedForm(lambda z, p=self.phi: c * p(z), self.lower, abs(c) * self.norm)

    __rmul__ = __mul__

    def __add__(self, other):
        return CuspedForm(lambda z, p=self.phi, q=other.phi: p(z) + q(z), self.lower)


@dataclass
class HarmonicBeltrami:
    """``eta(z) = -2 y^2 phi(conj z)`` on the half-plane opposite to ``phi``."""
    form: CuspedForm
    norm: float = field(init=False)

    def __post_init__(self):
        self.norm = 2.0 * self.form.norm

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        y = z.imag
        side = (y > 0) if self.form.lower else (y < 0)
        return np.where(side, -2.0 * y * y * self.form(np.conj(z)), 0.0)

    def as_beltrami(self) -> BeltramiCoefficient:
        return BeltramiCoefficient(self, self.norm)


def ahlfors_weill(phi: CuspedForm) -> HarmonicBeltrami:
    if not phi.norm < AHLFORS_WEILL_RADIUS:
        raise NormTooLarge(f"||phi||_b = {phi.norm:.6g} is not below 1/2")
    return HarmonicBeltrami(phi)


def translation_chart_inverse(phi: CuspedForm, mu: BeltramiCoefficient, f_mu: QCMap) -> BeltramiCoefficient:
    """Coefficient of ``f^eta o f^mu`` with ``eta`` the Ahlfors-Weill
    coefficient of ``phi`` (the chart centred at ``[mu]``)."""
    if phi.norm > CHART_EDGE:
        raise NormTooLarge(f"||phi||_b = {phi.norm:.6g} exceeds the chart edge {CHART_EDGE}")
    eta = ahlfors_weill(phi).as_beltrami()
    return compose_beltrami(mu, eta, f_mu)


def invariant_form(phi0, lam, terms=40):
    """``sum_k phi0(lam^k z) lam^(2k)``, ``|k| <= terms``: invariant under ``z -> lam z``."""
    ks = np.arange(-terms, terms + 1)

    def phi(z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros_like(z)
        for k in ks:
            out = out + phi0(lam ** float(k) * z) * lam ** (2.0 * k)
        return out

    return phi


# ------------------------------------------------------------------ grid solver

def smoothstep(t):
    """C-infinity step from 0 (``t <= 0``) to 1 (``t >= 1``)."""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    a = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
    b = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1.0 - t, 1.0)), 0.0)
    return a / (a + b)


@dataclass
class GridSolution:
    z: np.ndarray
    f: np.ndarray
    residual: float
    residual_history: list
    update_history: list
    dx: float

    def at(self, z):
        """Value at a grid node."""
        n = self.z.shape[0]
        x0 = self.z[0, 0].real
        j = int(round((z.real - x0) / self.dx))
        i = int(round((z.imag - x0) / self.dx))
        if not (0 <= i < n and 0 <= j < n):
            raise ValueError("point outside the grid window")
        return self.f[i, j]


def _kernel_fft(N, dx, power):
    k = np.arange(-N + 1, N) * dx
    X, Y = np.meshgrid(k, k)
    Z = X + 1j * Y
    with np.errstate(divide="ignore", invalid="ignore"):
        K = (1.0 / (np.pi * Z)) if power == 1 else (-1.0 / (np.pi * Z * Z))
    K[N - 1, N - 1] = 0.0
    K *= dx * dx
    P = np.zeros((2 * N, 2 * N), dtype=complex)
    P[:2 * N - 1, :2 * N - 1] = K
    return np.fft.fft2(P)


def _convolve(h, KF, N):
    P = np.zeros((2 * N, 2 * N), dtype=complex)
    P[:N, :N] = h
    r = np.fft.ifft2(np.fft.fft2(P) * KF)
    return r[N - 1:2 * N - 1, N - 1:2 * N - 1]


def _fd_residual(f, mu, dx):
    fx = (f[1:-1, 2:] - f[1:-1, :-2]) / (2 * dx)
    fy = (f[2:, 1:-1] - f[:-2, 1:-1]) / (2 * dx)
    fz = 0.5 * (fx - 1j * fy)
    fzb = 0.5 * (fx + 1j * fy)
    return float(np.abs(fzb - mu[1:-1, 1:-1] * fz).max())


def solve_beltrami_grid(mu, N=512, m=20, L=2.0, track=True):
    """Normalised solution of ``f_zbar = mu f_z`` on the window ``[-L, L)^2``.

    Neumann iteration ``h <- mu (1 + T h)`` with the Beurling transform
    ``T`` and ``f = z + C h`` (``C`` the Cauchy transform), both applied as
    FFT convolutions with sampled kernels; the result is normalised by an
    affine map to ``f(0) = 0``, ``f(1) = 1``.  The grid spacing is
    ``2L/N``; choose ``L`` so that 0 and 1 are nodes.

    ``mu`` is a callable (or a :class:`BeltramiCoefficient`) that must be
    smooth, at most 0.5 in modulus and vanish near the window edge.
    """
    dx = 2.0 * L / N
    x = -L + dx * np.arange(N)
    X, Y = np.meshgrid(x, x)
    Z = X + 1j * Y
    mv = np.asarray(mu(Z), dtype=complex)
    if np.abs(mv).max() > 0.5 + 1e-12:
        raise NormTooLarge("solver needs ||mu|| <= 0.5")
    edge = np.concatenate([mv[0], mv[-1], mv[:, 0], mv[:, -1]])
    if np.abs(edge).max() > 1e-12:
        raise ValueError("mu must vanish on the window edge")
    i0 = int(round(L / dx))
    i1 = int(round((L + 1.0) / dx))
    if abs(x[i0]) > 1e-12 or abs(x[i1] - 1.0) > 1e-12:
        raise ValueError("0 and 1 must be grid nodes (pick L = k * dx)")
    KC = _kernel_fft(N, dx, 1)
    h = mv.copy()
    res_hist, upd_hist = [], []
    ups = 0
    if np.any(mv != 0):
        KT = _kernel_fft(N, dx, 2)
        for _ in range(m):
            hn = mv * (1.0 + _convolve(h, KT, N))
            upd = float(np.abs(hn - h).max())
            if upd_hist and upd > upd_hist[-1] * (1 + 1e-9):
                ups += 1
                if ups >= 3:
                    raise NonConvergence("Neumann iteration diverged for 3 successive steps")
            else:
                ups = 0
            upd_hist.append(upd)
            h = hn
            if track:
                res_hist.append(_fd_residual(Z + _convolve(h, KC, N), mv, dx))
        f = Z + _convolve(h, KC, N)
    else:
        f = Z.copy()
    f0 = f[i0, i0]
    f1 = f[i0, i1]
    f = (f - f0) / (f1 - f0)
    return GridSolution(Z, f, _fd_residual(f, mv, dx), res_hist, upd_hist, dx)


# ------------------------------------------------------------------ grid files

MAGIC = b"BELGRID1"


def write_grid(path, values):
    """Write an ``N x N`` complex grid: 16-byte header then little-endian
    float64 ``(re, im)`` pairs, row-major."""
    v = np.asarray(values, dtype=complex)
    if v.ndim != 2 or v.shape[0] != v.shape[1]:
        raise ValueError("grid must be square")
    with open(path, "wb") as fh:
        fh.write(MAGIC + struct.pack("<II", v.shape[0], 0))
        fh.write(np.ascontiguousarray(v, dtype="<c16").tobytes())


def read_grid(path):
    with open(path, "rb") as fh:
        head = fh.read(16)
        if len(head) != 16 or head[:8] != MAGIC:
            raise ValueError("not a BELGRID1 file")
        n, _ = struct.unpack("<II", head[8:])
        data = fh.read()
    if len(data) != 16 * n * n:
        raise ValueError("truncated grid file")
    return np.frombuffer(data, dtype="<c16").reshape(n, n).astype(complex)
