"""Dyadic evaluation of the Liouville functional and of its complexification.

For a test function ``xi`` supported in a box, a transform ``gamma`` and a
boundary map ``f`` the level-n sum is

    I_n = sum_{i,j=1}^{2^n} xi(a_i, c_j) log cr(f gamma^{-1}(a_{i-1}, a_i, c_{j-1}, c_j))

over the normalised partition of the support box.  The series
``I_1 + sum (I_{n+1} - I_n)`` converges like ``2^-n`` for Lipschitz ``xi``;
Richardson extrapolation over the levels gives the limit to the requested
tolerance at moderate depth.
"""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels
from .currents import homogeneous_image, partition_constant
from .errors import (BranchViolation, DegenerateBox, OutsideNeighborhood,
                     QuadratureBudgetExceeded, ToleranceNotReached)
from .families import HolomorphicQCFamily, IdentityFamily
from .holder import HolderFunction
from .projective import MobiusTransform, mobius_through

RICHARDSON_START = 2    # first level at which bump kinks sit on the grid
RICHARDSON_DEPTH = 3
BLOCK_CELLS = 1 << 18


@dataclass(frozen=True)
class EvalParams:
    tolerance: float = 1e-6
    n_max: int = 12
    n_min: int = 2
    extrapolate: bool = True
    guard: float = 0.5
    skip_tol: float = 1e-14
    threads: int = 1

    def with_(self, **kw):
        return replace(self, **kw)


@dataclass
class EvaluationTrace:
    levels: list = field(default_factory=list)
    sums: list = field(default_factory=list)
    deltas: list = field(default_factory=list)
    estimates: list = field(default_factory=list)
    reason: str = ""
    value: complex = complex("nan")

    @property
    def n_levels(self):
        return len(self.levels)

    @property
    def last_level(self):
        return self.levels[-1] if self.levels else -1

    @property
    def delta_last(self):
        return self.deltas[-1] if self.deltas else math.nan

    def fitted_ratio(self, n_lo=2, n_hi=None):
        """log4-slope of the raw deltas ``|I_n - I_{n-1}|`` (``nan`` if fewer
        than two usable points)."""
        pts = [(n, d) for n, d in zip(self.levels[1:], self.deltas)
               if n >= n_lo and (n_hi is None or n <= n_hi) and d > 0]
        if len(pts) < 2:
            return math.nan
        n, d = np.array(pts, dtype=float).T
        return float(np.polyfit(n, np.log(d) / math.log(4), 1)[0])

    def records(self, gamma_index=0):
        out = []
        for k, n in enumerate(self.levels):
            s = self.sums[k]
            out.append({"gamma_index": gamma_index, "n": n, "I_re": s.real, "I_im": s.imag,
                        "delta": self.deltas[k - 1] if k else None})
        return out


def _richardson(sums, levels):
    """Extrapolated estimates from the levels ``>= RICHARDSON_START``."""
    rows = []
    est = []
    for n, s in zip(levels, sums):
        if n < RICHARDSON_START:
            est.append(s)
            continue
        row = [s]
        prev = rows[-1] if rows else None
        for k in range(1, RICHARDSON_DEPTH + 1):
            if prev is None or len(prev) < k:
                break
            f = 2.0 ** k
            row.append((f * row[k - 1] - prev[k - 1]) / (f - 1))
        rows.append(row)
        est.append(row[-1])
    return est


class _Level:
    """Boundary data of one level, ready for the kernels."""

    def __init__(self, xi: HolderFunction, M: MobiusTransform, n, hmap, dmap):
        s = np.arange(2 ** n + 1) / 2 ** n
        cs = xi.c_star
        za, wa = homogeneous_image(M, -1.0 + s)
        zc, wc = homogeneous_image(M, cs + (1.0 - cs) * s)
        self.n = n
        self.d = None
        if dmap is not None:
            dza, dwa = dmap(za, wa)
            dzc, dwc = dmap(zc, wc)
        if hmap is not None:
            za, wa = hmap(za, wa)
            zc, wc = hmap(zc, wc)
        sa = np.sqrt(np.abs(za) ** 2 + np.abs(wa) ** 2)
        sc = np.sqrt(np.abs(zc) ** 2 + np.abs(wc) ** 2)
        self.za, self.wa = np.ascontiguousarray(za / sa), np.ascontiguousarray(wa / sa)
        self.zc, self.wc = np.ascontiguousarray(zc / sc), np.ascontiguousarray(wc / sc)
        if dmap is not None:
            self.d = tuple(np.ascontiguousarray(np.asarray(v, dtype=complex) / sc_)
                           for v, sc_ in ((dza, sa), (dwa, sa), (dzc, sc), (dwc, sc)))


def _level_sum(xi, lv: _Level, guard, params: EvalParams, derivative=False):
    n = lv.n
    m = 2 ** n
    rows = max(1, min(m, BLOCK_CELLS // m))
    starts = list(range(0, m, rows))
    s = np.arange(1, m + 1) / m

    def work(i0):
        vals = np.ascontiguousarray(xi.profile_grid(s[i0:i0 + rows], s))
        if derivative:
            dza, dwa, dzc, dwc = lv.d
            return _kernels.block_dsum(lv.za, lv.wa, dza, dwa, lv.zc, lv.wc, dzc, dwc,
                                       i0, vals, guard, params.skip_tol)
        return _kernels.block_sum(lv.za, lv.wa, lv.zc, lv.wc, i0, vals, guard, params.skip_tol)

    if params.threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(params.threads) as ex:
            parts = list(ex.map(work, starts))
    else:
        parts = [work(i0) for i0 in starts]
    total = 0j
    # fixed accumulation order keeps results independent of scheduling
    for val, bi, bj, status in parts:
        if status == _kernels.DEGENERATE:
            raise DegenerateBox(f"cell ({bi}, {bj}) at level {n} is degenerate")
        if status == _kernels.BRANCH_CUT:
            raise OutsideNeighborhood("cell cross-ratio crossed the branch cut", n, (bi, bj))
        if status == _kernels.GUARD:
            raise OutsideNeighborhood(f"cell |cr - 1| >= {guard}", n, (bi, bj))
        total += val
    return complex(total)


def _guard_start(xi: HolderFunction, guard):
    # the guard applies from level 2 on, and only once the undeformed cells
    # are provably inside it (C(L) 4^-n < guard / 2)
    c = partition_constant(xi.c_star)
    n = 2
    while c * 4.0 ** -n >= 0.5 * guard:
        n += 1
    return n


def _series(xi: HolderFunction, gamma, hmap, dmap, params: EvalParams, derivative=False):
    if gamma is None:
        gamma = MobiusTransform.identity()
    M = gamma.inverse() @ xi.gamma.inverse()
    trace = EvaluationTrace()
    n_guard = _guard_start(xi, params.guard) if params.guard else None
    for n in range(params.n_max + 1):
        g = params.guard if (n_guard is not None and n >= n_guard) else 0.0
        lv = _Level(xi, M, n, hmap, dmap if derivative else None)
        total = _level_sum(xi, lv, g, params, derivative)
        trace.levels.append(n)
        trace.sums.append(total)
        if n:
            trace.deltas.append(abs(total - trace.sums[-2]))
        trace.estimates = (_richardson(trace.sums, trace.levels) if params.extrapolate
                           else list(trace.sums))
        if n < max(1, params.n_min):
            continue
        if trace.deltas[-1] < params.tolerance:
            trace.reason = "tolerance"
            trace.value = total
            return total, trace
        if params.extrapolate and n >= RICHARDSON_START + 2:
            e = trace.estimates
            if abs(e[-1] - e[-2]) < params.tolerance:
                trace.reason = "tolerance"
                trace.value = e[-1]
                return e[-1], trace
    trace.reason = "max-level"
    trace.value = trace.estimates[-1]
    raise ToleranceNotReached(
        f"no convergence to {params.tolerance:g} by level {params.n_max}", trace.value, trace)


def _boundary(fam, t):
    if fam is None or fam.boundary_is_identity:
        return None, None
    return (lambda z, w: fam.apply_h(t, z, w)), (lambda z, w: fam.boundary_dt(t, z, w))


def eval_current(xi: HolderFunction, gamma=None, boundary_map=None, params=EvalParams()):
    """``L[f](xi o gamma)`` for a real boundary map ``f`` fixing 0, 1, inf.

    ``boundary_map`` acts on homogeneous arrays; ``None`` is the identity.
    """
    return _series(xi, gamma, boundary_map, None, params)


def eval_extension(xi: HolderFunction, gamma=None, fam: HolomorphicQCFamily = None, t=0.0,
                   params=EvalParams()):
    """The complexified functional at ``f^t`` (complex ``t`` allowed)."""
    if fam is not None:
        t = fam.check_t(t)
    hmap, _ = _boundary(fam, t)
    return _series(xi, gamma, hmap, None, params)


def eval_derivative(xi: HolderFunction, gamma=None, fam: HolomorphicQCFamily = None, t=0.0,
                    params=EvalParams()):
    """``d/dt`` of :func:`eval_extension`, summed cell by cell."""
    if fam is None or fam.boundary_is_identity:
        trace = EvaluationTrace(levels=[0], sums=[0j], estimates=[0j], reason="tolerance", value=0j)
        return 0j, trace
    t = fam.check_t(t)
    hmap, dmap = _boundary(fam, t)
    return _series(xi, gamma, hmap, dmap, params, derivative=True)


# ------------------------------------------------------------------ sampler

class GammaSampler:
    """Real transforms ``gamma`` with ``gamma(0, 1, inf) = (p, q, r)`` for all
    positively ordered triples of the grid ``tan(pi k / m)``, ``k < m``.

    ``m`` must be a multiple of 4 so that ``0, 1, inf, -1`` are grid points;
    the grid for ``2m`` contains the grid for ``m``.
    """

    def __init__(self, m=8, seed=None):
        if m < 4 or m % 4:
            raise ValueError("resolution must be a positive multiple of 4")
        self.m = m
        self.seed = seed
        pts = []
        for k in range(m):
            if 4 * k == m:
                pts.append(1.0)
            elif 2 * k == m:
                pts.append(math.inf)
            elif 4 * k == 3 * m:
                pts.append(-1.0)
            else:
                pts.append(math.tan(math.pi * k / m) if k else 0.0)
        self.points = pts
        triples = []
        for i, j, k in itertools.combinations(range(m), 3):
            triples += [(i, j, k), (j, k, i), (k, i, j)]
        if seed is not None:
            order = np.random.default_rng(seed).permutation(len(triples))
            triples = [triples[o] for o in order]
        self.triples = triples

    def __len__(self):
        return len(self.triples)

    def triple(self, idx):
        i, j, k = self.triples[idx]
        return self.points[i], self.points[j], self.points[k]

    def transform(self, idx):
        p, q, r = self.triple(idx)
        g = mobius_through(0.0, 1.0, math.inf, p, q, r)
        return MobiusTransform(g.matrix.real)

    def identity_index(self):
        return self.triples.index((0, self.m // 4, self.m // 2))

    def __iter__(self):
        for idx in range(len(self)):
            yield idx, self.transform(idx)


# ------------------------------------------------------------------ handles

@dataclass
class DistributionHandle:
    """``W = L-hat[f^t]`` as a functional on test functions."""
    family: HolomorphicQCFamily = None
    t: complex = 0.0
    group: object = None
    params: EvalParams = EvalParams()

    def __post_init__(self):
        if self.family is None:
            self.family = IdentityFamily()
        self.t = self.family.check_t(self.t)

    def __call__(self, xi, gamma=None):
        return eval_extension(xi, gamma, self.family, self.t, self.params)[0]

    def evaluate(self, xi, gamma=None):
        return eval_extension(xi, gamma, self.family, self.t, self.params)


@dataclass
class SeminormReport:
    value: float
    argmax: int
    values: dict
    errors: dict
    traces: dict

    @property
    def spread(self):
        v = np.array(list(self.values.values()))
        return float(np.abs(v - v[0]).max()) if v.size else math.nan


def evaluate_samples(handle: DistributionHandle, xi, sampler: GammaSampler, threads=1):
    """Evaluate ``W(xi o gamma)`` for every sampled ``gamma``; errors are
    recorded per sample instead of raised."""

    def work(idx):
        g = sampler.transform(idx)
        try:
            v, tr = handle.evaluate(xi, g)
            return idx, v, tr, None
        except ToleranceNotReached as exc:
            return idx, exc.value, exc.trace, exc
        except (BranchViolation, DegenerateBox) as exc:
            return idx, None, None, exc

    idxs = range(len(sampler))
    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            return list(ex.map(work, idxs))
    return [work(i) for i in idxs]


def seminorm(handle: DistributionHandle, xi, sampler: GammaSampler, threads=1) -> SeminormReport:
    """``max |W(xi o gamma)|`` over the sampler (a lower bound of the sup)."""
    if len(sampler) == 0:
        raise ValueError("empty sampler")
    values, errors, traces = {}, {}, {}
    for idx, v, tr, err in evaluate_samples(handle, xi, sampler, threads):
        if err is not None:
            errors[idx] = err
        if v is not None and not isinstance(err, ToleranceNotReached):
            values[idx] = v
            traces[idx] = tr
    if not values:
        return SeminormReport(math.nan, -1, values, errors, traces)
    arg = max(values, key=lambda k: (abs(values[k]), -k))
    return SeminormReport(abs(values[arg]), arg, values, errors, traces)


# ------------------------------------------------------------------ oracle

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(10)


def _alpha_range(p0, p1):
    a0 = math.atan2(p0.z.real, p0.w.real) % math.pi
    span = (math.atan2(p1.z.real, p1.w.real) - a0) % math.pi
    return a0, a0 + span


def _breaks(xi: HolderFunction, side, lo, hi):
    s = {0.0, 1.0}
    for _, p in xi.terms:
        s |= set(getattr(p, "breaks", ()))
    out = set()
    for v in sorted(s):
        z, w = side.point(v)
        a = math.atan2(float(z.real), float(w.real)) % math.pi
        while a < lo - 1e-12:
            a += math.pi
        out.add(min(max(a, lo), hi))
    out |= {lo, hi}
    return np.array(sorted(out))


def _panels(edges, level):
    k = 2 ** level
    fr = np.arange(k + 1) / k
    pts = [edges[0]]
    for a, b in zip(edges[:-1], edges[1:]):
        pts += list(a + (b - a) * fr[1:])
    return np.array(pts)


def _gl_points(edges):
    a, b = edges[:-1], edges[1:]
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    x = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    w = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
    return x, w


def quadrature_oracle(xi: HolderFunction, tol=1e-12, max_level=9, boundary=None, gamma=None):
    """``iint xi(x, y) dx dy / (x - y)^2`` by tensor Gauss-Legendre.

    Works in the coordinates ``x = tan(alpha)`` where the density is
    ``1/sin^2(alpha - beta)`` (so infinity needs no special care), on panels
    split at the kinks of the profile, halving all panels until two
    successive results agree to ``tol``.

    ``boundary = (f, fprime)`` replaces the density by
    ``f'(x) f'(y) / (f(x) - f(y))^2`` (finite boxes only), and ``gamma``
    evaluates ``xi`` against the image measure under ``gamma^{-1}``.
    """
    a0, a1 = _alpha_range(xi.box.a, xi.box.b)
    b0, b1 = _alpha_range(xi.box.c, xi.box.d)
    ea = _breaks(xi, xi.side1, a0, a1)
    eb = _breaks(xi, xi.side2, b0, b1)
    if gamma is not None:
        gi = gamma.inverse()
        f0 = (lambda x: x, lambda x: np.ones_like(x)) if boundary is None else boundary
        f = (lambda x: f0[0](gi.apply_value(x)),
             lambda x: f0[1](gi.apply_value(x)) * gi.derivatives(x)[0])
        boundary = f
    prev = None
    for level in range(max_level + 1):
        xa, wa = _gl_points(_panels(ea, level))
        xb, wb = _gl_points(_panels(eb, level))
        total = 0j
        za, wza = np.sin(xa), np.cos(xa)
        for k in range(0, len(xb), 256):
            bb = xb[k:k + 256]
            zb, wzb = np.sin(bb), np.cos(bb)
            vals = xi.eval_h(za[:, None], wza[:, None], zb[None, :], wzb[None, :])
            if boundary is None:
                dens = 1.0 / np.sin(xa[:, None] - bb[None, :]) ** 2
            else:
                f, fp = boundary
                x = np.tan(xa)[:, None]
                y = np.tan(bb)[None, :]
                dens = (fp(x) * fp(y) / (f(x) - f(y)) ** 2
                        / (np.cos(xa)[:, None] ** 2 * np.cos(bb)[None, :] ** 2))
            total += np.einsum("i,ij,j->", wa, vals * dens, wb[k:k + 256])
        if prev is not None and abs(total - prev) < tol:
            return total if abs(total.imag) > 0 else total.real
        prev = total
    raise QuadratureBudgetExceeded(f"quadrature did not reach {tol:g} by level {max_level}")
