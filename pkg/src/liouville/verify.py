"""Numerical checks of the quantitative estimates, each returning a report
with per-sample rows (written to CSV by the CLI) and a pass flag."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .currents import angle_points, cell_measure_array, partition_box
from .engine import EvalParams, eval_derivative, eval_extension
from .errors import InsufficientLevels
from .families import PowerStretchFamily, conjugated_group, max_dilatation
from .metrics import check_punctured_disk_bound, decay_bound, dist_punctured_disk, radius_r_beta
from .projective import GeodesicBox

SEED = 20240611


@dataclass
class Report:
    name: str
    columns: list
    rows: list = field(default_factory=list)
    passed: bool = True
    info: dict = field(default_factory=dict)

    @property
    def worst_margin(self):
        if "margin" in self.info:
            return self.info["margin"]
        m = [r["margin"] for r in self.rows if "margin" in r and r["margin"] is not None]
        return min(m) if m else math.nan

    def summary(self):
        return {"name": self.name, "pass": bool(self.passed), "worst_margin": self.worst_margin,
                "samples": len(self.rows), **self.info}


# ------------------------------------------------------------------ quadruples

def _det(z1, w1, z2, w2):
    return z1 * w2 - z2 * w1


def _u_h(Z, W):
    """``cr - 1`` of homogeneous quadruples (last axis of length 4)."""
    a, b, c, d = (Z[..., k] for k in range(4))
    aw, bw, cw, dw = (W[..., k] for k in range(4))
    return _det(a, aw, b, bw) * _det(c, cw, d, dw) / (_det(a, aw, d, dw) * _det(b, bw, c, cw))


def _du_h(Z, W, dZ, dW):
    """``d/dt (cr - 1)`` from derivatives of the homogeneous representatives."""
    def dd(i, j):
        return (_det(Z[..., i], W[..., i], Z[..., j], W[..., j]),
                dZ[..., i] * W[..., j] + Z[..., i] * dW[..., j] - dZ[..., j] * W[..., i] - Z[..., j] * dW[..., i])

    ab, cd, ad, bc = dd(0, 1), dd(2, 3), dd(0, 3), dd(1, 2)
    u = ab[0] * cd[0] / (ad[0] * bc[0])
    return u * (ab[1] / ab[0] + cd[1] / cd[0] - ad[1] / ad[0] - bc[1] / bc[0])


def sample_quadruples(n, s_lo=1e-6, s_hi=1e-3, seed=SEED):
    """Real quadruples ``g^{-1}(1, 1+s, inf, 0)`` with ``s`` log-uniform and
    ``g`` a random element of PSL2(R); returned as unit-norm homogeneous
    arrays of shape ``(n, 4)`` together with ``s``."""
    rng = np.random.default_rng(seed)
    s = 10 ** rng.uniform(math.log10(s_lo), math.log10(s_hi), n)
    # random SL2(R) matrices with moderate entries
    M = rng.normal(size=(n, 2, 2))
    dt = M[:, 0, 0] * M[:, 1, 1] - M[:, 0, 1] * M[:, 1, 0]
    flip = dt < 0
    M[flip, 0] *= -1
    M /= np.sqrt(np.abs(dt))[:, None, None]
    base_z = np.stack([np.ones(n), 1 + s, np.ones(n), np.zeros(n)], axis=1)
    base_w = np.stack([np.ones(n), np.ones(n), np.zeros(n), np.ones(n)], axis=1)
    Z = M[:, 0, 0, None] * base_z + M[:, 0, 1, None] * base_w
    W = M[:, 1, 0, None] * base_z + M[:, 1, 1, None] * base_w
    nrm = np.hypot(Z, W)
    return (Z / nrm).astype(complex), (W / nrm).astype(complex), s


def _fit_exponent(s, y):
    return float(np.polyfit(np.log(s), np.log(y), 1)[0])


# ------------------------------------------------------------------ decay

def verify_decay(fam=None, ts=(0.25, 0.5, 1.0), n=10 ** 4, eps=0.1, s_range=(1e-6, 1e-3), K=None,
                 seed=SEED):
    """``|cr(f^t q) - 1| <= |cr(q) - 1| ** (1/(K + eps))`` on sampled quadruples.

    ``K`` defaults to the dilatation of ``f^t`` itself.
    """
    fam = fam or PowerStretchFamily()
    Z, W, _ = sample_quadruples(n, *s_range, seed=seed)
    s = np.abs(_u_h(Z, W))
    rep = Report("decay", ["t_re", "t_im", "K", "s", "lhs", "rhs", "margin", "ok"])
    fits = {}
    for t in ts:
        Kt = fam.dilatation(t) if K is None else K
        fz, fw = fam.apply_h(t, Z, W)
        lhs = np.abs(_u_h(fz, fw))
        rhs = decay_bound(s, Kt, eps)
        ok = lhs <= rhs
        rep.passed &= bool(ok.all())
        fit = _fit_exponent(s, lhs)
        fits[complex(t)] = fit
        rep.passed &= fit >= 1.0 / (Kt + eps)
        for k in range(n):
            rep.rows.append({"t_re": complex(t).real, "t_im": complex(t).imag, "K": Kt, "s": s[k],
                             "lhs": lhs[k], "rhs": rhs[k], "margin": rhs[k] - lhs[k], "ok": int(ok[k])})
    rep.info["fitted_exponents"] = {str(k): v for k, v in fits.items()}
    rep.info["violations"] = sum(1 - r["ok"] for r in rep.rows)
    return rep


# ------------------------------------------------------------------ derivative

def verify_derivative_bound(fam=None, r=0.5, n=10 ** 4, eps=0.1, s_range=(1e-6, 1e-3), seed=SEED):
    """``|d/dt cr(f^t q)| <= C |cr - 1|^{1/(K_r+eps)} log(1/|cr - 1|)`` with
    ``C`` frozen at twice the largest ratio seen on the first half of the
    samples; the second half must have no violations."""
    fam = fam or PowerStretchFamily()
    Kr = max_dilatation(fam, r)
    rng = np.random.default_rng([seed, 1])
    Z, W, _ = sample_quadruples(n, *s_range, seed=seed)
    s = np.abs(_u_h(Z, W))
    t = r * np.sqrt(rng.uniform(size=n)) * np.exp(2j * np.pi * rng.uniform(size=n))
    dg = np.empty(n)
    for k in range(n):
        fz, fw = fam.apply_h(t[k], Z[k], W[k])
        dz, dw = fam.boundary_dt(t[k], Z[k], W[k])
        dg[k] = abs(_du_h(fz, fw, dz, dw))
    rhs = s ** (1.0 / (Kr + eps)) * np.log(1.0 / s)
    half = n // 2
    c_fit = 2.0 * float(np.max(dg[:half] / rhs[:half]))
    ok = dg <= c_fit * rhs
    rep = Report("derivative", ["t_re", "t_im", "s", "deriv", "bound", "margin", "calibration", "ok"])
    for k in range(n):
        rep.rows.append({"t_re": t[k].real, "t_im": t[k].imag, "s": s[k], "deriv": dg[k],
                         "bound": c_fit * rhs[k], "margin": c_fit * rhs[k] - dg[k],
                         "calibration": int(k < half), "ok": int(ok[k])})
    held = ok[half:]
    rep.passed = bool(held.all())
    rep.info.update({"C_fit": c_fit, "K_r": Kr, "violations": int((~held).sum())})
    return rep


# ------------------------------------------------------------------ holomorphy

def verify_holomorphy(xi, fam=None, t0=0.0, radius=0.2, m_points=16, params=EvalParams(),
                      h_dbar=1e-3, h_fd=1e-4):
    """Mean-value and ``d/d tbar`` residuals of ``F(t) = L-hat[f^t](xi)``, and
    agreement of the derivative series with central differences."""
    fam = fam or PowerStretchFamily()
    F = lambda t: eval_extension(xi, None, fam, t, params)[0]
    f0 = F(t0)
    ts = t0 + radius * np.exp(2j * np.pi * np.arange(m_points) / m_points)
    vals = np.array([F(t) for t in ts])
    sup = float(max(abs(f0), np.abs(vals).max()))
    mv = abs(f0 - vals.mean())
    fx = (F(t0 + h_dbar) - F(t0 - h_dbar)) / (2 * h_dbar)
    fy = (F(t0 + 1j * h_dbar) - F(t0 - 1j * h_dbar)) / (2 * h_dbar)
    dbar = abs(0.5 * (fx + 1j * fy))
    d_series = eval_derivative(xi, None, fam, t0, params)[0]
    d_fd = (F(t0 + h_fd) - F(t0 - h_fd)) / (2 * h_fd)
    rel = abs(d_series - d_fd) / max(abs(d_fd), 1e-300)
    tol = 1e-6 * (1 + sup)
    rep = Report("holomorphy", ["k", "t_re", "t_im", "F_re", "F_im"])
    for k, (t, v) in enumerate(zip(ts, vals)):
        rep.rows.append({"k": k, "t_re": t.real, "t_im": t.imag, "F_re": v.real, "F_im": v.imag})
    rep.info.update({"mean_value_residual": mv, "dbar_residual": dbar, "sup_F": sup,
                     "derivative_series": d_series, "derivative_fd": d_fd, "derivative_rel_err": rel,
                     "residual_tol": tol, "margin": tol - max(mv, dbar)})
    rep.passed = bool(mv <= tol and dbar <= tol and (abs(d_fd) < 1e-12 or rel <= 1e-4))
    return rep


# ------------------------------------------------------------------ rate

def verify_rate(xi, fam=None, t=0.0, params=EvalParams(), n_lo=2, n_hi=8, omega=None, slack=0.15):
    """log4-slope of ``|I_{n+1} - I_n|`` against ``1 - lam/2 - omega + slack``."""
    p = params.with_(n_min=max(params.n_min, n_hi), n_max=max(params.n_max, n_hi))
    v, trace = eval_extension(xi, None, fam, t, p)
    if trace.n_levels < 6:
        raise InsufficientLevels(f"only {trace.n_levels} levels computed")
    if omega is None:
        if fam is None or fam.boundary_is_identity or complex(t) == 0:
            omega = 1.0
        else:
            omega = 1.0 / (fam.dilatation(t) + 0.1)
    slope = trace.fitted_ratio(n_lo, n_hi)
    bound = 1.0 - xi.lam / 2.0 - omega + slack
    exact = max(trace.deltas[n_lo - 1:n_hi], default=0.0) < 1e-13
    rep = Report("rate", ["n", "I_re", "I_im", "delta"])
    for rec in trace.records():
        rep.rows.append({"n": rec["n"], "I_re": rec["I_re"], "I_im": rec["I_im"],
                         "delta": rec["delta"] if rec["delta"] is not None else ""})
    rep.info.update({"fitted_slope": slope, "bound": bound, "omega": omega, "exact": exact, "value": v,
                     "margin": bound - slope})
    rep.passed = bool(exact or slope <= bound)
    return rep


# ------------------------------------------------------------------ invariance

def verify_group_invariance(xi, group, fam=None, t=0.0, params=EvalParams(), A=None):
    """``|W(xi o A) - W(xi)| <= 2 tol`` for ``W = L-hat[f^t]`` and ``A`` in the group."""
    A = A or group.generator
    W0 = eval_extension(xi, None, fam, t, params)[0]
    W1 = eval_extension(xi.compose(A), None, fam, t, params)[0]
    diff = abs(W1 - W0)
    rep = Report("invariance", ["W_re", "W_im", "WA_re", "WA_im", "diff", "bound", "margin"])
    bound = 2 * params.tolerance
    rep.rows.append({"W_re": W0.real, "W_im": W0.imag, "WA_re": W1.real, "WA_im": W1.imag,
                     "diff": diff, "bound": bound, "margin": bound - diff})
    if fam is not None and not fam.boundary_is_identity:
        g2 = conjugated_group(fam, t, group)
        z = np.array([0.3 + 0.2j, 1.7, -2.5 + 1j])
        eq = np.abs(fam(t, A.apply_value(z)) - g2.apply_value(fam(t, z))).max()
        rep.info["equivariance_residual"] = float(eq)
    rep.info["diff"] = diff
    rep.passed = diff <= bound
    return rep


# ------------------------------------------------------------------ punctured disk

def verify_punctured_disk(betas=None, per_beta=200, seed=SEED):
    if betas is None:
        betas = np.round(np.arange(1, 20) * 0.05, 10)
    rng = np.random.default_rng(seed)
    rep = Report("punctured-disk", ["beta", "b1_re", "b1_im", "rho", "radius", "lhs", "rhs", "margin", "ok"])
    r_prev = 0.0
    for beta in betas:
        r = float(radius_r_beta(beta))
        rep.passed &= r > r_prev
        r_prev = r
        got = 0
        while got < per_beta:
            tau = rng.uniform(-r, r)
            ang = rng.uniform(-math.pi, math.pi)
            b1 = beta ** math.exp(tau) * complex(math.cos(ang), math.sin(ang))
            if not 0 < abs(b1) < 1 or dist_punctured_disk(beta, b1) >= r:
                continue
            rp = check_punctured_disk_bound(beta, b1)
            rep.rows.append({"beta": beta, "b1_re": b1.real, "b1_im": b1.imag, "rho": rp.rho,
                             "radius": rp.radius, "lhs": rp.lhs, "rhs": rp.rhs, "margin": rp.margin,
                             "ok": int(rp.holds)})
            rep.passed &= rp.holds
            got += 1
    rep.info["violations"] = sum(1 - r["ok"] for r in rep.rows)
    return rep


# ------------------------------------------------------------------ partition

def random_box(rng, min_gap=0.05):
    """Box with corners at sorted random angles (seen from ``i``) on the circle."""
    while True:
        th = np.sort(rng.uniform(0, 2 * math.pi, 4))
        gaps = np.diff(np.append(th, th[0] + 2 * math.pi))
        if gaps.min() > min_gap:
            break
    z, w = angle_points(th)
    return GeodesicBox(*zip(z.tolist(), w.tolist()))


def verify_partition(n_boxes=100, n_max=6, seed=SEED, tol=1e-10):
    rng = np.random.default_rng(seed)
    rep = Report("partition", ["box", "n", "L", "sum_error", "max_cell", "bound", "margin", "ok"])
    for b in range(n_boxes):
        box = random_box(rng)
        L = box.measure
        for n in range(n_max + 1):
            p = partition_box(box, n)
            cells = cell_measure_array(p, guard=None)
            err = abs(cells.sum() - L)
            mx = float(cells.real.max())
            ok = err <= tol * max(1.0, L) and mx <= p.bound * (1 + 1e-12) and np.all(cells.real > 0)
            rep.rows.append({"box": b, "n": n, "L": L, "sum_error": err, "max_cell": mx,
                             "bound": p.bound, "margin": p.bound - mx, "ok": int(ok)})
            rep.passed &= bool(ok)
    return rep
