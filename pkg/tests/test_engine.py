import math

import numpy as np
import pytest

from liouville.engine import (DistributionHandle, EvalParams, GammaSampler, eval_current, eval_derivative,
                              eval_extension, quadrature_oracle, seminorm)
from liouville.errors import OutsideNeighborhood, ToleranceNotReached
from liouville.families import CyclicFuchsianGroup, IdentityFamily, PowerStretchFamily, VerticalStretchFamily
from liouville.holder import bump, product_bump, step_function, zero_function
from liouville.projective import GeodesicBox, MobiusTransform, log_cross_ratio
from liouville.verify import random_box

BOX = GeodesicBox(0, 1, 2, 3)
POWER = PowerStretchFamily()


def power_map(t):
    return lambda z, w: POWER.apply_h(t, z, w)


def test_step_function_exact():
    v, tr = eval_current(step_function(BOX))
    assert v == pytest.approx(math.log(4 / 3), abs=1e-12)
    assert max(tr.deltas) < 1e-12
    v, _ = eval_current(step_function(BOX), boundary_map=power_map(0.999999999999))
    assert v == pytest.approx(math.log(32 / 27), rel=1e-9)
    v, _ = eval_extension(step_function(BOX), None, POWER, 0.1j)
    assert v == pytest.approx(log_cross_ratio(0, 1, 2 ** (1 + 0.1j), 3 ** (1 + 0.1j)), abs=1e-12)


def test_derivative_spot_value():
    v, _ = eval_derivative(step_function(BOX), None, POWER, 0.0)
    assert v == pytest.approx(0.5 * math.log(3) - math.log(2), abs=1e-12)
    assert v.real == pytest.approx(-0.143841, abs=1e-6)


@pytest.mark.parametrize("box", [BOX, GeodesicBox(-1, 0, 1 / 3, 1), GeodesicBox(5, "inf", -4, -1)], ids=repr)
def test_bump_matches_oracle(box):
    for f in (bump(box), product_bump(box)):
        v, _ = eval_current(f)
        q = quadrature_oracle(f)
        assert abs(v - q) <= 1e-5 * abs(q)


def test_oracle_examples():
    assert quadrature_oracle(step_function(BOX)) == pytest.approx(math.log(4 / 3), abs=1e-8)
    assert quadrature_oracle(zero_function(BOX)) == 0
    f = bump(BOX)
    assert abs(quadrature_oracle(f, tol=1e-10) - quadrature_oracle(f, tol=5e-11)) < 1e-7


def test_oracle_with_boundary_map_and_gamma():
    f = bump(BOX)
    t = 0.3
    fx = lambda x: x * np.abs(x) ** t
    dfx = lambda x: (1 + t) * np.abs(x) ** t
    q = quadrature_oracle(f, boundary=(fx, dfx))
    v, _ = eval_extension(f, None, POWER, t)
    assert abs(v - q) <= 1e-5 * abs(q)
    g = MobiusTransform(2, 1, 1, 1)
    assert quadrature_oracle(f, gamma=g) == pytest.approx(quadrature_oracle(f), rel=1e-9)


def test_identity_gamma_invariance_and_extension_at_zero():
    f = bump(BOX)
    v0, _ = eval_current(f)
    v1, _ = eval_extension(f, None, POWER, 0.0)
    assert v1 == pytest.approx(v0, abs=1e-15)
    g = MobiusTransform(1, -2, 1, 3)
    v2, _ = eval_current(f, g)
    assert abs(v2 - v0) <= 1e-8


def test_real_t_is_real_and_matches_eval_current():
    f = bump(BOX)
    for t in (0.2, -0.3):
        v, _ = eval_extension(f, None, POWER, t)
        w, _ = eval_current(f, None, power_map(t))
        assert abs(v.imag) <= 1e-9
        assert v == pytest.approx(w, abs=1e-14)


def test_continuity_in_imaginary_direction():
    f = bump(BOX)
    vs = [eval_extension(f, None, POWER, 0.2 + 1j * s)[0] for s in (1e-2, 1e-3, 1e-4)]
    assert abs(vs[2].imag) < abs(vs[1].imag) < abs(vs[0].imag)
    assert abs(vs[2].imag) < 1e-4


def test_linearity():
    rng = np.random.default_rng(4)
    p = EvalParams()
    for _ in range(5):
        box = random_box(rng)
        x1, x2 = bump(box), product_bump(box, 1.0)
        a, b = complex(*rng.normal(size=2)), complex(*rng.normal(size=2))
        w12 = eval_extension(a * x1 + b * x2, None, POWER, 0.1 + 0.1j, p)[0]
        w1 = eval_extension(x1, None, POWER, 0.1 + 0.1j, p)[0]
        w2 = eval_extension(x2, None, POWER, 0.1 + 0.1j, p)[0]
        assert abs(w12 - a * w1 - b * w2) <= (abs(a) + abs(b) + 1) * p.tolerance


def test_derivative_matches_central_differences():
    rng = np.random.default_rng(8)
    p = EvalParams(tolerance=1e-11, n_max=14)
    h = 1e-4
    n_cases = 0
    for _ in range(10):
        box = random_box(rng, min_gap=0.3)
        xi = step_function(box)
        t = complex(*rng.uniform(-0.3, 0.3, 2))
        d = eval_derivative(xi, None, POWER, t, p)[0]
        fd = (eval_extension(xi, None, POWER, t + h, p)[0] - eval_extension(xi, None, POWER, t - h, p)[0]) / (2 * h)
        assert abs(d - fd) <= 1e-4 * abs(fd)
        n_cases += 1
    f = bump(BOX)
    d = eval_derivative(f, None, POWER, 0.1, EvalParams(tolerance=1e-9, n_max=14))[0]
    p = EvalParams(tolerance=1e-10, n_max=14)
    fd = (eval_extension(f, None, POWER, 0.1 + h, p)[0] - eval_extension(f, None, POWER, 0.1 - h, p)[0]) / (2 * h)
    assert abs(d - fd) <= 1e-4 * abs(fd)
    assert n_cases == 10


def test_vertical_stretch_is_identity():
    rng = np.random.default_rng(9)
    vert = VerticalStretchFamily()
    for _ in range(5):
        xi = bump(random_box(rng))
        t = complex(*rng.uniform(-0.4, 0.4, 2))
        assert eval_extension(xi, None, vert, t)[0] == eval_current(xi)[0]
        assert eval_derivative(xi, None, vert, t)[0] == 0


def test_tolerance_not_reached_carries_trace():
    with pytest.raises(ToleranceNotReached) as ei:
        eval_current(bump(BOX), params=EvalParams(tolerance=1e-14, n_max=5))
    assert ei.value.trace.reason == "max-level"
    assert ei.value.trace.n_levels == 6
    assert ei.value.value == ei.value.trace.value


def test_outside_neighbourhood():
    # folding the boundary reverses one side, so cells cross the branch cut
    fold = lambda z, w: ((z - 1.5 * w) ** 2, w * w)
    with pytest.raises(OutsideNeighborhood) as ei:
        eval_current(bump(BOX), boundary_map=fold)
    assert ei.value.level == 0 and ei.value.cell is not None
    # squeezing the gap between the two sides inflates |cr - 1| past the guard
    def squeeze(z, w, eps=1e-3):
        x = (z / w).real
        return np.minimum(x, 1) + eps * np.clip(x - 1, 0, 1) + np.maximum(x - 2, 0) + 0j, np.ones_like(w)
    with pytest.raises(OutsideNeighborhood) as ei:
        eval_current(bump(BOX), boundary_map=squeeze, params=EvalParams(guard=0.5))
    assert ei.value.level == 2 and ">= 0.5" in str(ei.value)
    with pytest.raises(OutsideNeighborhood) as ei:
        eval_current(bump(BOX), boundary_map=squeeze, params=EvalParams(guard=1e-2))
    assert ei.value.level == 4


def test_trace_records_and_rate():
    v, tr = eval_current(bump(BOX), params=EvalParams(n_min=8))
    recs = tr.records(gamma_index=3)
    assert [r["n"] for r in recs] == tr.levels
    assert recs[0]["delta"] is None and recs[1]["delta"] == tr.deltas[0]
    assert tr.fitted_ratio(2, 8) <= -0.35
    assert tr.reason == "tolerance"


def test_threads_do_not_change_results():
    xi = bump(BOX)
    a = eval_extension(xi, None, POWER, 0.1j, EvalParams(n_min=9))[0]
    b = eval_extension(xi, None, POWER, 0.1j, EvalParams(n_min=9, threads=4))[0]
    assert a == b


def test_gamma_sampler():
    s = GammaSampler(8)
    assert len(s) == 3 * math.comb(8, 3)
    assert s.transform(s.identity_index()).allclose(MobiusTransform.identity())
    for _, g in s:
        assert g.is_real() and abs(g.det - 1) < 1e-12 and g.preserves_orientation()
    big = GammaSampler(16)
    assert set(s.points) <= set(big.points)
    sh = GammaSampler(8, seed=5)
    assert sorted(sh.triples) == sorted(s.triples) and sh.triples != s.triples
    with pytest.raises(ValueError):
        GammaSampler(6)


def test_seminorm_identity_spread_and_monotone():
    xi = bump(BOX)
    h = DistributionHandle(IdentityFamily())
    r8 = seminorm(h, xi, GammaSampler(8))
    assert r8.spread <= 1e-8
    hp = DistributionHandle(POWER, 0.4, CyclicFuchsianGroup(2.0))
    a = seminorm(hp, xi, GammaSampler(4))
    b = seminorm(hp, xi, GammaSampler(8))
    assert math.isfinite(b.value) and b.argmax in b.values
    assert b.value >= a.value - 1e-12
