import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from interlacements import DiscreteDistribution, optimal_coupling, poisson_shift_tv, ppp_gap, ppp_tv_upper, tv
from interlacements import coupling as cp

probs = st.lists(st.floats(0.01, 1.0), min_size=1, max_size=5)


def _dist(ws, keys=None):
    keys = keys or list(range(len(ws)))
    return DiscreteDistribution.from_weights(keys, ws)


def test_distribution_validation():
    with pytest.raises(ValueError):
        DiscreteDistribution((0, 1), np.array([0.5, 0.6]))
    with pytest.raises(ValueError):
        DiscreteDistribution((0, 0), np.array([0.5, 0.5]))
    m = DiscreteDistribution((0, 1), np.array([2.0, 1.0]), kind="measure")
    assert m.total == 3.0 and m.normalized()[0] == pytest.approx(2 / 3)
    with pytest.raises(ValueError):
        tv(m, m)


def test_tv_disjoint_and_equal():
    p = _dist([1, 1])
    q = _dist([1, 1], keys=["a", "b"])
    assert tv(p, q) == 1.0
    assert tv(p, p) == 0.0


def test_poisson_shift_exact_at_one():
    exact, bound = poisson_shift_tv(1.0)
    assert abs(exact - math.exp(-1)) <= 1e-12
    assert bound == 0.5


@pytest.mark.parametrize("lam", [0.1, 0.5, 1, 2, 5, 10, 50, 100, 3.7])
def test_poisson_shift_telescoping_oracle(lam):
    # the positive part of pmf(k) - pmf(k-1) telescopes to pmf(ceil(lam) - 1)
    exact, bound = poisson_shift_tv(lam)
    assert exact == pytest.approx(stats.poisson.pmf(math.ceil(lam) - 1, lam), abs=1e-12)
    assert exact <= bound


def test_ppp_upper_bound_dominates_exact():
    nu = DiscreteDistribution((0, 1), np.array([2.0, 3.0]), kind="measure")
    pi = _dist([0.3, 0.7])
    eps = 0.3
    gap = ppp_gap(nu, pi, eps)
    a = max(gap, 0.05)
    assert cp.ppp_tv_exact(nu, pi) <= ppp_tv_upper(nu, pi, eps, a) + 1e-9
    with pytest.raises(ValueError):
        ppp_tv_upper(nu, pi, 0.01, 0.0)


def test_ppp_exact_single_site_matches_shift():
    nu = DiscreteDistribution(("x",), np.array([2.5]), kind="measure")
    pi = _dist([1.0], keys=["x"])
    assert cp.ppp_tv_exact(nu, pi) == pytest.approx(poisson_shift_tv(2.5)[0], abs=1e-8)


def test_poisson_bernoulli_linear_in_p():
    base = cp.poisson_bernoulli_tv(2.0, 1.0)
    for p in (0.1, 0.4, 0.9):
        assert cp.poisson_bernoulli_tv(2.0, p) == pytest.approx(p * base, abs=1e-15)
    assert cp.poisson_bernoulli_tv(0.0, 0.3) == 0.3


def test_lower_constant_positive_and_below_a():
    c = cp.ppp_tv_lower_constant(0.3, 0.2, lam_step=1e-2, p_step=1e-3)
    assert 0 < c <= 0.2 + 1e-12


def test_optimal_coupling_attains_tv():
    p = _dist([0.5, 0.3, 0.2])
    q = _dist([0.2, 0.3, 0.5])
    rng = np.random.Generator(np.random.Philox(11))
    n = 20000
    draws = [optimal_coupling(p, q, rng) for _ in range(n)]
    mismatch = sum(x != y for x, y in draws) / n
    d = tv(p, q)
    assert abs(mismatch - d) <= 4 * math.sqrt(d * (1 - d) / n)
    xs = np.bincount([x for x, _ in draws], minlength=3) / n
    ys = np.bincount([y for _, y in draws], minlength=3) / n
    assert np.all(np.abs(xs - p.mass) <= 4 * np.sqrt(p.mass * (1 - p.mass) / n))
    assert np.all(np.abs(ys - q.mass) <= 4 * np.sqrt(q.mass * (1 - q.mass) / n))


@given(probs, probs, probs)
def test_tv_is_a_metric(a, b, c):
    m = max(len(a), len(b), len(c))
    pad = lambda w: list(w) + [0.0] * (m - len(w))
    p, q, r = _dist(pad(a)), _dist(pad(b)), _dist(pad(c))
    assert 0 <= tv(p, q) <= 1
    assert tv(p, q) == pytest.approx(tv(q, p), abs=1e-15)
    assert tv(p, r) <= tv(p, q) + tv(q, r) + 1e-12


@given(probs, probs, st.floats(0.05, 2.0), st.floats(0.05, 2.0))
def test_gap_nonincreasing_in_eps(nu_w, pi_w, e1, e2):
    m = max(len(nu_w), len(pi_w))
    nu = DiscreteDistribution(tuple(range(len(nu_w))), np.array(nu_w) * 3, kind="measure")
    pi = _dist(list(pi_w) + [0.0] * (m - len(pi_w)))
    lo, hi = sorted((e1, e2))
    assert ppp_gap(nu, pi, hi) <= ppp_gap(nu, pi, lo) + 1e-15
