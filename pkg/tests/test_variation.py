import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from fracbv.errors import ConfigError
from fracbv.fracint import rl_integral
from fracbv.funcspace import SampledFunction, catalog_lookup, make_grid, sample
from fracbv.variation import (
    BOUNDED,
    INCONCLUSIVE,
    UNBOUNDED,
    Thresholds,
    bound_constant,
    bv_norm,
    classify,
    detect_uvp,
    discrete_tv,
    handle_tv,
    jordan_decompose,
    operator_bound_check,
    partition_tv,
    variation_profile,
    window_profile,
)

EPS = np.finfo(float).eps


def sampled(values, a=0.0, b=1.0):
    values = np.asarray(values, dtype=float)
    return SampledFunction(make_grid(a, b, values.size - 1), values)


def brute_force_sin_recip_tv(lo, hi):
    """TV of sin(1/x) on [lo, hi] by enumerating its extrema."""
    pts = [lo, hi]
    k = 0
    while True:
        t = 2.0 / ((2 * k + 1) * math.pi)
        if t < lo:
            break
        if t <= hi:
            pts.append(t)
        k += 1
    pts.sort()
    vals = [math.sin(1.0 / p) for p in pts]
    return math.fsum(abs(b - a) for a, b in zip(vals, vals[1:]))


# {{{ discrete TV, norm, Jordan


def test_tv_examples():
    g = make_grid(0, 1, 64)
    assert discrete_tv(sample(catalog_lookup("linear"), g)) == pytest.approx(1.0, rel=1e-15)
    x = g.nodes()
    assert discrete_tv(SampledFunction(g, np.abs(x - 0.5))) == pytest.approx(1.0, rel=1e-15)


def test_tv_sin_recip_extrema_aware():
    lo = 2.0 / (9.0 * math.pi)
    expected = brute_force_sin_recip_tv(lo, 1.0)
    # four full swings between t_4 and t_0, then the tail to sin(1)
    assert expected == pytest.approx(9.0 - math.sin(1.0), rel=1e-15)
    sr = catalog_lookup("sin_recip")
    assert handle_tv(sr, lo, 1.0, 64) == pytest.approx(expected, rel=1e-14)
    # a plain uniform grid only bounds it from below
    plain = sample(sr, make_grid(lo, 1.0, 64))
    assert discrete_tv(plain) <= expected


def test_tv_index_checks():
    f = sampled([0, 1, 0])
    with pytest.raises(ConfigError):
        discrete_tv(f, 2, 1)
    with pytest.raises(ConfigError):
        discrete_tv(f, 0, 3)
    assert discrete_tv(f, 1, 1) == 0.0


def test_partition_tv_is_dominated_by_grid_tv():
    rng = np.random.default_rng(0)
    f = sampled(rng.standard_normal(65))
    idx = np.sort(rng.choice(np.arange(1, 64), size=10, replace=False))
    sub = np.r_[0, idx, 64]
    assert partition_tv(f, sub) <= discrete_tv(f)
    assert partition_tv(f, np.arange(65)) == discrete_tv(f)
    with pytest.raises(ConfigError):
        partition_tv(f, [0, 5, 3])


@given(seed=st.integers(0, 2**31), k=st.integers(1, 8))
def test_tv_refinement_monotone(seed, k):
    h = catalog_lookup("piecewise_linear_random", {"k": 2**k // 2 or 1, "seed": seed})
    coarse = sample(h, make_grid(0, 1, 2**k))
    fine = coarse.resample(make_grid(0, 1, 2 ** (k + 3)))
    assert discrete_tv(fine) >= discrete_tv(coarse) - 4 * EPS * discrete_tv(coarse)


@given(seed=st.integers(0, 2**31), mid=st.integers(0, 64))
def test_tv_additive(seed, mid):
    f = sampled(np.random.default_rng(seed).standard_normal(65))
    whole = discrete_tv(f)
    assert discrete_tv(f, 0, mid) + discrete_tv(f, mid, 64) == pytest.approx(whole, rel=4 * EPS)


def test_pl_random_grid_tv_exact():
    h = catalog_lookup("piecewise_linear_random", {"k": 8, "seed": 9})
    exact = math.fsum(abs(np.diff(h(h.breakpoints))))
    for n in (8, 64, 1024):
        assert discrete_tv(sample(h, make_grid(0, 1, n))) == pytest.approx(exact, rel=1e-13)


def test_bv_norm_examples():
    g = make_grid(0, 1, 32)
    assert bv_norm(sample(catalog_lookup("constant", {"c": -2.5}), g)) == 2.5
    assert bv_norm(sample(catalog_lookup("linear"), g)) == pytest.approx(1.0)
    assert bv_norm(sample(catalog_lookup("linear", {"intercept": -1}), g)) == pytest.approx(2.0)


@given(seed=st.integers(0, 2**31), lam=st.floats(-100, 100))
def test_bv_norm_axioms(seed, lam):
    rng = np.random.default_rng(seed)
    f, g = sampled(rng.standard_normal(33)), sampled(rng.standard_normal(33))
    assert bv_norm(f + g) <= (bv_norm(f) + bv_norm(g)) * (1 + 8 * EPS)
    assert bv_norm(lam * f) == pytest.approx(abs(lam) * bv_norm(f), rel=8 * EPS, abs=1e-300)
    assert bv_norm(0.0 * f) == 0.0


def test_bv_norm_zero_only_for_zero():
    assert bv_norm(sampled([0, 0, 0])) == 0
    assert bv_norm(sampled([0, 0, 1e-300])) > 0


def check_jordan(f):
    g, h = jordan_decompose(f)
    assert np.all(np.diff(g.values) >= 0) and np.all(np.diff(h.values) >= 0)
    scale = max(1.0, np.abs(g.values).max(), np.abs(h.values).max())
    assert np.max(np.abs(g.values - h.values - f.values)) <= 4 * EPS * scale
    f0 = f.values[0]
    if f0 >= 0:
        assert g.values[0] == f0 >= 0 and h.values[0] == 0
    else:
        assert g.values[0] == 0 and h.values[0] > 0
    split = (g.values[-1] - g.values[0]) + (h.values[-1] - h.values[0])
    assert split == pytest.approx(discrete_tv(f), rel=1e-13, abs=1e-300)
    return g, h


def test_jordan_examples():
    g = make_grid(0, 1, 64)
    x = g.nodes()
    up, flat = check_jordan(sample(catalog_lookup("linear"), g))
    np.testing.assert_array_equal(up.values, x)
    assert np.all(flat.values == 0)

    up, down = check_jordan(sample(catalog_lookup("linear", {"intercept": -1}), g))
    np.testing.assert_allclose(up.values, x, atol=1e-15)
    assert np.all(down.values == 1.0)

    # |x - 0.5|: rises after 0.5 on top of f(0) = 0.5, falls before
    up, down = check_jordan(SampledFunction(g, np.abs(x - 0.5)))
    np.testing.assert_allclose(up.values, np.maximum(x - 0.5, 0) + 0.5, atol=1e-15)
    np.testing.assert_allclose(down.values, np.minimum(x, 0.5), atol=1e-15)


@given(seed=st.integers(0, 2**31), shift=st.floats(-3, 3), n=st.integers(1, 300))
def test_jordan_property(seed, shift, n):
    rng = np.random.default_rng(seed)
    check_jordan(sampled(shift + np.cumsum(rng.standard_normal(n + 1))))


@pytest.mark.parametrize("name", ["sin_recip", "weierstrass", "takagi"])
def test_jordan_rough_functions(name):
    check_jordan(sample(catalog_lookup(name), make_grid(0, 1, 4096)))


# }}}


# {{{ classification and profiles


def test_classify_rule():
    th = Thresholds()
    assert classify([2.0, 2.0, 2.0], 100.0, 1.0, th) == UNBOUNDED
    assert classify([2.0, 2.0, 2.0], 5.0, 1.0, th) == INCONCLUSIVE  # below TV floor
    assert classify([1.2, 1.0, 1.0, 1.01], 1.0, 1.0, th) == BOUNDED
    assert classify([1.0, 1.2, 1.0], 1.0, 1.0, th) == INCONCLUSIVE
    assert classify([1.0, 1.0], 1.0, 1.0, th) == INCONCLUSIVE  # too few ratios
    degenerate = Thresholds(rho=1.0)
    assert degenerate.degenerate
    assert classify([4.0, 4.0, 4.0], 1e6, 1.0, degenerate) == INCONCLUSIVE


@pytest.mark.parametrize("kwargs", [
    {"m": 0}, {"levels": 1}, {"levels": 3, "m": 3}, {"n_per_level": 3},
    {"stride": 0}, {"rho": -1}, {"base_delta": 0.0},
])
def test_thresholds_validation(kwargs):
    with pytest.raises(ConfigError):
        Thresholds(**kwargs)


def test_profile_linear_bounded():
    rep = variation_profile(catalog_lookup("linear"), 0.3, 0.1, 5, 16)
    assert rep.classification == BOUNDED
    deltas = [d for d, _, _ in rep.levels]
    assert deltas == sorted(deltas, reverse=True)
    ns = [n for _, n, _ in rep.levels]
    assert ns == sorted(ns)
    for d, _, tv in rep.levels:
        assert tv == pytest.approx(2 * d, rel=1e-12)


def test_profile_sin_recip_at_zero_unbounded():
    rep = variation_profile(catalog_lookup("sin_recip"), 0.0, 1 / 16, 6, 64)
    assert rep.classification == UNBOUNDED
    assert all(r > 1.5 for r in rep.growth_ratios)
    tvs = [tv for _, _, tv in rep.levels]
    assert all(b > a for a, b in zip(tvs, tvs[1:]))


def test_profile_sin_recip_interior_bounded():
    sr = catalog_lookup("sin_recip")
    rep = variation_profile(sr, 0.5, 0.25, 5, 32)
    assert rep.classification == BOUNDED
    # f is C^1 on [0.25, 0.75]: TV = integral of |f'|
    for delta, _, tv in rep.levels:
        lo, hi = 0.5 - delta, 0.5 + delta
        ref, _ = integrate.quad(lambda x: abs(math.cos(1 / x)) / x**2, lo, hi,
                                limit=200, epsabs=1e-13, epsrel=1e-13)
        assert tv == pytest.approx(ref, rel=1e-6)


def test_profile_errors():
    with pytest.raises(ConfigError):
        variation_profile(catalog_lookup("linear"), 1.5, 0.1, 4, 16)
    with pytest.raises(ConfigError):
        variation_profile(catalog_lookup("linear"), 0.5, 0.1, 1, 16)


def test_window_profile():
    sr = catalog_lookup("sin_recip")
    assert window_profile(sr, 0.25, 0.75).classification == BOUNDED
    assert window_profile(sr, 0.0, 0.5).classification == UNBOUNDED
    assert window_profile(catalog_lookup("power", {"beta": 0.5}), 0.0, 0.5).classification == BOUNDED
    with pytest.raises(ConfigError):
        window_profile(sr, 0.5, 0.25)


def test_detect_uvp_examples():
    grid = make_grid(0, 1, 16)
    sr = catalog_lookup("sin_recip")
    found = detect_uvp(sr, grid)
    assert found.points == (0.0,)
    assert found.inconclusive == ()
    assert len(found.reports) == 17

    for name, params in [("linear", {}), ("power", {"beta": 2.0}), ("power", {"beta": 0.5}),
                         ("constant", {})]:
        res = detect_uvp(catalog_lookup(name, params), grid)
        assert res.points == () and res.inconclusive == ()

    image = rl_integral(sample(sr, make_grid(0, 1, 4096)), 1.0).as_handle()
    assert detect_uvp(image, grid).points == ()


def test_detect_uvp_candidates_include_singular_points():
    sr = catalog_lookup("sin_recip")
    # stride skips node 0 only if it is not declared singular; it always is
    res = detect_uvp(sr, make_grid(0, 1, 16), Thresholds(stride=3))
    assert 0.0 in [r.center for r in res.reports]
    assert res.points == (0.0,)


def test_detect_uvp_degenerate_threshold():
    res = detect_uvp(catalog_lookup("sin_recip"), make_grid(0, 1, 4), Thresholds(rho=1.0))
    assert res.points == ()
    assert len(res.inconclusive) == 5


# }}}


# {{{ operator bound


def test_bound_constant():
    assert bound_constant(0.5, 0.0, 1.0) == pytest.approx(2.2567583341910251, rel=1e-15)
    assert bound_constant(1.0, 0.0, 2.0) == pytest.approx(4.0)


def test_operator_bound_constant_function():
    rep = operator_bound_check(sample(catalog_lookup("constant"), make_grid(0, 1, 1024)), 0.5)
    assert rep.f_bv == 1.0
    assert rep.image_bv == pytest.approx(1.1283791670955126, rel=1e-13)
    assert rep.constant == pytest.approx(2.2567583341910251, rel=1e-15)
    assert rep.ratio == pytest.approx(0.5, rel=1e-13)
    assert rep.ok


def test_operator_bound_zero_function():
    rep = operator_bound_check(sample(catalog_lookup("constant", {"c": 0}), make_grid(0, 1, 8)), 0.5)
    assert rep.ratio == 0.0 and rep.ok


def test_operator_bound_regression_baseline():
    h = catalog_lookup("piecewise_linear_random", {"k": 8, "seed": 7})
    rep = operator_bound_check(sample(h, make_grid(0, 1, 4096)), 0.5)
    assert rep.ratio <= 1.0
    # measured at n=4096
    assert rep.ratio == pytest.approx(0.10214890778994684, rel=1e-9)
    assert rep.f_bv == pytest.approx(6.625263301841365, rel=1e-13)


def test_operator_bound_flags_discontinuous_input():
    rep = operator_bound_check(sample(catalog_lookup("sin_recip"), make_grid(0, 1, 256)), 0.5)
    assert rep.continuous is False
    assert rep.to_dict()["continuous"] is False


@given(seed=st.integers(0, 2**31), alpha=st.sampled_from([0.25, 0.5, 0.75, 1.0, 1.5]))
def test_operator_bound_property(seed, alpha):
    h = catalog_lookup("piecewise_linear_random", {"k": 8, "seed": seed})
    rep = operator_bound_check(sample(h, make_grid(0, 1, 256)), alpha)
    assert rep.ratio <= 1.0 + rep.slack
    # the inequality holds with a factor 2 to spare in the continuum
    assert rep.ratio <= 0.5 + 1e-12


# }}}
