import dataclasses

import numpy as np
import pytest

from particle_paths import builtin_flux, velocity_extrema


def grid_scan(model, lo, hi, n=20001):
    """Independent brute-force oracle: dense grid scan of a."""
    us = np.linspace(lo, hi, n)
    vals = np.asarray(model.eval_a(us))
    return vals.min(), vals.max(), us[np.argmin(vals)], us[np.argmax(vals)]


def test_burgers_extrema_affine():
    m = builtin_flux("burgers", u_high=3.0)
    res = velocity_extrema(m, 1.0, 3.0)
    ref = grid_scan(m, 1.0, 3.0)
    assert res.min_value == pytest.approx(ref[0], abs=1e-12) == 0.5
    assert res.max_value == pytest.approx(ref[1], abs=1e-12) == 1.5
    assert res.argmin == 1.0 and res.argmax == 3.0


def test_lwr_extrema():
    m = builtin_flux("lwr")
    res = velocity_extrema(m, 0.2, 0.8)
    ref = grid_scan(m, 0.2, 0.8)
    assert res.min_value == pytest.approx(ref[0], abs=1e-12) == pytest.approx(0.2)
    assert res.max_value == pytest.approx(ref[1], abs=1e-12) == pytest.approx(0.8)
    assert res.argmin == 0.8 and res.argmax == 0.2


def test_degenerate_interval():
    m = builtin_flux("burgers", u_high=3.0)
    res = velocity_extrema(m, 1.7, 1.7)
    assert res == (m.eval_a(1.7), m.eval_a(1.7), 1.7, 1.7)


def test_domain_violations():
    m = builtin_flux("burgers", u_high=1.0)
    with pytest.raises(ValueError):
        velocity_extrema(m, 0.5, 0.2)
    with pytest.raises(ValueError):
        velocity_extrema(m, -0.1, 0.2)
    with pytest.raises(ValueError):
        velocity_extrema(m, 0.0, 5.0)


def test_builtin_values():
    b = builtin_flux("burgers")
    assert float(b.eval_f(1.0)) == 0.5
    assert float(b.eval_a(1.0)) == 0.5
    assert b.fprime0 == 0.0
    lwr = builtin_flux("lwr", v_max=1.0, u_max=1.0)
    assert float(lwr.eval_f(0.5)) == pytest.approx(0.25)
    assert float(lwr.eval_a(0.5)) == pytest.approx(0.5)
    assert float(lwr.eval_a(0.0)) == 1.0


def test_unknown_flux_and_bad_params():
    with pytest.raises(ValueError):
        builtin_flux("upwind")
    with pytest.raises(ValueError):
        builtin_flux("tabulated", us=[0.0, 1.0], fs=[0.5, 1.0])  # f(0) != 0
    with pytest.raises(ValueError):
        builtin_flux("tabulated", us=[0.5, 1.0], fs=[0.0, 1.0])  # u0 != 0


def test_extrema_bracket_random_pairs():
    rng = np.random.default_rng(0)
    for name, top in (("burgers", 3.0), ("lwr", 1.0)):
        m = builtin_flux(name, u_high=top)
        pairs = np.sort(rng.uniform(0.0, top, size=(1000, 2)), axis=1)
        for lo, hi in pairs:
            res = velocity_extrema(m, lo, hi)
            samples = np.asarray(m.eval_a(np.linspace(lo, hi, 100)))
            assert np.all(samples >= res.min_value - 1e-10)
            assert np.all(samples <= res.max_value + 1e-10)


def test_numeric_fallback_matches_analytic():
    rng = np.random.default_rng(1)
    for name, top in (("burgers", 3.0), ("lwr", 1.0)):
        m = builtin_flux(name, u_high=top)
        numeric = dataclasses.replace(m, extremum_oracle=None)
        for lo, hi in np.sort(rng.uniform(0.0, top, size=(50, 2)), axis=1):
            exact = velocity_extrema(m, lo, hi)
            scanned = velocity_extrema(numeric, lo, hi)
            assert scanned.min_value == pytest.approx(exact.min_value, abs=1e-8)
            assert scanned.max_value == pytest.approx(exact.max_value, abs=1e-8)


def test_numeric_fallback_interior_minimum():
    # a(u) = u^2/3 - u/2 + 1/2 has its minimum at u = 3/4, value 5/16
    def f(u):
        u = np.asarray(u, dtype=float)
        return u**3 / 3.0 - u**2 / 2.0 + u / 2.0

    from particle_paths.flux import FluxModel

    m = FluxModel("cubic", f, 0.5, 1.25, 1.5)
    res = velocity_extrema(m, 0.0, 1.5)
    assert res.min_value == pytest.approx(5.0 / 16.0, abs=1e-8)
    assert res.argmin == pytest.approx(0.75, abs=1e-4)
    assert res.max_value == pytest.approx(0.5, abs=1e-8)


def test_min_monotone_under_interval_inclusion():
    rng = np.random.default_rng(2)
    m = builtin_flux("lwr")
    for _ in range(200):
        lo, hi = np.sort(rng.uniform(0.0, 1.0, size=2))
        if hi - lo < 1e-3:
            continue
        lo2, hi2 = np.sort(rng.uniform(lo, hi, size=2))
        outer = velocity_extrema(m, lo, hi)
        inner = velocity_extrema(m, lo2, hi2)
        assert outer.min_value <= inner.min_value + 1e-12
        assert outer.max_value >= inner.max_value - 1e-12


def test_tabulated_flux_tracks_its_source():
    us = np.linspace(0.0, 1.0, 2001)
    src = builtin_flux("burgers", u_high=1.0)
    tab = builtin_flux("tabulated", us=us, fs=np.asarray(src.eval_f(us)))
    assert tab.extremum_oracle is None
    rng = np.random.default_rng(3)
    for lo, hi in np.sort(rng.uniform(0.05, 1.0, size=(20, 2)), axis=1):
        got = velocity_extrema(tab, lo, hi)
        want = velocity_extrema(src, lo, hi)
        assert got.min_value == pytest.approx(want.min_value, abs=1e-6)
        assert got.max_value == pytest.approx(want.max_value, abs=1e-6)


def test_velocity_bounded_by_lip():
    for name, top in (("burgers", 3.0), ("lwr", 1.0)):
        m = builtin_flux(name, u_high=top)
        us = np.linspace(0.0, top, 500)
        assert np.all(np.abs(np.asarray(m.eval_a(us))) <= m.lip_f + 1e-12)


def test_a_at_zero_matches_limit():
    for name, top in (("burgers", 3.0), ("lwr", 1.0)):
        m = builtin_flux(name, u_high=top)
        u = 1e-9
        assert float(m.eval_a(0.0)) == pytest.approx(float(m.eval_f(u)) / u, abs=1e-6)
