import math

import numpy as np
import pytest
from scipy import integrate

from confine_lab import numerics


def test_power_integral_matches_quadrature():
    for expo in (-1.5, -1.0, -0.5, 0.0, 0.7, 2.0):
        lo, hi = 0.125, 0.8
        exact = numerics.power_integral(expo, lo, hi)
        quad, _ = integrate.quad(lambda t: t**expo, lo, hi)
        assert exact == pytest.approx(quad, rel=1e-12)


def test_power_integral_improper_cases():
    assert numerics.power_integral(-0.5, 0.0, 1.0) == pytest.approx(2.0)
    assert numerics.power_integral(-1.0, 0.0, 1.0) == math.inf
    assert numerics.power_integral(-2.0, 0.0, 1.0) == math.inf


def test_piecewise_linear_power_integral_exact():
    knots = np.array([0.1, 0.3, 0.7, 0.9])
    vals = np.array([0.0, 1.0, -0.5, 0.0])
    for expo in (-1.5, 0.0, 2.0):
        got = numerics.piecewise_linear_power_integral(expo, knots, vals)
        ref, _ = integrate.quad(
            lambda t: t**expo * np.interp(t, knots, vals) ** 2, 0.1, 0.9, limit=200)
        assert got == pytest.approx(ref, rel=1e-10)


def test_classify_series_geometric_and_harmonic():
    m = np.arange(1, 60, dtype=float)
    assert numerics.classify_series(0.5**m) == numerics.CONVERGENT
    assert numerics.classify_series(2.0**m) == numerics.DIVERGENT
    assert numerics.classify_series(np.ones_like(m)) == numerics.DIVERGENT
    assert numerics.classify_series(1.0 / m) == numerics.DIVERGENT       # harmonic
    assert numerics.classify_series(1.0 / m**2) == numerics.CONVERGENT   # p = 2


def test_integral_lower_tail_values():
    rep = numerics.integral_lower_tail(lambda t: t**-0.5, 1.0)
    assert rep.status == numerics.CONVERGENT
    assert rep.value == pytest.approx(2.0, rel=1e-6)
    rep = numerics.integral_lower_tail(lambda t: 1.0 / t, 1.0)
    assert rep.status == numerics.DIVERGENT
    # log-borderline: 1/(t ln(1/t)^2) converges, 1/(t ln(1/t)) diverges
    rep = numerics.integral_lower_tail(lambda t: 1.0 / (t * np.log(1 / t) ** 2), 0.25)
    assert rep.status == numerics.CONVERGENT
    rep = numerics.integral_lower_tail(lambda t: 1.0 / (t * np.log(1 / t)), 0.25)
    assert rep.status == numerics.DIVERGENT


def test_fit_order_recovers_slope():
    hs = [0.1, 0.05, 0.025]
    errs = [4e-3 * h**2 for h in hs]
    assert numerics.fit_order(hs, errs) == pytest.approx(2.0, abs=1e-9)


def test_aitken_accelerates_geometric_sequence():
    limit = 0.75
    vals = [limit + 0.1 * 0.5**k for k in range(5)]
    got, accel = numerics.aitken_limit(vals)
    assert accel
    assert got == pytest.approx(limit, abs=1e-12)


def test_geom_nodes_endpoints_and_density():
    nodes = numerics.geom_nodes(1e-4, 1.0, per_octave=8)
    assert nodes[0] == 1e-4 and nodes[-1] == 1.0
    # at least 8 nodes per factor-of-two everywhere
    counts = np.log2(nodes[1:] / nodes[:-1])
    assert counts.max() <= 1.0 / 8 + 1e-9
