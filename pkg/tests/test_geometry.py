import math

import numpy as np
import pytest
from scipy import integrate

from confine_lab import geometry as G
from confine_lab import profiles as P
from confine_lab.errors import GridTooCoarse, UnsupportedDomain


# ------------------------------------------------------- metric distance

def test_agmon_distance_euclidean_case():
    prof = P.ball_profile(0.0, 0.0, radius=1.0, dim=2, nu0=1.0)
    assert G.agmon_boundary_distance(prof, [0.7, 0.0]) == pytest.approx(0.3)


def test_agmon_distance_sqrt_law():
    # beta = 1: integral of t^(-1/2) from 0 to 0.25 is 1.0
    prof = P.ball_profile(1.0, 0.0, radius=1.0, dim=2, nu0=1.0)
    got = G.agmon_boundary_distance(prof, [0.75, 0.0])
    ref, _ = integrate.quad(lambda t: t**-0.5, 0.0, 0.25)
    assert got == pytest.approx(1.0, rel=1e-12)
    assert got == pytest.approx(ref, rel=1e-8)


def test_agmon_distance_infinite_for_quadratic_law():
    prof = P.ball_profile(2.0, 0.0, radius=1.0, dim=2, nu0=1.0)
    assert G.agmon_boundary_distance(prof, [0.5, 0.0]) == math.inf


@pytest.mark.parametrize("beta", [0.25, 0.5, 1.0, 1.5, 1.9])
def test_closed_form_matches_quadrature(beta):
    prof = P.ball_profile(beta, 0.0, radius=1.0, dim=2, nu0=1.0, D=1.7)
    delta = 0.35
    got = G.component_metric_depth(prof, 0, delta)
    ref, _ = integrate.quad(lambda t: (1.7 * t**beta) ** -0.5, 0.0, delta)
    assert got == pytest.approx(ref, rel=1e-8)


def test_agmon_distance_monotone_in_depth():
    prof = P.ball_profile(1.5, 0.0, radius=1.0, dim=2, nu0=1.0)
    depths = np.linspace(0.05, 0.95, 19)
    vals = [G.component_metric_depth(prof, 0, d) for d in depths]
    assert np.all(np.diff(vals) > 0)


def test_agmon_distance_half_strip_custom_law():
    # a(t) = 1/(t(2-t)): delta_M(full width) = int_0^1 sqrt(t(2-t)) dt = pi/4
    prof = P.half_strip_profile()
    got = G.component_metric_depth(prof, 0, 1.0)
    assert got == pytest.approx(math.pi / 4, rel=1e-6)


# ------------------------------------------------------- trichotomy

def test_classify_complete_wall():
    cls = G.classify_manifold(P.ball_profile(2.0, 0.0, radius=1.0, dim=2))
    assert cls.case == G.C1_COMPLETE
    assert cls.diam_estimate == math.inf


def test_classify_incomplete_finite_diam():
    prof = P.ball_profile(1.0, 0.0, radius=1.0, dim=2, nu0=1.0)
    cls = G.classify_manifold(prof)
    assert cls.case == G.C2_INCOMPLETE_FINITE_DIAM
    # diameter path through the center: 2 * int_0^1 t^(-1/2) dt = 4
    ref, _ = integrate.quad(lambda t: t**-0.5, 0.0, 1.0)
    assert cls.diam_estimate == pytest.approx(2 * ref, rel=1e-10)


def test_classify_exterior_domain_cases():
    # boundary beta=1 incomplete; beta_inf=3 > 2 reaches infinity at finite
    # cost, so the diameter stays finite
    prof = P.exterior_profile(1.0, 0.0, radius=1.0, dim=2, beta_inf=3.0)
    cls = G.classify_manifold(prof)
    assert cls.case == G.C2_INCOMPLETE_FINITE_DIAM
    assert cls.infinity_complete is False
    assert math.isfinite(cls.diam_estimate)
    # beta_inf = 2 makes infinity complete while the wall stays incomplete
    prof = P.exterior_profile(1.0, 0.0, radius=1.0, dim=2, beta_inf=2.0)
    cls = G.classify_manifold(prof)
    assert cls.case == G.C3_INCOMPLETE_INFINITE_DIAM
    assert cls.infinity_complete is True


def test_completeness_flag_flips_exactly_at_two():
    for beta, expect in ((2.0 - 1e-9, False), (2.0, True), (2.25, True)):
        prof = P.ball_profile(beta, 0.0, radius=1.0, dim=2)
        cls = G.classify_manifold(prof)
        assert cls.per_component_complete[0] is expect
    # C1 iff all flags true on a two-component domain
    for b0, b1 in ((2.0, 2.0), (2.0, 1.75), (1.75, 2.0)):
        prof = P.annulus_profile(0.5, 1.5, 2, dict(beta=b0, gamma=0.0),
                                 dict(beta=b1, gamma=0.0))
        cls = G.classify_manifold(prof)
        assert (cls.case == G.C1_COMPLETE) == (b0 >= 2 and b1 >= 2)


# ------------------------------------------------------- assumption (A)

def test_assumption_holds_on_bounded_stock_domains():
    for prof in (
        P.ball_profile(1.0, 0.0, radius=1.0, dim=2),
        P.annulus_profile(0.5, 1.0, 2, dict(beta=1, gamma=0), dict(beta=1, gamma=0)),
        P.punctured_ball_profile(1.0, 2, dict(beta=1, gamma=0), dict(beta=1, gamma=0)),
    ):
        rep = G.check_assumption_A(prof)
        assert rep.holds is True and rep.witness is None


def test_assumption_fails_on_half_strip_with_witness():
    rep = G.check_assumption_A(P.half_strip_profile())
    assert rep.holds is False
    assert "midline" in rep.witness


def test_assumption_sampled_corroboration_punctured_ball():
    # delta_M must vanish toward both incomplete walls, so {delta_M >= r}
    # excludes a neighborhood of each component
    prof = P.punctured_ball_profile(1.0, 2, dict(beta=1, gamma=0),
                                    dict(beta=1, gamma=0))
    assert G.check_assumption_A(prof).holds is True
    for j in (0, 1):
        depths = [G.component_metric_depth(prof, j, 10.0**-k) for k in (2, 4, 6, 8)]
        assert np.all(np.diff(depths) < 0)
        assert depths[-1] < 1e-3


# ------------------------------------------------------- eikonal solver

def test_eikonal_point_source_euclidean():
    prof = P.ball_profile(0.0, 0.0, radius=1.0, dim=2, nu0=1.0)
    h = 1.0 / 128
    field = G.eikonal_solve(prof, h, G.TO_POINT, seed_point=(0.0, 0.0))
    X, Y = np.meshgrid(field.xs, field.ys, indexing="ij")
    exact = np.hypot(X, Y)
    ok = field.inside & np.isfinite(field.values) & (exact > 0.05)
    err = np.abs(field.values[ok] - exact[ok]).max()
    assert err <= 5.0 * h * math.log(1.0 / h)
    assert err > 0      # the lattice is not magically exact


def test_eikonal_boundary_field_sqrt_profile():
    prof = P.ball_profile(1.0, 0.0, radius=1.0, dim=2, nu0=1.0)
    h = 1.0 / 256
    field = G.eikonal_solve(prof, h, G.TO_BOUNDARY)
    X, Y = np.meshgrid(field.xs, field.ys, indexing="ij")
    delta = 1.0 - np.hypot(X, Y)
    exact = 2.0 * np.sqrt(np.clip(delta, 0.0, None))
    ok = field.inside & np.isfinite(field.values)
    rel = np.abs(field.values[ok] - exact[ok]) / exact[ok]
    assert rel.max() < 1e-2
    assert not field.diverging


def test_eikonal_diverging_boundary_reports_log_growth():
    prof = P.ball_profile(2.0, 0.0, radius=1.0, dim=2, nu0=1.0)
    field = G.eikonal_solve(prof, 1.0 / 128, G.TO_BOUNDARY)
    assert field.diverging
    # along the +x ray the distance to the reference shell delta = 1/2
    # grows like ln(1/2 / delta)
    i0 = len(field.xs) // 2
    for r in (0.8, 0.9, 0.95):
        i = i0 + int(round(r / field.h))
        delta = 1.0 - abs(field.xs[i])
        u = field.values[i, i0]
        assert u == pytest.approx(math.log(0.5 / delta), rel=0.08)


def test_eikonal_discrete_lipschitz_bound():
    prof = P.ball_profile(1.0, 0.0, radius=1.0, dim=2, nu0=1.0)
    h = 1.0 / 64
    field = G.eikonal_solve(prof, h, G.TO_BOUNDARY)
    X, Y = np.meshgrid(field.xs, field.ys, indexing="ij")
    delta = 1.0 - np.hypot(X, Y)
    with np.errstate(divide="ignore", invalid="ignore"):
        slowness = np.where(delta > 0, delta**-0.5, np.nan)
    ratio = field.max_lipschitz_ratio(slowness)
    assert ratio <= 1.0 + 8.0 * h


def test_eikonal_grid_too_coarse():
    prof = P.ball_profile(1.0, 0.0, radius=1.0, dim=2, nu0=0.05)
    with pytest.raises(GridTooCoarse):
        G.eikonal_solve(prof, 1.0 / 64, G.TO_BOUNDARY)


def test_eikonal_rejects_unsupported():
    prof = P.ball_profile(1.0, 0.0, radius=1.0, dim=3)
    with pytest.raises(UnsupportedDomain):
        G.eikonal_solve(prof, 1.0 / 64, G.TO_BOUNDARY)


def test_distance_field_csv_export(tmp_path):
    prof = P.ball_profile(0.0, 0.0, radius=1.0, dim=2, nu0=1.0)
    field = G.eikonal_solve(prof, 1.0 / 16, G.TO_POINT, seed_point=(0.0, 0.0))
    out = tmp_path / "field.csv"
    field.to_csv(out)
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "x,y,u"
    assert len(lines) > 100
