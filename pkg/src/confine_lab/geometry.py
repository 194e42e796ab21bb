"""Geometry of the diffusion metric M = (Omega, D^{-1}).

For isotropic profiles the metric line element is a(x)^{-1/2} |dx|, so all
radial quantities reduce to one-dimensional integrals of a(t)^{-1/2} along
boundary normals.  This module provides the metric boundary distance, the
completeness trichotomy, the level-set compactness check, and a planar
fast-marching solver for distance fields.
"""

from __future__ import annotations

import csv
import heapq
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from . import numerics
from .errors import (GridTooCoarse, NonRadialProfile, PointOutsideDomain,
                     UnsupportedDomain)
from .profiles import (ANNULUS, BALL, EXTERIOR, HALF_STRIP, INTERVAL,
                       PUNCTURED_BALL, PUNCTURED_SPACE, CoefficientProfile)

C1_COMPLETE = "C1_Complete"
C2_INCOMPLETE_FINITE_DIAM = "C2_IncompleteFiniteDiam"
C3_INCOMPLETE_INFINITE_DIAM = "C3_IncompleteInfiniteDiam"

TO_BOUNDARY = "to_boundary"
TO_POINT = "to_point"


# ----------------------------------------------------------------------
# Radial metric integrals
# ----------------------------------------------------------------------

def component_metric_depth(profile: CoefficientProfile, j: int, delta: float) -> float:
    """Metric length of the normal ray from depth `delta` to component j.

    This is integral_0^delta a_j(t)^{-1/2} dt: the Agmon boundary distance
    of a point at Euclidean depth delta, assuming the normal ray minimizes
    (exact for the stock radial/collar geometries).
    """
    c = profile.components[j]
    if delta == 0.0:
        return 0.0
    if c.is_power_law and not profile.blended:
        if c.beta >= 2.0:
            return math.inf
        q = 1.0 - 0.5 * c.beta
        return delta**q / (math.sqrt(c.D) * q)
    if c.is_power_law and profile.blended:
        nu = c.nu0
        cut = min(delta, 0.5 * nu)
        if c.beta >= 2.0:
            return math.inf
        q = 1.0 - 0.5 * c.beta
        out = cut**q / (math.sqrt(c.D) * q)
        if delta > cut:
            val, _ = integrate.quad(
                lambda t: profile.a_of(j, t) ** -0.5, cut, delta, limit=200)
            out += val
        return out
    # custom law: decide integrability on dyadic scales, then integrate
    report = numerics.integral_lower_tail(
        lambda t: profile.a_of(j, t) ** -0.5, min(delta, 1.0))
    if report.status == numerics.INCONCLUSIVE:
        raise NonRadialProfile(
            f"component {j}: cannot classify the metric integral near 0")
    if report.status == numerics.DIVERGENT:
        return math.inf
    out = report.value
    if delta > min(delta, 1.0):
        val, _ = integrate.quad(
            lambda t: profile.a_of(j, t) ** -0.5, min(delta, 1.0), delta, limit=200)
        out += val
    return out


def component_complete(profile: CoefficientProfile, j: int) -> bool:
    """True when the wall is at infinite metric distance."""
    return component_metric_depth(profile, j, min(profile.components[j].nu0, 1.0)) == math.inf


def infinity_complete(profile: CoefficientProfile) -> bool | None:
    """Completeness toward |x| -> infinity; None for bounded domains.

    With a(x) <= K |x|**beta_inf the escape cost is
    integral^inf r**(-beta_inf/2) dr, infinite exactly when beta_inf <= 2.
    """
    if profile.domain.bounded:
        return None
    if profile.infinity is None:
        return None
    return profile.infinity.beta_inf <= 2.0


def agmon_boundary_distance(profile: CoefficientProfile, x) -> float:
    """Metric distance from x to the boundary (delta_M); +inf when complete.

    The nearest boundary component is reached along its normal ray, so the
    value is the closed-form power integral plus, for blended profiles,
    a numeric correction across the blend region.
    """
    delta, j = profile.boundary_distance(x)
    vals = [component_metric_depth(profile, j, delta)]
    # other components can be closer in the metric only through their own
    # normals; for stock domains the Euclidean-nearest component also
    # minimizes unless its metric degenerates, so take the min over all.
    for k in range(len(profile.components)):
        if k == j:
            continue
        dk = _depth_to_component(profile, k, x)
        if dk is not None:
            vals.append(component_metric_depth(profile, k, dk))
    return min(vals)


def _depth_to_component(profile, k, x):
    dom = profile.domain
    x = np.atleast_1d(np.asarray(x, dtype=float))
    r = float(np.linalg.norm(x))
    if dom.kind == ANNULUS:
        return (r - dom.r_in) if k == 0 else (dom.r_out - r)
    if dom.kind == PUNCTURED_BALL:
        return r if k == 0 else (dom.radius - r)
    return None


# ----------------------------------------------------------------------
# Completeness trichotomy
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class MetricClassification:
    case: str
    per_component_complete: dict
    infinity_complete: bool | None
    diam_estimate: float


def classify_manifold(profile: CoefficientProfile) -> MetricClassification:
    """Place M in the completeness trichotomy with a diameter estimate.

    Radial laws make each wall's completeness a one-dimensional
    integrability statement; the diameter of an everywhere-incomplete M is
    estimated as the metric length of a diameter path assembled from
    analytic normal-ray segments.
    """
    flags = {c.id: component_complete(profile, c.id) for c in profile.components}
    inf_flag = infinity_complete(profile)
    all_complete = all(flags.values()) and (inf_flag is None or inf_flag)
    if all_complete:
        return MetricClassification(C1_COMPLETE, flags, inf_flag, math.inf)
    if any(flags.values()) or (inf_flag is True):
        return MetricClassification(C3_INCOMPLETE_INFINITE_DIAM, flags, inf_flag,
                                    math.inf)
    dom = profile.domain
    depth = lambda j, s: component_metric_depth(profile, j, s)
    if dom.kind == INTERVAL:
        diam = depth(0, dom.length)
    elif dom.kind == BALL:
        diam = 2.0 * depth(0, dom.radius)
    elif dom.kind == ANNULUS:
        w = dom.r_out - dom.r_in
        mid_r = 0.5 * (dom.r_in + dom.r_out)
        a_mid = 0.5 * (profile.a_of(0, w / 2) + profile.a_of(1, w / 2))
        diam = depth(0, w / 2) + depth(1, w / 2) + math.pi * mid_r * a_mid**-0.5
    elif dom.kind == PUNCTURED_BALL:
        diam = depth(0, dom.radius / 2) + depth(1, dom.radius / 2)
    elif dom.kind == HALF_STRIP:
        diam = 2.0 * depth(0, dom.width)
    elif dom.kind in (PUNCTURED_SPACE, EXTERIOR):
        rec = profile.infinity
        nu = profile.components[0].nu0
        far = rec.R_cut * 2.0 / (rec.beta_inf - 2.0)  # int (r/R)^(-b/2) dr, b > 2
        bulk = max(rec.R_cut - nu - (dom.radius if dom.kind == EXTERIOR else 0.0), 0.0)
        diam = depth(0, nu) + bulk + far
    else:
        raise UnsupportedDomain(dom.kind)
    return MetricClassification(C2_INCOMPLETE_FINITE_DIAM, flags, inf_flag, diam)


# ----------------------------------------------------------------------
# Assumption (A): compactness of {delta_M >= r} cap {d_M <= R}
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class AssumptionAReport:
    holds: bool | None          # None == unknown
    witness: str | None


def check_assumption_A(profile: CoefficientProfile) -> AssumptionAReport:
    """Decide whether the metric level sets S_{r,R} are compact.

    Stock radial domains pass: every end of Omega is either at infinite
    point distance (complete walls and heavy infinity, excluded by
    d_M <= R) or has delta_M -> 0 uniformly (incomplete walls, excluded by
    delta_M >= r).  The strip with a diffusion scale blowing up at the
    walls fails: running parallel to a wall becomes free, so the midline
    stays at bounded d_M and fixed delta_M while escaping to |x_1| = inf.
    """
    dom = profile.domain
    if dom.kind == HALF_STRIP:
        c = profile.components[0]
        if c.beta < 0.0 and not component_complete(profile, 0):
            return AssumptionAReport(
                False,
                "midline {x2 = 0}: unbounded set with delta_M constant and "
                "d_M bounded (wall-parallel travel cost -> 0)",
            )
        if not c.is_power_law:
            return AssumptionAReport(None, None)
        return AssumptionAReport(True, None)
    if dom.kind in (INTERVAL, BALL, ANNULUS, PUNCTURED_BALL,
                    PUNCTURED_SPACE, EXTERIOR):
        # radial geometry: every end is excluded by one of the two level-set
        # constraints.  An incomplete wall has delta_M(t) -> 0 (its metric
        # integral converges, so it vanishes with t); a complete wall or a
        # heavy infinity sits at d_M = inf.  Custom laws whose integrability
        # cannot be classified stay unknown.
        try:
            for c in profile.components:
                component_complete(profile, c.id)
        except NonRadialProfile:
            return AssumptionAReport(None, None)
        return AssumptionAReport(True, None)
    raise UnsupportedDomain(dom.kind)


# ----------------------------------------------------------------------
# Planar fast marching
# ----------------------------------------------------------------------

@dataclass
class DistanceField:
    """First-order fast-marching distance field on a square lattice."""

    xs: np.ndarray
    ys: np.ndarray
    values: np.ndarray          # +inf outside the domain / unreached
    inside: np.ndarray
    h: float
    metric_kind: str            # to_boundary | to_point
    diverging: bool = False     # no finite boundary value (complete wall)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "y", "u"])
            for i, x in enumerate(self.xs):
                for k, y in enumerate(self.ys):
                    if self.inside[i, k] and np.isfinite(self.values[i, k]):
                        w.writerow([f"{x:.10g}", f"{y:.10g}",
                                    f"{self.values[i, k]:.12g}"])

    def max_lipschitz_ratio(self, slowness: np.ndarray) -> float:
        """max |u(p)-u(q)| / (h * avg slowness) over lattice edges."""
        worst = 0.0
        u, ins = self.values, self.inside
        for axis in (0, 1):
            a = u[1:, :] if axis == 0 else u[:, 1:]
            b = u[:-1, :] if axis == 0 else u[:, :-1]
            sa = slowness[1:, :] if axis == 0 else slowness[:, 1:]
            sb = slowness[:-1, :] if axis == 0 else slowness[:, :-1]
            ia = ins[1:, :] if axis == 0 else ins[:, 1:]
            ib = ins[:-1, :] if axis == 0 else ins[:, :-1]
            ok = ia & ib & np.isfinite(a) & np.isfinite(b)
            if not ok.any():
                continue
            num = np.abs(a[ok] - b[ok])
            den = self.h * 0.5 * (sa[ok] + sb[ok])
            worst = max(worst, float((num / den).max()))
        return worst


def eikonal_solve(profile: CoefficientProfile, h: float, kind: str = TO_BOUNDARY,
                  seed_point=None, seed_band_cells: int = 8) -> DistanceField:
    """Solve |grad u| = a(x)^{-1/2} by first-order 4-neighbor fast marching.

    `to_boundary` seeds a collar band of `seed_band_cells` cells with the
    analytic normal-ray distance (the collar is where accuracy matters and
    where the lattice cannot resolve the degenerate slowness itself);
    `to_point` seeds the lattice node nearest `seed_point`.  Components at
    infinite metric distance have no finite boundary value; the solver then
    seeds the reference shell at half the collar depth and flags the field
    as diverging.
    """
    dom = profile.domain
    if dom.dim != 2:
        raise UnsupportedDomain("fast marching is planar (d = 2) only")
    if dom.kind not in (BALL, ANNULUS, PUNCTURED_BALL):
        raise UnsupportedDomain(f"fast marching needs a bounded stock domain, "
                                f"got {dom.kind}")
    min_nu = min(c.nu0 for c in profile.components)
    if kind == TO_BOUNDARY and min_nu / h < 8:
        raise GridTooCoarse(f"collar depth {min_nu:g} under 8 cells at h={h:g}")

    r_max = {BALL: dom.radius, ANNULUS: dom.r_out,
             PUNCTURED_BALL: dom.radius}[dom.kind]
    n_half = int(math.ceil(r_max / h)) + 2
    xs = (np.arange(-n_half, n_half + 1)) * h
    ys = xs.copy()
    nx = len(xs)
    X, Y = np.meshgrid(xs, ys, indexing="ij")

    inside = np.zeros((nx, nx), dtype=bool)
    delta = np.full((nx, nx), np.nan)
    comp = np.zeros((nx, nx), dtype=int)
    R = np.hypot(X, Y)
    if dom.kind == BALL:
        inside = R < dom.radius
        delta = dom.radius - R
    elif dom.kind == ANNULUS:
        inside = (R > dom.r_in) & (R < dom.r_out)
        d_in, d_out = R - dom.r_in, dom.r_out - R
        comp = np.where(d_in <= d_out, 0, 1)
        delta = np.minimum(d_in, d_out)
    else:  # punctured ball
        inside = (R > 0) & (R < dom.radius)
        d0, d1 = R, dom.radius - R
        comp = np.where(d0 <= d1, 0, 1)
        delta = np.minimum(d0, d1)

    with np.errstate(divide="ignore", invalid="ignore"):
        a_val = np.full((nx, nx), np.nan)
        for j in range(len(profile.components)):
            m = inside & (comp == j)
            a_val[m] = profile.a_of(j, delta[m])
    slowness = a_val**-0.5

    INF = math.inf
    u = np.full((nx, nx), INF)
    known = np.zeros((nx, nx), dtype=bool)
    heap: list[tuple[float, int, int]] = []
    diverging = False

    if kind == TO_BOUNDARY:
        complete = {j: component_complete(profile, j)
                    for j in range(len(profile.components))}
        diverging = any(complete.values())
        band = seed_band_cells * h
        for j, is_complete in complete.items():
            m = inside & (comp == j)
            if not is_complete:
                sel = m & (delta <= band)
                idxs = np.argwhere(sel)
                for i, k in idxs:
                    u[i, k] = component_metric_depth(profile, j, float(delta[i, k]))
            else:
                # seed the reference shell; values measure distance to it
                nu = profile.components[j].nu0
                sel = m & (np.abs(delta - 0.5 * nu) <= 0.75 * h)
                idxs = np.argwhere(sel)
                ref = 0.5 * nu
                for i, k in idxs:
                    d = float(delta[i, k])
                    lo, hi = min(d, ref), max(d, ref)
                    seg, _ = integrate.quad(
                        lambda t: profile.a_of(j, t) ** -0.5, lo, hi, limit=200)
                    u[i, k] = seg
        for i, k in np.argwhere(np.isfinite(u)):
            known[i, k] = True
            heapq.heappush(heap, (u[i, k], i, k))
    elif kind == TO_POINT:
        if seed_point is None:
            raise ValueError("to_point needs seed_point")
        sx, sy = float(seed_point[0]), float(seed_point[1])
        i0 = int(round((sx - xs[0]) / h))
        k0 = int(round((sy - ys[0]) / h))
        if not inside[i0, k0]:
            raise PointOutsideDomain("seed point not inside the domain")
        s0 = slowness[i0, k0]
        for di in (-1, 0, 1):
            for dk in (-1, 0, 1):
                i, k = i0 + di, k0 + dk
                if inside[i, k]:
                    dist = math.hypot(xs[i] - sx, ys[k] - sy)
                    smid = 0.5 * (s0 + slowness[i, k])
                    val = smid * dist
                    if val < u[i, k]:
                        u[i, k] = val
        for i, k in np.argwhere(np.isfinite(u)):
            known[i, k] = True
            heapq.heappush(heap, (u[i, k], i, k))
    else:
        raise ValueError(f"unknown kind {kind!r}")

    nbrs = ((1, 0), (-1, 0), (0, 1), (0, -1))

    def update(i: int, k: int) -> float:
        ux = INF
        for di in (-1, 1):
            ii = i + di
            if 0 <= ii < nx and known[ii, k]:
                ux = min(ux, u[ii, k])
        uy = INF
        for dk in (-1, 1):
            kk = k + dk
            if 0 <= kk < nx and known[i, kk]:
                uy = min(uy, u[i, kk])
        s = slowness[i, k]
        sh = s * h
        if not math.isfinite(ux) and not math.isfinite(uy):
            return INF
        if not math.isfinite(ux):
            return uy + sh
        if not math.isfinite(uy):
            return ux + sh
        if abs(ux - uy) >= sh:
            return min(ux, uy) + sh
        disc = 2.0 * sh * sh - (ux - uy) ** 2
        return 0.5 * (ux + uy + math.sqrt(disc))

    while heap:
        val, i, k = heapq.heappop(heap)
        if val > u[i, k]:
            continue
        known[i, k] = True
        for di, dk in nbrs:
            ii, kk = i + di, k + dk
            if 0 <= ii < nx and 0 <= kk < nx and inside[ii, kk] and not known[ii, kk]:
                cand = update(ii, kk)
                if cand < u[ii, kk]:
                    u[ii, kk] = cand
                    heapq.heappush(heap, (cand, ii, kk))

    u[~inside] = INF
    return DistanceField(xs, ys, u, inside, h, kind, diverging)
