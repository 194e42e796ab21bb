"""Shared numeric helpers: power-law integrals, graded grids, and the
dyadic divergence classifier used by every improper-integral / series test.

The classifier looks at quantities on dyadic scales (octaves).  A clean
power behaves geometrically octave-to-octave; a logarithmic correction
shows up as a polynomial-in-octave-index tail.  Both regimes are decided
by slope fits with an explicit inconclusive band, so borderline cases are
never silently misread as the wrong class.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

# Tolerance of the octave-slope fit; a fitted local power exponent closer
# than this to the convergence border falls through to the polynomial fit.
GEOM_SLOPE_TOL = 0.05
# Polynomial branch: octave terms ~ m^(-p); the series diverges iff p <= 1.
POLY_DIVERGENT_MAX = 1.05
POLY_CONVERGENT_MIN = 1.25

DIVERGENT = "divergent"
CONVERGENT = "convergent"
INCONCLUSIVE = "inconclusive"


def power_integral(expo: float, t0: float, t1: float) -> float:
    """Exact integral of t**expo over [t0, t1], 0 <= t0 < t1."""
    if t0 < 0 or t1 <= t0:
        raise ValueError("need 0 <= t0 < t1")
    if expo == -1.0:
        if t0 == 0.0:
            return math.inf
        return math.log(t1 / t0)
    q = expo + 1.0
    if t0 == 0.0:
        if q <= 0.0:
            return math.inf
        return t1**q / q
    return (t1**q - t0**q) / q


def piecewise_linear_power_integral(expo, knots, values) -> float:
    """Exact integral of t**expo * phi(t)**2 for piecewise-linear phi.

    On each knot interval phi(t) = A + B t, so the integrand expands into
    three pure powers; this keeps inequality checks free of quadrature
    error even against singular weights.
    """
    knots = np.asarray(knots, dtype=float)
    values = np.asarray(values, dtype=float)
    total = 0.0
    for k in range(len(knots) - 1):
        t0, t1 = knots[k], knots[k + 1]
        if t1 <= t0:
            continue
        b = (values[k + 1] - values[k]) / (t1 - t0)
        a = values[k] - b * t0
        total += (
            a * a * power_integral(expo, t0, t1)
            + 2.0 * a * b * power_integral(expo + 1.0, t0, t1)
            + b * b * power_integral(expo + 2.0, t0, t1)
        )
    return total


def geom_nodes(t_min: float, t_max: float, per_octave: int = 8) -> np.ndarray:
    """Geometric nodes from t_min to t_max, `per_octave` nodes per factor 2.

    The last node is pinned to t_max exactly.
    """
    if not (0 < t_min < t_max):
        raise ValueError("need 0 < t_min < t_max")
    n = max(2, int(math.ceil(per_octave * math.log2(t_max / t_min))) + 1)
    nodes = t_min * (t_max / t_min) ** (np.arange(n) / (n - 1))
    nodes[0], nodes[-1] = t_min, t_max
    return nodes


def _slope(xs: np.ndarray, ys: np.ndarray) -> float:
    x = xs - xs.mean()
    denom = float(np.dot(x, x))
    if denom == 0.0:
        return 0.0
    return float(np.dot(x, ys - ys.mean()) / denom)


def _rss(xs, ys) -> float:
    s = _slope(xs, ys)
    resid = (ys - ys.mean()) - s * (xs - xs.mean())
    return float(np.dot(resid, resid))


def classify_log_terms(log_terms) -> str:
    """Classify sum(exp(log_terms)) as divergent / convergent / inconclusive.

    `log_terms` are natural logs of the octave terms, index m = 0, 1, ...
    The pure-power regime is geometric in m; logarithmic corrections give
    polynomial tails ~ m**(-p).  Whichever of the two models fits the deep
    half better decides, each with its own inconclusive band; -inf entries
    (terms that vanished) force the convergent verdict.
    """
    lt = np.asarray(log_terms, dtype=float)
    if lt.size < 4:
        return INCONCLUSIVE
    if np.any(np.isnan(lt)):
        return INCONCLUSIVE
    if np.any(np.isposinf(lt)):
        return DIVERGENT
    if np.any(np.isneginf(lt[lt.size // 2:])):
        return CONVERGENT
    tail = lt[lt.size // 2:]
    m_idx = np.arange(lt.size // 2, lt.size, dtype=float)
    s = _slope(m_idx, tail) / math.log(2.0)       # octave slope, log2 units
    rss_geom = _rss(m_idx, tail)
    rss_poly = _rss(np.log(m_idx + 1.0), tail)
    if rss_geom <= rss_poly and abs(s) >= GEOM_SLOPE_TOL:
        return CONVERGENT if s < 0 else DIVERGENT
    # polynomial regime: estimate p from successive ratios, which is immune
    # to unknown index offsets in terms ~ (m + m0)**(-p)
    ratios = -(tail[1:] - tail[:-1]) / np.diff(np.log(m_idx + 1.0))
    p = float(ratios[len(ratios) // 2:].mean())
    if p <= POLY_DIVERGENT_MAX:
        return DIVERGENT
    if p >= POLY_CONVERGENT_MIN:
        return CONVERGENT
    return INCONCLUSIVE


def classify_series(terms) -> str:
    """Divergence classification of a positive series given its raw terms."""
    t = np.asarray(terms, dtype=float)
    if np.any(t < 0):
        raise ValueError("series terms must be nonnegative")
    with np.errstate(divide="ignore"):
        return classify_log_terms(np.log(t))


@dataclass
class TailReport:
    """Outcome of probing integral of f over (0, t_hi] on dyadic blocks."""

    status: str                 # divergent | convergent | inconclusive
    value: float                # finite integral estimate when convergent
    log_blocks: np.ndarray      # natural logs of the octave integrals


def integral_lower_tail(f, t_hi: float, n_octaves: int = 26) -> TailReport:
    """Probe integral(f, 0, t_hi) for an endpoint singularity at 0.

    Blocks I_m = integral over [t_hi 2^-(m+1), t_hi 2^-m] are computed by
    adaptive quadrature and fed to the octave classifier.  When the tail
    converges the returned value adds a geometric extrapolation of the
    unresolved remainder below the deepest block.
    """
    blocks = np.empty(n_octaves)
    for m in range(n_octaves):
        lo = t_hi * 2.0 ** (-(m + 1))
        hi = t_hi * 2.0 ** (-m)
        val, _ = integrate.quad(f, lo, hi, limit=200)
        blocks[m] = val
    if np.any(blocks < 0):
        return TailReport(INCONCLUSIVE, math.nan, np.log(np.abs(blocks) + 1e-300))
    with np.errstate(divide="ignore"):
        log_blocks = np.log(blocks)
    status = classify_log_terms(log_blocks)
    value = math.inf
    if status == CONVERGENT:
        total = float(blocks.sum())
        half = n_octaves // 2
        pos = blocks[half:][blocks[half:] > 0]
        if pos.size >= 2 and blocks[-1] > 0:
            ratio = float((pos[1:] / pos[:-1]).mean())
            ratio = min(max(ratio, 0.0), 0.95)
            total += blocks[-1] * ratio / (1.0 - ratio)
        value = total
    elif status == DIVERGENT:
        value = math.inf
    else:
        value = math.nan
    return TailReport(status, value, log_blocks)


def fit_order(hs, errs) -> float:
    """Least-squares convergence order from (h, error) pairs."""
    hs = np.asarray(hs, dtype=float)
    errs = np.asarray(errs, dtype=float)
    mask = errs > 0
    if mask.sum() < 2:
        return math.inf  # errors at rounding floor: order is not measurable
    return float(_slope(np.log(hs[mask]), np.log(errs[mask])))


def aitken_limit(values) -> tuple[float, bool]:
    """Aitken delta-squared limit of the last three values.

    Returns (limit, accelerated); falls back to the last value when the
    differences do not contract.
    """
    v = np.asarray(values, dtype=float)
    if v.size < 3:
        return float(v[-1]), False
    v0, v1, v2 = v[-3], v[-2], v[-1]
    d1, d2 = v1 - v0, v2 - v1
    denom = d2 - d1
    if denom == 0.0 or abs(d2) >= abs(d1):
        return float(v2), False
    return float(v2 - d2 * d2 / denom), True
