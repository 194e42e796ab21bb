"""The theorem engine: sufficient-condition checks with provenance.

Each classifier evaluates the hypotheses of one sufficient criterion
against a :class:`~confine_lab.profiles.CoefficientProfile` and returns a
:class:`Verdict`.  Outcomes are three-valued on purpose: ``NotProven``
records that the cited sufficient condition fails and never claims the
property itself is false (falsification is the job of the 1D oracles and
the mass simulator); ``Inconclusive`` records that the check does not
mechanize for the given inputs.

Exponent arithmetic for the collar criteria runs in exact rational
arithmetic (binary floats are rationals), so equality cases such as the
ratio landing exactly on 1 are decided without tolerances.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np
from scipy import optimize

from . import geometry, numerics, quadform
from .errors import InvalidSplit, MissingInfinityRecord, UnsupportedDomain
from .profiles import HALF_STRIP, CoefficientProfile

PROVEN = "Proven"
NOT_PROVEN = "NotProven"
INCONCLUSIVE = "Inconclusive"

ESA = "ESA"
SC = "SC"

SATISFIED = "Satisfied"
VIOLATED_SIGMA1 = "ViolatedSigma1"
VIOLATED_SIGMA2 = "ViolatedSigma2"

# epsilon in the log-corrected mass bound; any positive value works and the
# outcome is epsilon-independent for strict power inequalities
EPS_LOG = 1e-3


def _rec(lhs, rhs, ok, note: str = "") -> dict:
    return {"lhs": float(lhs), "rhs": float(rhs), "ok": bool(ok), "note": note}


@dataclass
class Verdict:
    """Outcome of one sufficient-condition check, with the numbers used."""

    question: str               # ESA | SC
    outcome: str                # Proven | NotProven | Inconclusive
    theorem: str                # which criterion produced it
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"question": self.question, "outcome": self.outcome,
                "theorem": self.theorem, "details": self.details}

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def _require_power_components(profile) -> bool:
    return all(c.is_power_law for c in profile.components)


# ----------------------------------------------------------------------
# Collar power-law criteria (bounded boundary part)
# ----------------------------------------------------------------------

def classify_esa(profile: CoefficientProfile) -> Verdict:
    """Essential self-adjointness from collar power laws.

    Per component, either the diffusion scale vanishes at least
    quadratically (beta >= 2), or beta < 2 and the exact rational ratio

        (D- rho-)/(D+ rho+) * ((beta + gamma + d - d_j - 2)/(2 - beta))^2

    is at least 1.  Proven requires every component to pass.
    """
    if profile.domain.kind == HALF_STRIP:
        raise UnsupportedDomain("the strip example falls outside the collar "
                                "power-law criterion (level-set compactness fails)")
    details: dict = {}
    if not _require_power_components(profile):
        return Verdict(ESA, INCONCLUSIVE, "collar-power-esa",
                       {"custom_law": _rec(0, 0, False, "non-power component law")})
    d = profile.domain.dim
    all_ok = True
    for c in profile.components:
        beta, gamma = Fraction(c.beta), Fraction(c.gamma)
        if beta >= 2:
            details[f"comp{c.id}.quadratic_scale"] = _rec(
                c.beta, 2.0, True, "diffusion collapses at least quadratically")
            continue
        num = beta + gamma + d - c.d_j - 2
        ratio = (Fraction(c.D_minus) * Fraction(c.rho_minus)
                 / (Fraction(c.D_plus) * Fraction(c.rho_plus))) * (num / (2 - beta)) ** 2
        ok = ratio >= 1
        details[f"comp{c.id}.hardy_ratio"] = _rec(
            float(ratio), 1.0, ok,
            f"((beta+gamma+d-d_j-2)/(2-beta))^2 with constants quotient; "
            f"exact value {ratio}")
        all_ok = all_ok and ok
    return Verdict(ESA, PROVEN if all_ok else NOT_PROVEN, "collar-power-esa", details)


def classify_sc(profile: CoefficientProfile) -> Verdict:
    """Stochastic completeness from collar power laws.

    Per component: either beta >= 2 with an admissible weight growth
    (automatic for power laws), or the mass product bound
    a * rho_inf <= K delta^(1+eta) (ln 1/delta)^(1-eps) with
    eta = 1 - codim; for power laws that is beta + gamma > 1 + eta, with
    equality absorbed by the logarithmic factor.
    """
    if profile.domain.kind == HALF_STRIP:
        raise UnsupportedDomain("the strip example falls outside the collar "
                                "power-law criterion (level-set compactness fails)")
    details: dict = {}
    if not _require_power_components(profile):
        return Verdict(SC, INCONCLUSIVE, "collar-power-sc",
                       {"custom_law": _rec(0, 0, False, "non-power component law")})
    d = profile.domain.dim
    all_ok = True
    for c in profile.components:
        beta, gamma = Fraction(c.beta), Fraction(c.gamma)
        eta = 1 - (d - c.d_j)           # exact: C^2 component of codim d - d_j
        pass_i = beta >= 2
        if pass_i:
            if beta > 2:
                note = (f"weight growth admissible: rho delta^gamma <= "
                        f"exp(L delta^(1-beta/2)) near 0 for any L > 0")
            else:
                note = (f"weight growth admissible: rho delta^gamma <= "
                        f"delta^(-L) with L = {max(0.0, -c.gamma):g}")
            details[f"comp{c.id}.strong_decay"] = _rec(c.beta, 2.0, True, note)
        prod = beta + gamma
        thresh = Fraction(1 + eta)
        if prod > thresh:
            pass_ii = True
            note = f"volume bound v(nu) <= K nu^{d - c.d_j} (C^2 component)"
        elif prod == thresh:
            pass_ii = True
            note = ("log-margin: equality absorbed by (ln 1/delta)^(1-eps), "
                    f"eps = {EPS_LOG}")
        else:
            pass_ii = False
            note = ""
        details[f"comp{c.id}.mass_product"] = _rec(
            float(prod), float(thresh), pass_ii,
            note or f"beta+gamma below 1+eta = {float(thresh):g}")
        ok = bool(pass_i) or pass_ii
        if not ok:
            details[f"comp{c.id}.strong_decay"] = _rec(c.beta, 2.0, False,
                                                       "beta below 2")
        all_ok = all_ok and ok
    return Verdict(SC, PROVEN if all_ok else NOT_PROVEN, "collar-power-sc", details)


def classify_at_infinity(profile: CoefficientProfile, question: str = SC) -> Verdict:
    """Growth conditions at infinity for unbounded domains.

    SC needs the scale bound a <= K |x|^beta_inf with beta_inf <= 2 and the
    matching weight growth (exp(L |x|^(1-beta_inf/2)) for beta_inf < 2,
    |x|^L for beta_inf = 2); ESA needs the scale bound alone.
    """
    rec = profile.infinity
    if rec is None:
        raise MissingInfinityRecord("profile has no infinity record")
    details = {}
    ok = rec.beta_inf <= 2.0
    details["inf.scale_growth"] = _rec(rec.beta_inf, 2.0, ok,
                                       "a(x) <= K |x|^beta_inf as |x| -> inf")
    if question == SC:
        if rec.beta_inf < 2.0:
            note = f"rho_inf <= exp({rec.L_inf:g} |x|^{1 - rec.beta_inf / 2:g})"
        elif rec.beta_inf == 2.0:
            note = f"rho_inf <= |x|^{rec.L_inf:g}"
        else:
            note = "no admissible growth form: beta_inf exceeds 2"
        details["inf.weight_growth"] = _rec(rec.L_inf, math.inf, ok, note)
    return Verdict(question, PROVEN if ok else NOT_PROVEN, "infinity-growth", details)


def _combine(question: str, parts: list[Verdict]) -> Verdict:
    details = {}
    outcome = PROVEN
    for v in parts:
        for k, r in v.details.items():
            details[f"{v.theorem}:{k}"] = r
        if v.outcome == NOT_PROVEN:
            outcome = NOT_PROVEN
        elif v.outcome == INCONCLUSIVE and outcome == PROVEN:
            outcome = INCONCLUSIVE
    theorem = "+".join(dict.fromkeys(v.theorem for v in parts))
    return Verdict(question, outcome, theorem, details)


def classify_esa_full(profile: CoefficientProfile) -> Verdict:
    """Boundary + infinity combination for ESA."""
    parts = [classify_esa(profile)]
    if not profile.domain.bounded:
        parts.append(classify_at_infinity(profile, ESA))
    return _combine(ESA, parts)


def classify_sc_full(profile: CoefficientProfile) -> Verdict:
    """Boundary + infinity combination for SC."""
    parts = [classify_sc(profile)]
    if not profile.domain.bounded:
        parts.append(classify_at_infinity(profile, SC))
    return _combine(SC, parts)


# ----------------------------------------------------------------------
# The admissible logarithmic weight condition
# ----------------------------------------------------------------------

PURE_LOG = "pure_log"
LOG_LOG = "log_log"
TABULATED = "tabulated"


@dataclass(frozen=True)
class SigmaSpec:
    """Admissible exponent function G for the logarithmic weight e^G.

    pure_log: G(t) = sigma * ln(t / a0) on (0, a0], zero above.
    log_log:  G(t) = ln(t / a0) + 0.5 * ln(ln(a0 e / t)) on (0, a0];
              its octave terms decay harmonically, the borderline case.
    tabulated: arbitrary callable, classified numerically.
    """

    family: str
    sigma: float = 1.0
    a0: float = 1.0
    table: Callable | None = None

    def G(self, t):
        t = np.asarray(t, dtype=float)
        if self.family == PURE_LOG:
            return np.where(t < self.a0, self.sigma * np.log(t / self.a0), 0.0)
        if self.family == LOG_LOG:
            tt = np.minimum(t, self.a0)
            val = np.log(tt / self.a0) + 0.5 * np.log(np.log(math.e * self.a0 / tt))
            return np.where(t < self.a0, val, 0.0)
        if self.family == TABULATED:
            return np.asarray(self.table(t), dtype=float)
        raise ValueError(self.family)

    def G_prime(self, t):
        t = np.asarray(t, dtype=float)
        if self.family == PURE_LOG:
            return np.where(t < self.a0, self.sigma / t, 0.0)
        if self.family == LOG_LOG:
            tt = np.minimum(t, self.a0)
            val = (1.0 - 0.5 / np.log(math.e * self.a0 / tt)) / tt
            return np.where(t < self.a0, val, 0.0)
        if self.family == TABULATED:
            h = 1e-6 * np.maximum(t, 1e-9)
            return (self.G(t + h) - self.G(t - h)) / (2.0 * h)
        raise ValueError(self.family)


def pure_log_sigma(sigma: float, a0: float = 1.0) -> SigmaSpec:
    return SigmaSpec(PURE_LOG, sigma=sigma, a0=a0)


def log_log_sigma(a0: float = 1.0) -> SigmaSpec:
    return SigmaSpec(LOG_LOG, a0=a0)


def sigma_check(spec: SigmaSpec, n_terms: int = 48) -> str:
    """Admissibility of G: derivative bound and octave-series divergence.

    The first condition requires 0 <= G'(t) <= 1/t below a0 (with G <= 0
    and G = 0 above a0); the second requires the series of octave terms
    4^(-m) exp(-2 G(2^(-m) a0)) to diverge.
    """
    a0 = spec.a0
    if spec.family == PURE_LOG:
        if not (0.0 <= spec.sigma <= 1.0):
            return VIOLATED_SIGMA1
    elif spec.family == TABULATED:
        ts = a0 * 2.0 ** (-np.linspace(0.1, 24, 241))
        g = spec.G(ts)
        gp = spec.G_prime(ts)
        above = spec.G(np.array([a0 * 1.01, a0 * 2.0]))
        if (np.any(g > 1e-10) or np.any(gp < -1e-8 / ts)
                or np.any(gp > (1.0 + 1e-6) / ts) or np.any(np.abs(above) > 1e-12)):
            return VIOLATED_SIGMA1
    # log_log satisfies the derivative bound by construction
    m = np.arange(1, n_terms + 1, dtype=float)
    log_terms = -m * math.log(4.0) - 2.0 * np.asarray(spec.G(a0 * 2.0**-m))
    trend = numerics.classify_log_terms(log_terms)
    if trend == numerics.DIVERGENT:
        return SATISFIED
    if trend == numerics.CONVERGENT:
        return VIOLATED_SIGMA2
    return INCONCLUSIVE


# ----------------------------------------------------------------------
# Metric-criterion classifiers
# ----------------------------------------------------------------------

def _invert_metric_depth(profile, j, target: float) -> float:
    """Euclidean depth t with delta_M(t) = target (incomplete components)."""
    c = profile.components[j]
    if c.is_power_law and not profile.blended and c.beta < 2.0:
        q = 1.0 - 0.5 * c.beta
        return (math.sqrt(c.D) * q * target) ** (1.0 / q)
    f = lambda t: geometry.component_metric_depth(profile, j, t) - target
    return optimize.brentq(f, 1e-14, min(1.0, c.nu0) * 4.0)


def classify_esa_metric(profile: CoefficientProfile,
                        sigma: SigmaSpec | None = None) -> Verdict:
    """Metric-level ESA: completeness, or barrier-dominated weighted cutoffs.

    Branch (i): a geodesically complete M is Proven outright.  Branch (ii)
    needs compact metric level sets, an admissible logarithmic weight, and
    the power-law-reducible instance of the quadratic-form bound: the
    confining barrier must dominate |grad_M g|^2 + 1 pointwise on the
    collar.  Anything short of that is Inconclusive, never NotProven: the
    form bound could still hold by other means.
    """
    details: dict = {}
    cls = geometry.classify_manifold(profile)
    details["geometry.case"] = _rec(0, 0, cls.case == geometry.C1_COMPLETE, cls.case)
    if cls.case == geometry.C1_COMPLETE:
        return Verdict(ESA, PROVEN, "metric-complete", details)
    if sigma is None:
        details["sigma"] = _rec(0, 0, False, "no admissible weight supplied")
        return Verdict(ESA, INCONCLUSIVE, "agmon-barrier-esa", details)
    rep = geometry.check_assumption_A(profile)
    if rep.holds is not True:
        details["assumption_A"] = _rec(0, 0, False, rep.witness or "unknown")
        return Verdict(ESA, INCONCLUSIVE, "agmon-barrier-esa", details)
    details["assumption_A"] = _rec(0, 0, True, "level sets compact")
    sc = sigma_check(sigma)
    details["sigma"] = _rec(0, 0, sc == SATISFIED, sc)
    if sc != SATISFIED:
        return Verdict(ESA, INCONCLUSIVE, "agmon-barrier-esa", details)

    all_ok = True
    for c in profile.components:
        if cls.per_component_complete[c.id]:
            continue
        if not (c.is_power_law and not profile.blended and c.beta < 2.0):
            details[f"comp{c.id}.barrier"] = _rec(0, 0, False,
                                                  "no power-law barrier reduction")
            return Verdict(ESA, INCONCLUSIVE, "agmon-barrier-esa", details)
        S = c.beta + c.gamma + profile.domain.dim - c.d_j - 2.0
        if S == 0.0:
            details[f"comp{c.id}.barrier"] = _rec(0, 0, False,
                                                  "barrier degenerates (S = 0)")
            return Verdict(ESA, INCONCLUSIVE, "agmon-barrier-esa", details)
        k = quadform.barrier_constants(profile, c.id)
        ts = 0.5 * k["nu1"] * 2.0 ** (-np.arange(0, 41, dtype=float))
        barrier = np.asarray(quadform.hardy_barrier(profile, c.id, ts))
        dm = np.array([geometry.component_metric_depth(profile, c.id, t) for t in ts])
        grad_sq = np.asarray(sigma.G_prime(dm)) ** 2
        margin = float(np.min(barrier - 1.0 - grad_sq))
        ok = margin >= 0.0
        details[f"comp{c.id}.barrier"] = _rec(
            float(np.min(barrier - 1.0)), float(np.max(grad_sq)), ok,
            f"min pointwise margin {margin:.3g} over dyadic collar samples")
        all_ok = all_ok and ok
    if all_ok:
        return Verdict(ESA, PROVEN, "agmon-barrier-esa", details)
    return Verdict(ESA, INCONCLUSIVE, "agmon-barrier-esa", details)


@dataclass
class WeightSplit:
    """Factorization rho_inf = omega * rho_tilde with rho_tilde integrable.

    ``omega`` and ``rho_tilde`` are callables of the Euclidean boundary
    depth t for the leading component; the collar/shell suprema the
    criterion needs are taken over metric annuli converted to depth
    intervals through the closed-form metric distance.
    """

    omega: Callable
    rho_tilde: Callable
    alpha: float = 0.0
    r1: float = 0.25          # r_k = r1 * 2^(1-k)
    n_terms: int = 40
    R1: float = 1.0           # R_{k+1} = R_k + 1
    n_annuli: int = 12


def _validate_split(profile, split, j=0):
    ts = np.geomspace(1e-8, min(1.0, profile.components[j].nu0), 41)
    w = np.asarray(split.omega(ts), dtype=float)
    rt = np.asarray(split.rho_tilde(ts), dtype=float)
    rho = np.asarray(profile.rho_of(j, ts), dtype=float)
    if np.any(np.abs(w * rt - rho) > 1e-10 * np.maximum(rho, 1e-300)):
        raise InvalidSplit("omega * rho_tilde does not reproduce rho_inf")
    model = (quadform.normal_model(profile, j)
             if profile.components[j].d_j == profile.domain.dim - 1
             else quadform.radial_model(profile))
    rep = numerics.integral_lower_tail(
        lambda t: float(split.rho_tilde(t)) * float(model.J(t)), 0.5, n_octaves=24)
    if rep.status != numerics.CONVERGENT:
        raise InvalidSplit("rho_tilde is not integrable near the boundary")


def classify_sc_metric(profile: CoefficientProfile, split: WeightSplit) -> Verdict:
    """Metric-level SC through a weight factorization.

    Case (i), complete M: the omega suprema over unit point-distance
    shells must grow at most like e^(alpha R).  Case (ii), incomplete M
    with finite diameter and compact level sets: the series
    sum (r_k - r_{k+1})^2 / omega_k over halving collar annuli must
    diverge.  Case (iii) needs both.
    """
    _validate_split(profile, split)
    details: dict = {}
    cls = geometry.classify_manifold(profile)
    details["geometry.case"] = _rec(0, 0, True, cls.case)

    def shell_growth_ok() -> bool:
        j = next(cid for cid, comp in enumerate(profile.components))
        model = (quadform.normal_model(profile, j)
                 if profile.components[j].d_j == profile.domain.dim - 1
                 else quadform.radial_model(profile))
        t0 = model.c / 2.0
        ok = True
        for kk in range(split.n_annuli):
            Rk = split.R1 + kk
            lo = _invert_point_depth(model, Rk + 1.0, t0)
            hi = _invert_point_depth(model, Rk, t0)
            ts = np.geomspace(max(lo, 1e-300), max(hi, 2e-300), 9)
            sup = float(np.max(np.asarray(split.omega(ts), dtype=float)))
            bound = math.exp(split.alpha * Rk)
            details[f"shell{kk + 1}.omega_sup"] = _rec(sup, bound, sup <= bound, "")
            ok = ok and sup <= bound
        return ok

    def collar_series_divergent() -> bool:
        terms = np.empty(split.n_terms)
        incomplete = [c.id for c in profile.components
                      if not cls.per_component_complete[c.id]]
        for kk in range(split.n_terms):
            rk = split.r1 * 2.0 ** (-kk)        # r_{k+1} in the halving scheme
            r_prev = 2.0 * rk
            sup = 0.0
            for j in incomplete:
                t_lo = _invert_metric_depth(profile, j, rk)
                t_hi = _invert_metric_depth(profile, j, r_prev)
                ts = np.geomspace(t_lo, t_hi, 9)
                sup = max(sup, float(np.max(np.asarray(split.omega(ts), dtype=float))))
            terms[kk] = rk * rk / sup
        trend = numerics.classify_series(terms)
        details["collar_series"] = _rec(
            float(terms[-1]), 0.0, trend == numerics.DIVERGENT,
            f"sum (r_k - r_(k+1))^2 / omega_k is {trend}")
        return trend == numerics.DIVERGENT

    if cls.case == geometry.C1_COMPLETE:
        ok = shell_growth_ok()
        return Verdict(SC, PROVEN if ok else NOT_PROVEN, "weight-split-sc", details)

    rep = geometry.check_assumption_A(profile)
    details["assumption_A"] = _rec(0, 0, rep.holds is True,
                                   rep.witness or ("compact" if rep.holds else "unknown"))
    if rep.holds is not True:
        return Verdict(SC, INCONCLUSIVE, "weight-split-sc", details)

    if cls.case == geometry.C2_INCOMPLETE_FINITE_DIAM:
        ok = collar_series_divergent()
        return Verdict(SC, PROVEN if ok else NOT_PROVEN, "weight-split-sc", details)
    ok = collar_series_divergent() and shell_growth_ok()
    return Verdict(SC, PROVEN if ok else NOT_PROVEN, "weight-split-sc", details)


def _invert_point_depth(model, target: float, t0: float) -> float:
    """Depth t below the anchor with d_M(t, t0) = target."""
    if model.a_pow:
        ca, ea = model.a_pow
        if ea == 2.0:
            return t0 * math.exp(-math.sqrt(ca) * target)
        q = 1.0 - 0.5 * ea
        if ea > 2.0:
            val = t0**q + math.sqrt(ca) * abs(q) * target
            return val ** (1.0 / q)
        val = t0**q - math.sqrt(ca) * q * target
        if val <= 0.0:
            return 0.0
        return val ** (1.0 / q)
    f = lambda t: model.point_depth(t, t0) - target
    return optimize.brentq(f, 1e-300, t0 * (1 - 1e-12))


# ----------------------------------------------------------------------
# One-call driver used by the command line
# ----------------------------------------------------------------------

def classify_all(profile: CoefficientProfile, sigma: SigmaSpec | None = None,
                 split: WeightSplit | None = None) -> dict:
    """Run every applicable classifier; never raises on unsupported combos."""
    out: dict = {}
    cls = geometry.classify_manifold(profile)
    out["geometry"] = {
        "case": cls.case,
        "per_component_complete": {str(k): bool(v)
                                   for k, v in cls.per_component_complete.items()},
        "infinity_complete": cls.infinity_complete,
        "diam_estimate": cls.diam_estimate,
    }
    rep = geometry.check_assumption_A(profile)
    out["assumption_A"] = {"holds": rep.holds, "witness": rep.witness}
    try:
        out["esa_collar"] = classify_esa_full(profile).to_dict()
        out["sc_collar"] = classify_sc_full(profile).to_dict()
    except UnsupportedDomain as exc:
        note = _rec(0, 0, False, str(exc))
        out["esa_collar"] = Verdict(ESA, INCONCLUSIVE, "collar-power-esa",
                                    {"unsupported": note}).to_dict()
        out["sc_collar"] = Verdict(SC, INCONCLUSIVE, "collar-power-sc",
                                   {"unsupported": note}).to_dict()
    except MissingInfinityRecord as exc:
        note = _rec(0, 0, False, str(exc))
        out["esa_collar"] = Verdict(ESA, INCONCLUSIVE, "infinity-growth",
                                    {"missing": note}).to_dict()
        out["sc_collar"] = Verdict(SC, INCONCLUSIVE, "infinity-growth",
                                   {"missing": note}).to_dict()
    sig = sigma if sigma is not None else pure_log_sigma(1.0)
    out["esa_metric"] = classify_esa_metric(profile, sig).to_dict()
    if split is not None:
        try:
            out["sc_metric"] = classify_sc_metric(profile, split).to_dict()
        except InvalidSplit as exc:
            out["sc_metric"] = Verdict(SC, INCONCLUSIVE, "weight-split-sc",
                                       {"invalid_split": _rec(0, 0, False, str(exc))}
                                       ).to_dict()
    return out
