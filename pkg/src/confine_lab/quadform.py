"""Discrete weighted quadratic forms on graded 1D grids.

Every inequality the theorem engine relies on lives at a boundary collar,
so the checks reduce to one-dimensional normal/radial models
(diffusion scale a(t), weight rho(t), Jacobian J(t) on (0, c)) sampled on
dyadically graded grids.  The module verifies

* the localization identity  h[f psi, f psi] - E <<f psi, f psi>> =
  <<psi, |grad_M f|^2 psi>>  for manufactured eigenpairs,
* the exponentially weighted a-priori bound driven by it,
* the confining barrier extracted from the quadratic form by a vector
  field (ground state) argument, with its explicit constants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate

from . import numerics
from .errors import (BarrierUndefined, GridTooCoarse, NonPositivePsi,
                     PreconditionViolated)
from .profiles import (ANNULUS, BALL, EXTERIOR, HALF_STRIP, INTERVAL,
                       PUNCTURED_BALL, PUNCTURED_SPACE, CoefficientProfile)

# ----------------------------------------------------------------------
# 1D models and grids
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class Model1D:
    """One-dimensional reduction: operator -(1/(rho J)) (rho a J u')' + V."""

    c: float
    a: Callable
    rho: Callable
    J: Callable
    d: int
    d_j: int
    # exact power tags (coef, expo) when the model is a pure power law
    a_pow: tuple[float, float] | None = None
    rho_pow: tuple[float, float] | None = None
    J_expo: float = 0.0

    def P(self, t):
        """Face coefficient rho * a * J."""
        return np.asarray(self.a(t)) * np.asarray(self.rho(t)) * np.asarray(self.J(t))

    def W(self, t):
        """Weight density rho * J."""
        return np.asarray(self.rho(t)) * np.asarray(self.J(t))

    def dP(self, t):
        """d/dt of rho*a*J; exact for power tags, else central differences."""
        if self.a_pow and self.rho_pow:
            ca, ea = self.a_pow
            cr, er = self.rho_pow
            e = ea + er + self.J_expo
            return ca * cr * e * np.asarray(t) ** (e - 1.0)
        t = np.asarray(t, dtype=float)
        h = 1e-5 * np.maximum(t, 1e-8)
        return (self.P(t + h) - self.P(t - h)) / (2.0 * h)

    def metric_depth(self, t):
        """delta_M(t) = int_0^t a^{-1/2};  +inf when the wall is complete."""
        if self.a_pow:
            ca, ea = self.a_pow
            if ea >= 2.0:
                return math.inf if np.isscalar(t) else np.full_like(np.asarray(t, float), np.inf)
            q = 1.0 - 0.5 * ea
            return np.asarray(t) ** q / (math.sqrt(ca) * q)
        val, _ = integrate.quad(lambda s: self.a(s) ** -0.5, 0.0, float(t), limit=200)
        return val

    def point_depth(self, t, t0):
        """d_M from anchor t0: |int_t^t0 a^{-1/2}|."""
        if self.a_pow:
            ca, ea = self.a_pow
            if ea == 2.0:
                return abs(math.log(t0 / t)) / math.sqrt(ca)
            q = 1.0 - 0.5 * ea
            return abs(t0**q - float(t) ** q) / (math.sqrt(ca) * abs(q))
        val, _ = integrate.quad(lambda s: self.a(s) ** -0.5,
                                min(float(t), t0), max(float(t), t0), limit=200)
        return val


def normal_model(profile: CoefficientProfile, j: int = 0, c: float = 1.0) -> Model1D:
    """Flat boundary-normal model of component j (J = 1)."""
    comp = profile.components[j]
    a_pow = (comp.D, comp.beta) if comp.is_power_law and not profile.blended else None
    r_pow = (comp.rho, comp.gamma) if comp.is_power_law and not profile.blended else None
    return Model1D(
        c=c,
        a=lambda t: profile.a_of(j, t),
        rho=lambda t: profile.rho_of(j, t),
        J=lambda t: np.ones_like(np.asarray(t, dtype=float)),
        d=profile.domain.dim, d_j=comp.d_j,
        a_pow=a_pow, rho_pow=r_pow, J_expo=0.0,
    )


def radial_model(profile: CoefficientProfile, c: float = 1.0) -> Model1D:
    """Radial model about a point component (J = t^(d-1))."""
    comp = profile.components[0]
    d = profile.domain.dim
    a_pow = (comp.D, comp.beta) if comp.is_power_law and not profile.blended else None
    r_pow = (comp.rho, comp.gamma) if comp.is_power_law and not profile.blended else None
    return Model1D(
        c=c,
        a=lambda t: profile.a_of(0, t),
        rho=lambda t: profile.rho_of(0, t),
        J=lambda t: np.asarray(t, dtype=float) ** (d - 1),
        d=d, d_j=comp.d_j,
        a_pow=a_pow, rho_pow=r_pow, J_expo=float(d - 1),
    )


def graded_grid(t_min: float, c: float, per_octave: int = 16) -> np.ndarray:
    """Dyadically graded nodes clustering toward t = 0."""
    return numerics.geom_nodes(t_min, c, per_octave)


def _check_collar_resolution(grid: np.ndarray):
    lo, hi = grid[0], grid[-1]
    octaves = math.log2(hi / lo)
    if octaves >= 1 and (len(grid) - 1) / octaves < 8:
        raise GridTooCoarse(
            f"{len(grid)} nodes over {octaves:.1f} octaves: need >= 8 per octave")


# ----------------------------------------------------------------------
# Quadratic form assembly
# ----------------------------------------------------------------------


class FormEvaluator:
    """Discrete h[phi, psi] = int (phi' a psi' + phi V psi) rho J dt.

    Gradient terms use face-midpoint quadrature; mass/potential terms use
    the nodal trapezoid rule.  Both are second-order consistent, so the
    localization residual contracts at order ~2 under refinement.
    """

    def __init__(self, model: Model1D, grid: np.ndarray, V=None):
        _check_collar_resolution(grid)
        self.model = model
        self.t = np.asarray(grid, dtype=float)
        self.dt = np.diff(self.t)
        if np.any(self.dt <= 0):
            raise ValueError("grid must be strictly increasing")
        self.faces = 0.5 * (self.t[:-1] + self.t[1:])
        self.P_face = np.asarray(model.P(self.faces), dtype=float)
        self.W_node = np.asarray(model.W(self.t), dtype=float)
        nw = np.zeros_like(self.t)
        nw[:-1] += 0.5 * self.dt
        nw[1:] += 0.5 * self.dt
        self.node_w = nw
        self.V_node = (np.zeros_like(self.t) if V is None
                       else np.asarray([V(x) for x in self.t], dtype=float))

    def dirichlet(self, u, v) -> float:
        du = np.diff(u) / self.dt
        dv = np.diff(v) / self.dt
        return float(np.sum(self.P_face * du * dv * self.dt))

    def ip(self, u, v) -> float:
        """Weighted inner product <<u, v>>."""
        return float(np.sum(u * v * self.W_node * self.node_w))

    def energy(self, u, v) -> float:
        pot = float(np.sum(u * v * self.V_node * self.W_node * self.node_w))
        return self.dirichlet(u, v) + pot

    def grad_sq_pairing(self, psi_face, f) -> float:
        """<<psi, |grad_M f|^2 psi>> with psi sampled at faces."""
        df = np.diff(f) / self.dt
        return float(np.sum(self.P_face * psi_face**2 * df**2 * self.dt))


def assemble_form(model: Model1D, grid, V=None) -> FormEvaluator:
    """Build the discrete quadratic form evaluator (V >= 0 for positivity)."""
    return FormEvaluator(model, grid, V)


# ----------------------------------------------------------------------
# Manufactured eigenpairs
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class SmoothFn:
    """Callable bundle (f, f', f'') for manufactured solutions."""

    f: Callable
    df: Callable
    ddf: Callable


def fn_one() -> SmoothFn:
    one = lambda t: np.ones_like(np.asarray(t, dtype=float))
    zero = lambda t: np.zeros_like(np.asarray(t, dtype=float))
    return SmoothFn(one, zero, zero)


def fn_exp(rate: float = -1.0) -> SmoothFn:
    return SmoothFn(lambda t: np.exp(rate * np.asarray(t, float)),
                    lambda t: rate * np.exp(rate * np.asarray(t, float)),
                    lambda t: rate * rate * np.exp(rate * np.asarray(t, float)))


def fn_power(k: float = 1.0) -> SmoothFn:
    return SmoothFn(lambda t: np.asarray(t, float) ** k,
                    lambda t: k * np.asarray(t, float) ** (k - 1.0),
                    lambda t: k * (k - 1.0) * np.asarray(t, float) ** (k - 2.0))


def fn_cosh(rate: float, t0: float) -> SmoothFn:
    return SmoothFn(lambda t: np.cosh(rate * (np.asarray(t, float) - t0)),
                    lambda t: rate * np.sinh(rate * (np.asarray(t, float) - t0)),
                    lambda t: rate * rate * np.cosh(rate * (np.asarray(t, float) - t0)))


def manufactured_solution(model: Model1D, psi: SmoothFn, E: float):
    """Potential V making (H - E) psi = 0 exactly for the given psi > 0.

    V = E + (rho a J psi')' / (rho J psi).  Returns (V, report) where the
    report flags any sampled non-positivity of V (such pairs are used for
    identity checks only, not positivity-dependent ones).
    """
    probe = np.geomspace(1e-6 * model.c, model.c, 41)
    if np.any(np.asarray(psi.f(probe)) <= 0):
        raise NonPositivePsi("psi must be strictly positive on (0, c)")

    def V(t):
        t = np.asarray(t, dtype=float)
        num = model.dP(t) * psi.df(t) + model.P(t) * psi.ddf(t)
        return E + num / (model.W(t) * psi.f(t))

    v_min = float(np.min(V(probe)))
    return V, {"min_V_sampled": v_min, "nonnegative": v_min >= 0.0}


# ----------------------------------------------------------------------
# Cutoffs and exponential weights
# ----------------------------------------------------------------------


def _smoothstep(s):
    s = np.clip(s, 0.0, 1.0)
    return s * s * (3.0 - 2.0 * s)


def _smoothstep_d(s_raw, width):
    s = np.clip(s_raw, 0.0, 1.0)
    return np.where((s_raw > 0) & (s_raw < 1), 6.0 * s * (1.0 - s) / width, 0.0)


@dataclass(frozen=True)
class CutoffSpec:
    """Compactly supported [0,1] cutoffs of the distance coordinates.

    kinds:
      annular(r_lo, r_hi)   -- 0 below r_lo, 1 above r_hi, in delta_M
      ball(R_lo, R_hi, t0)  -- 1 below R_lo, 0 above R_hi, in d_M from t0
      log_ramp(nu)          -- 1 - ln(nu/t)/ln(1/nu) on [nu^2, nu], Euclidean
      hat(l0, l1, r1, r0)   -- piecewise-linear plateau in t
    """

    kind: str
    params: tuple

    def values(self, model: Model1D, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.kind == "annular":
            r_lo, r_hi = self.params
            dm = np.array([model.metric_depth(x) for x in t])
            return _smoothstep((dm - r_lo) / (r_hi - r_lo))
        if self.kind == "ball":
            R_lo, R_hi, t0 = self.params
            dm = np.array([model.point_depth(x, t0) for x in t])
            return 1.0 - _smoothstep((dm - R_lo) / (R_hi - R_lo))
        if self.kind == "log_ramp":
            (nu,) = self.params
            out = np.ones_like(t)
            out[t <= nu * nu] = 0.0
            mid = (t > nu * nu) & (t < nu)
            out[mid] = 1.0 - np.log(nu / t[mid]) / math.log(1.0 / nu)
            return out
        if self.kind == "hat":
            l0, l1, r1, r0 = self.params
            up = np.clip((t - l0) / (l1 - l0), 0.0, 1.0)
            down = np.clip((r0 - t) / (r0 - r1), 0.0, 1.0)
            return np.minimum(up, down)
        if self.kind == "product":
            out = np.ones_like(t)
            for spec in self.params:
                out = out * spec.values(model, t)
            return out
        raise ValueError(f"unknown cutoff kind {self.kind!r}")

    def max_slope_bound(self) -> float:
        """Admissible |phi'| bound for the ramp kinds (annular/ball)."""
        if self.kind == "annular":
            r_lo, r_hi = self.params
            return 2.0 / (r_hi - r_lo)
        if self.kind == "ball":
            R_lo, R_hi, _ = self.params
            return 2.0 / (R_hi - R_lo)
        raise ValueError("slope bound applies to annular/ball ramps")


def annular_cutoff(r_lo, r_hi) -> CutoffSpec:
    return CutoffSpec("annular", (r_lo, r_hi))


def ball_cutoff(R_lo, R_hi, t0) -> CutoffSpec:
    return CutoffSpec("ball", (R_lo, R_hi, t0))


def log_ramp_cutoff(nu) -> CutoffSpec:
    return CutoffSpec("log_ramp", (nu,))


def hat_cutoff(l0, l1, r1, r0) -> CutoffSpec:
    return CutoffSpec("hat", (l0, l1, r1, r0))


def product_cutoff(*specs) -> CutoffSpec:
    return CutoffSpec("product", tuple(specs))


@dataclass(frozen=True)
class AgmonWeight:
    """Exponent g of the weight e^g; families mirror the proofs' choices.

    zero                      -- g = 0
    sigma(G)                  -- g = G(delta_M(t)) for an admissible G
    linear_dm(alpha_half, t0) -- g = -alpha_half * d_M(t)
    esa_log(beta, nu)         -- g = [(2-beta)/2 ln t + 1/2 ln ln 1/t] * ramp
    strong_decay(beta, L, nu) -- g = -L q(t) ramp(t), q = t^(1-beta/2) or ln 1/t
    """

    family: str
    params: tuple = ()

    def g_and_slope(self, model: Model1D, t: np.ndarray):
        """g(t) and dg/dt; |grad_M g|^2 in the model is a(t) * slope^2."""
        t = np.asarray(t, dtype=float)
        if self.family == "zero":
            z = np.zeros_like(t)
            return z, z
        if self.family == "sigma":
            (spec,) = self.params
            dm = np.array([model.metric_depth(x) for x in t])
            slope_metric = spec.G_prime(dm)            # dG/d(delta_M)
            a_val = np.asarray(model.a(t), dtype=float)
            return spec.G(dm), slope_metric * a_val**-0.5
        if self.family == "linear_dm":
            alpha_half, t0 = self.params
            dm = np.array([model.point_depth(x, t0) for x in t])
            a_val = np.asarray(model.a(t), dtype=float)
            sgn = np.where(t < t0, -1.0, 1.0)
            return -alpha_half * dm, -alpha_half * sgn * a_val**-0.5
        if self.family == "esa_log":
            beta, nu = self.params
            q = 0.5 * (2.0 - beta)
            safe = np.minimum(t, 0.9)
            core = q * np.log(safe) + 0.5 * np.log(np.log(1.0 / np.minimum(safe, 0.36)))
            dcore = q / safe - 0.5 / (safe * np.log(1.0 / np.minimum(safe, 0.36)))
            dcore = np.where(safe < 0.36, dcore, q / safe)
            ramp = 1.0 - _smoothstep((t - 0.5 * nu) / (0.5 * nu))
            dramp = -_smoothstep_d((t - 0.5 * nu) / (0.5 * nu), 0.5 * nu)
            return core * ramp, dcore * ramp + core * dramp
        if self.family == "strong_decay":
            beta, L, nu = self.params
            if beta > 2.0:
                q = t ** (1.0 - 0.5 * beta)
                dq = (1.0 - 0.5 * beta) * t ** (-0.5 * beta)
            else:                       # beta == 2 branch
                q = np.log(1.0 / t)
                dq = -1.0 / t
            ramp = 1.0 - _smoothstep((t - 0.5 * nu) / (0.5 * nu))
            dramp = -_smoothstep_d((t - 0.5 * nu) / (0.5 * nu), 0.5 * nu)
            return -L * q * ramp, -L * (dq * ramp + q * dramp)
        raise ValueError(f"unknown weight family {self.family!r}")


# ----------------------------------------------------------------------
# Localization identity
# ----------------------------------------------------------------------


def localization_residual(model: Model1D, grid, psi: SmoothFn, E: float,
                          f_values) -> float:
    """Relative defect of the localization identity on one grid.

    With (psi, V, E) manufactured so (H - E) psi = 0, the identity
    h[f psi, f psi] - E <<f psi, f psi>> = <<psi, |grad_M f|^2 psi>> holds
    exactly in the continuum for any Lipschitz compactly supported f; the
    returned residual is |lhs - rhs| / max(1, |h[f psi, f psi]|).
    """
    grid = np.asarray(grid, dtype=float)
    f = np.asarray(f_values, dtype=float)
    if f[0] != 0.0 or f[-1] != 0.0:
        raise ValueError("f must vanish at the grid ends (compact support)")
    V, _ = manufactured_solution(model, psi, E)
    form = assemble_form(model, grid, V)
    psi_n = np.asarray(psi.f(grid), dtype=float)
    psi_face = np.asarray(psi.f(form.faces), dtype=float)
    fp = f * psi_n
    lhs = form.energy(fp, fp) - E * form.ip(fp, fp)
    rhs = form.grad_sq_pairing(psi_face, f)
    return abs(lhs - rhs) / max(1.0, abs(form.energy(fp, fp)))


# ----------------------------------------------------------------------
# Basic inequality
# ----------------------------------------------------------------------


@dataclass
class BasicInequalityResult:
    lhs: float
    rhs: float
    ok: bool
    precondition_margin: float     # min of B + |E-E0|/2 - |grad_M g|^2 on supp f
    hypothesis_slack: float        # h[f psi] - E0 ||f psi||^2 - <<f psi, B f psi>>


def basic_inequality_check(model: Model1D, grid, psi: SmoothFn, E: float,
                           E0: float, B, weight: AgmonWeight,
                           cutoff: CutoffSpec, tol_grid: float = 0.0) -> BasicInequalityResult:
    """Check <<psi, f^2 psi>> <= (2/|E-E0|) <<psi, |m| psi>> for f = e^g phi.

    m = e^{2g} (2 phi grad_M g . grad_M phi + |grad_M phi|^2).  The
    pointwise hypothesis |grad_M g|^2 <= B + |E-E0|/2 is verified on the
    support of f and a violation raises; the quadratic-form hypothesis is
    reported as `hypothesis_slack` (>= 0 when the construction is valid).
    """
    if not E < E0:
        raise ValueError("need E < E0")
    grid = np.asarray(grid, dtype=float)
    V, _ = manufactured_solution(model, psi, E)
    form = assemble_form(model, grid, V)

    phi = cutoff.values(model, grid)
    g, dg = weight.g_and_slope(model, grid)
    a_node = np.asarray(model.a(grid), dtype=float)
    grad_g_sq = a_node * dg * dg
    B_node = np.asarray([B(x) for x in grid], dtype=float)
    supp = phi > 0
    margin = B_node[supp] + 0.5 * abs(E - E0) - grad_g_sq[supp]
    if margin.size and margin.min() < -1e-12 * (1.0 + np.abs(grad_g_sq[supp]).max()):
        k = int(np.argmin(margin))
        t_bad = grid[supp][k]
        raise PreconditionViolated(
            f"|grad_M g|^2 exceeds B + |E-E0|/2 at t = {t_bad:.6g}")

    psi_n = np.asarray(psi.f(grid), dtype=float)
    f = np.exp(g) * phi
    fp = f * psi_n
    lhs = form.ip(fp, fp)

    faces = form.faces
    phi_f = cutoff.values(model, faces)
    g_f, dg_f = weight.g_and_slope(model, faces)
    a_f = np.asarray(model.a(faces), dtype=float)
    dphi = np.diff(phi) / form.dt
    m_face = np.exp(2.0 * g_f) * (2.0 * phi_f * a_f * dg_f * dphi + a_f * dphi**2)
    psi_face = np.asarray(psi.f(faces), dtype=float)
    W_face = np.asarray(model.W(faces), dtype=float)
    rhs = (2.0 / abs(E - E0)) * float(
        np.sum(np.abs(m_face) * psi_face**2 * W_face * form.dt))

    slack = (form.energy(fp, fp) - E0 * form.ip(fp, fp)
             - float(np.sum(B_node * fp * fp * form.W_node * form.node_w)))
    h = float(np.max(form.dt))
    return BasicInequalityResult(lhs, rhs, lhs <= rhs * (1.0 + tol_grid + 10.0 * h),
                                 float(margin.min()) if margin.size else math.inf,
                                 slack)


# ----------------------------------------------------------------------
# The confining barrier and its vector-field origin
# ----------------------------------------------------------------------


def smooth_collar_depth(profile: CoefficientProfile, j: int) -> float:
    """Depth to which the boundary distance of component j stays C^2."""
    dom = profile.domain
    nu = profile.components[j].nu0
    if dom.kind in (INTERVAL, HALF_STRIP, PUNCTURED_SPACE):
        return nu
    if dom.kind == BALL:
        return min(nu, dom.radius / 2.0)
    if dom.kind == ANNULUS:
        w = dom.r_out - dom.r_in
        return min(nu, w / 2.0)
    if dom.kind == PUNCTURED_BALL:
        return min(nu, dom.radius / 2.0)
    if dom.kind == EXTERIOR:
        return min(nu, dom.radius)
    raise ValueError(dom.kind)


def curvature_constant(profile: CoefficientProfile, j: int) -> float:
    """Bound C3 on |Laplacian(delta) - (d - d_j - 1)/delta| over the collar.

    Exact radial formulas for the stock domains; the flat normal model and
    point components give exactly 0.
    """
    dom = profile.domain
    d = dom.dim
    nu2 = smooth_collar_depth(profile, j)
    if dom.kind in (INTERVAL, HALF_STRIP, PUNCTURED_SPACE):
        return 0.0
    if dom.kind == BALL:
        return (d - 1) / (dom.radius - nu2)
    if dom.kind == ANNULUS:
        return (d - 1) / dom.r_in if j == 0 else (d - 1) / (dom.r_out - nu2)
    if dom.kind == PUNCTURED_BALL:
        return 0.0 if j == 0 else (d - 1) / (dom.radius - nu2)
    if dom.kind == EXTERIOR:
        return (d - 1) / dom.radius
    raise ValueError(dom.kind)


def curvature_constant_fd(profile: CoefficientProfile, j: int,
                          n_samples: int = 200, seed: int = 7) -> float:
    """Finite-difference corroboration of C3 on planar domains."""
    dom = profile.domain
    if dom.dim != 2:
        raise ValueError("finite-difference probe is planar only")
    rng = np.random.default_rng(seed)
    nu = profile.components[j].nu0
    h = 1e-4
    worst = 0.0
    target_codim_term = dom.dim - profile.components[j].d_j - 1

    def delta_of(pt):
        return dom.boundary_distance(pt)[0]

    count = 0
    while count < n_samples:
        theta = rng.uniform(0, 2 * math.pi)
        depth = rng.uniform(0.1 * nu, 0.9 * nu)
        pt = _collar_point(dom, j, depth, theta)
        if pt is None:
            break
        lap = (delta_of(pt + [h, 0]) + delta_of(pt - [h, 0])
               + delta_of(pt + [0, h]) + delta_of(pt - [0, h])
               - 4.0 * delta_of(pt)) / (h * h)
        worst = max(worst, abs(lap - target_codim_term / depth))
        count += 1
    return worst


def _collar_point(dom, j, depth, theta):
    u = np.array([math.cos(theta), math.sin(theta)])
    if dom.kind == BALL:
        return (dom.radius - depth) * u
    if dom.kind == ANNULUS:
        r = dom.r_in + depth if j == 0 else dom.r_out - depth
        return r * u
    if dom.kind == PUNCTURED_BALL:
        r = depth if j == 0 else dom.radius - depth
        return r * u
    return None


def barrier_constants(profile: CoefficientProfile, j: int) -> dict:
    """Explicit constants (S, C2, C3, nu1, coefficient) of the barrier."""
    comp = profile.components[j]
    d = profile.domain.dim
    S = comp.beta + comp.gamma + d - comp.d_j - 2.0
    if S == 0.0:
        raise BarrierUndefined("beta + gamma + d - d_j - 2 vanishes")
    C3 = curvature_constant(profile, j)
    C2 = 2.0 * C3 / abs(S)
    nu3 = min(1.0, comp.nu0, smooth_collar_depth(profile, j))
    nu1 = nu3 if C2 == 0.0 else min(nu3, 1.0 / C2)
    coef = comp.D_minus * comp.rho_minus / (4.0 * comp.rho_plus) * S * S
    return {"S": S, "C2": C2, "C3": C3, "nu1": nu1, "nu3": nu3, "coef": coef}


def hardy_barrier(profile: CoefficientProfile, j: int, t):
    """Barrier H(t) = coef * t^(beta-2) * (1 - C2 t) on the deep collar.

    This is the effective confining potential the quadratic form dominates
    (up to the bounded shift C1); it is strongest exactly when the
    exponent ratio criterion holds with room to spare.
    """
    k = barrier_constants(profile, j)
    comp = profile.components[j]
    t = np.asarray(t, dtype=float)
    return k["coef"] * t ** (comp.beta - 2.0) * (1.0 - k["C2"] * t)


def vector_field_bound(profile: CoefficientProfile, j: int, t, h_coef=None):
    """Flat-model value of div X - X . (rho D)^{-1} X for the collar field.

    X(t) = h t^(beta+gamma-1) along the inward normal; the codimension
    contributes (d - d_j - 1)/t to the divergence.  The default h
    maximizes the quadratic h S - h^2/(rho_- D_-), giving exactly
    rho_- D_- (S/2)^2 t^(beta+gamma-2) = rho_inf(t) * barrier(t) when the
    curvature term vanishes.
    """
    comp = profile.components[j]
    d = profile.domain.dim
    S = comp.beta + comp.gamma + d - comp.d_j - 2.0
    h = comp.rho_minus * comp.D_minus * S / 2.0 if h_coef is None else h_coef
    t = np.asarray(t, dtype=float)
    return (h * S - h * h / (comp.rho_minus * comp.D_minus)) * t ** (comp.beta + comp.gamma - 2.0)


# ----------------------------------------------------------------------
# Hardy inequality check with random test functions
# ----------------------------------------------------------------------


@dataclass
class HardyCheckReport:
    min_slack: float
    n_samples: int
    C1: float
    nu1: float
    worst_sample: int


def _field_profile(model: Model1D, profile, j, nu1, nu3):
    """Y(t) = J X psi_ramp and the integrand Y' - Y^2/(a rho J)."""
    comp = profile.components[j]
    k = barrier_constants(profile, j)
    h = comp.rho_minus * comp.D_minus * k["S"] / 2.0
    e = comp.beta + comp.gamma - 1.0

    def ramp(t):
        return 1.0 - _smoothstep((t - 0.5 * nu1) / (nu3 - 0.5 * nu1))

    def dramp(t):
        return -_smoothstep_d((t - 0.5 * nu1) / (nu3 - 0.5 * nu1), nu3 - 0.5 * nu1)

    def Y(t):
        t = np.asarray(t, dtype=float)
        return h * t**e * np.asarray(model.J(t)) * ramp(t)

    def dY(t):
        t = np.asarray(t, dtype=float)
        Jv = np.asarray(model.J(t))
        dJ = model.J_expo * t ** (model.J_expo - 1.0) if model.J_expo else 0.0
        base = h * (e * t ** (e - 1.0) * Jv + t**e * dJ)
        return base * ramp(t) + h * t**e * Jv * dramp(t)

    def integrand(t):
        t = np.asarray(t, dtype=float)
        P = np.asarray(model.P(t))
        y = Y(t)
        return dY(t) - y * y / P

    return Y, integrand


_GAUSS_X, _GAUSS_W = np.polynomial.legendre.leggauss(12)


def _hardy_terms_quadrature(model, knots, vals, slopes, cut, coef, C2, e_H):
    """Gauss quadrature of the three Hardy-check integrals per knot interval."""
    h0 = mass = bar = 0.0
    edges = sorted(set(knots.tolist()) | {cut})
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi <= knots[0] or lo >= knots[-1] or hi <= lo:
            continue
        ts = 0.5 * (hi - lo) * _GAUSS_X + 0.5 * (hi + lo)
        ws = 0.5 * (hi - lo) * _GAUSS_W
        phi = np.interp(ts, knots, vals)
        sl = slopes[np.clip(np.searchsorted(knots, ts) - 1, 0, len(slopes) - 1)]
        P = np.asarray(model.P(ts), dtype=float)
        W = np.asarray(model.W(ts), dtype=float)
        h0 += float(np.sum(P * sl**2 * ws))
        mass += float(np.sum(W * phi**2 * ws))
        if hi <= cut:
            barrier = coef * ts**e_H * (1.0 - C2 * ts)
            bar += float(np.sum(barrier * W * phi**2 * ws))
    return h0, mass, bar


def hardy_inequality_check(profile: CoefficientProfile, grid, n_samples: int = 500,
                           seed: int = 0xC0FFEE, j: int = 0) -> HardyCheckReport:
    """Min relative slack of h0[phi,phi] + C1<<phi,phi>> >= int H phi^2 rho J.

    phi are random compactly supported piecewise-linear functions (5..50
    knots, values iid uniform [-1,1], reproducible seed).  For power-law
    models every integral is evaluated in closed form, so a negative slack
    beyond rounding would falsify the constants wiring, not the grid.
    """
    comp = profile.components[j]
    model = normal_model(profile, j, c=float(np.max(grid))) if comp.d_j == profile.domain.dim - 1 \
        else radial_model(profile, c=float(np.max(grid)))
    k = barrier_constants(profile, j)
    nu1, nu3 = k["nu1"], k["nu3"]
    c = model.c
    _, integrand = _field_profile(model, profile, j, nu1, nu3)

    # C1: sampled sup of the negative part of the integrand past the deep
    # collar, relative to the weight (safety factor on top).
    ts = np.geomspace(0.5 * nu1, c * (1 - 1e-12), 4001)
    ratio = -np.asarray(integrand(ts)) / np.asarray(model.W(ts))
    C1 = max(0.0, float(ratio.max())) * 1.05 + 1e-12

    barrier_coef = k["coef"]
    e_H = comp.beta - 2.0
    rng = np.random.default_rng(seed)
    t_lo = float(np.min(grid))
    t_hi = c * 0.98

    pa_coef = comp.D * comp.rho
    pa_expo = comp.beta + comp.gamma + model.J_expo
    w_coef = comp.rho
    w_expo = comp.gamma + model.J_expo
    exact = comp.is_power_law and not profile.blended

    min_slack = math.inf
    worst = -1
    for s in range(n_samples):
        n_knots = int(rng.integers(5, 51))
        # log-uniform knots so the deep collar, where the barrier binds,
        # carries test mass
        inner = np.sort(np.exp(rng.uniform(math.log(t_lo), math.log(t_hi),
                                           n_knots - 2)))
        knots = np.concatenate(([t_lo], inner, [t_hi]))
        vals = rng.uniform(-1.0, 1.0, n_knots)
        vals[0] = vals[-1] = 0.0
        if np.all(vals == 0.0):
            continue
        knots, keep = np.unique(knots, return_index=True)
        vals = vals[keep]
        if len(knots) < 3:
            continue
        slopes = np.diff(vals) / np.diff(knots)
        cut = min(0.5 * nu1, t_hi)
        if exact:
            h0 = float(np.sum(
                pa_coef * slopes**2 * np.array([
                    numerics.power_integral(pa_expo, knots[i], knots[i + 1])
                    for i in range(len(knots) - 1)])))
            mass = numerics.piecewise_linear_power_integral(w_expo, knots, vals) * w_coef
            kk = int(np.searchsorted(knots, cut))
            kn = np.concatenate((knots[:kk], [cut]))
            vv = np.concatenate((vals[:kk], [np.interp(cut, knots, vals)]))
            bar = barrier_coef * w_coef * (
                numerics.piecewise_linear_power_integral(e_H + w_expo, kn, vv)
                - k["C2"] * numerics.piecewise_linear_power_integral(e_H + 1.0 + w_expo, kn, vv))
        else:
            h0, mass, bar = _hardy_terms_quadrature(
                model, knots, vals, slopes, cut, barrier_coef, k["C2"], e_H)
        if h0 <= 0:
            continue
        slack = (h0 + C1 * mass - bar) / h0
        if slack < min_slack:
            min_slack, worst = slack, s
    return HardyCheckReport(min_slack, n_samples, C1, nu1, worst)
