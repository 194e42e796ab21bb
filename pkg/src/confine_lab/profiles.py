"""Domains, boundary decompositions, and coefficient fields.

A :class:`CoefficientProfile` bundles a stock domain with per-boundary-
component laws for the isotropic diffusion scale ``a`` and the stationary
weight ``rho_inf`` (equivalently the drift potential ``F = -log rho_inf``).
Near each boundary component the laws are power laws ``D * t**beta`` and
``rho * t**gamma`` of the Euclidean boundary distance ``t``; an optional
cosine blend flattens them to the reference value 1 deeper than the collar
so multi-component profiles stay consistent in the bulk.

All profile objects are immutable after construction and safe to share
across workers.
"""

from __future__ import annotations

import math

try:
    import tomllib
except ModuleNotFoundError:           # Python 3.10
    import tomli as tomllib
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .errors import PointOutsideDomain, UnsupportedDomain

# Domain kinds
INTERVAL = "interval"            # normal model (0, length); boundary is t = 0
BALL = "ball"
ANNULUS = "annulus"
PUNCTURED_BALL = "punctured_ball"
PUNCTURED_SPACE = "punctured_space"
EXTERIOR = "exterior"
HALF_STRIP = "half_strip"

_BOUNDED = {INTERVAL, BALL, ANNULUS, PUNCTURED_BALL}
_UNBOUNDED = {PUNCTURED_SPACE, EXTERIOR, HALF_STRIP}


@dataclass(frozen=True)
class DomainSpec:
    """Shape and dimension of the open set the operator lives on."""

    kind: str
    dim: int
    radius: float = 0.0          # ball / punctured ball / exterior cutoff
    r_in: float = 0.0            # annulus
    r_out: float = 0.0           # annulus
    length: float = 0.0          # interval normal model
    width: float = 0.0           # half strip |x_d| < width

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dimension must be >= 1")
        if self.kind in (BALL, PUNCTURED_BALL, EXTERIOR) and self.radius <= 0:
            raise ValueError("radius must be positive")
        if self.kind == ANNULUS:
            if self.r_in <= 0 or self.r_out <= self.r_in:
                raise ValueError("annulus needs 0 < r_in < r_out")
        if self.kind == INTERVAL and self.length <= 0:
            raise ValueError("interval length must be positive")
        if self.kind == HALF_STRIP:
            if self.dim != 2:
                raise ValueError("half strip is the planar example; dim must be 2")
            if self.width <= 0:
                raise ValueError("strip width must be positive")
        if self.kind not in _BOUNDED | _UNBOUNDED:
            raise ValueError(f"unknown domain kind {self.kind!r}")

    # -- constructors -------------------------------------------------
    @staticmethod
    def interval(length: float, dim: int = 1) -> "DomainSpec":
        return DomainSpec(INTERVAL, dim, length=length)

    @staticmethod
    def ball(radius: float, dim: int) -> "DomainSpec":
        return DomainSpec(BALL, dim, radius=radius)

    @staticmethod
    def annulus(r_in: float, r_out: float, dim: int) -> "DomainSpec":
        return DomainSpec(ANNULUS, dim, r_in=r_in, r_out=r_out)

    @staticmethod
    def punctured_ball(radius: float, dim: int) -> "DomainSpec":
        return DomainSpec(PUNCTURED_BALL, dim, radius=radius)

    @staticmethod
    def punctured_space(dim: int) -> "DomainSpec":
        return DomainSpec(PUNCTURED_SPACE, dim)

    @staticmethod
    def exterior(radius: float, dim: int) -> "DomainSpec":
        return DomainSpec(EXTERIOR, dim, radius=radius)

    @staticmethod
    def half_strip(width: float = 1.0) -> "DomainSpec":
        return DomainSpec(HALF_STRIP, 2, width=width)

    # -- geometry ------------------------------------------------------
    @property
    def bounded(self) -> bool:
        return self.kind in _BOUNDED

    def n_components(self) -> int:
        return {ANNULUS: 2, PUNCTURED_BALL: 2}.get(self.kind, 1)

    def component_dims(self) -> list[int]:
        """Default intrinsic dimension d_j of each boundary component."""
        d = self.dim
        return {
            INTERVAL: [d - 1],
            BALL: [d - 1],
            ANNULUS: [d - 1, d - 1],
            PUNCTURED_BALL: [0, d - 1],      # origin first, then outer sphere
            PUNCTURED_SPACE: [0],
            EXTERIOR: [d - 1],
            HALF_STRIP: [1],
        }[self.kind]

    def separation(self) -> float:
        """Minimal Euclidean distance between distinct components (inf if one)."""
        if self.kind == ANNULUS:
            return self.r_out - self.r_in
        if self.kind == PUNCTURED_BALL:
            return self.radius
        return math.inf

    def contains(self, x) -> bool:
        x = _as_point(x, self.dim)
        r = float(np.linalg.norm(x))
        if self.kind == INTERVAL:
            return 0.0 < x[0] < self.length
        if self.kind == BALL:
            return r < self.radius
        if self.kind == ANNULUS:
            return self.r_in < r < self.r_out
        if self.kind == PUNCTURED_BALL:
            return 0.0 < r < self.radius
        if self.kind == PUNCTURED_SPACE:
            return r > 0.0
        if self.kind == EXTERIOR:
            return r > self.radius
        if self.kind == HALF_STRIP:
            return abs(x[1]) < self.width
        raise UnsupportedDomain(self.kind)

    def boundary_distance(self, x) -> tuple[float, int]:
        """Euclidean distance to the boundary and the nearest component id.

        Ties go to the smaller component id.  Raises
        :class:`PointOutsideDomain` if x is not strictly inside.
        """
        if not self.contains(x):
            raise PointOutsideDomain(f"{x!r} not inside {self.kind}")
        x = _as_point(x, self.dim)
        r = float(np.linalg.norm(x))
        if self.kind == INTERVAL:
            return x[0], 0
        if self.kind == BALL:
            return self.radius - r, 0
        if self.kind == ANNULUS:
            d_in, d_out = r - self.r_in, self.r_out - r
            return (d_in, 0) if d_in <= d_out else (d_out, 1)
        if self.kind == PUNCTURED_BALL:
            d0, d1 = r, self.radius - r
            return (d0, 0) if d0 <= d1 else (d1, 1)
        if self.kind == PUNCTURED_SPACE:
            return r, 0
        if self.kind == EXTERIOR:
            return r - self.radius, 0
        if self.kind == HALF_STRIP:
            return self.width - abs(x[1]), 0
        raise UnsupportedDomain(self.kind)


def _as_point(x, dim: int) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if arr.ndim != 1 or arr.size != dim:
        raise PointOutsideDomain(f"point {x!r} does not live in R^{dim}")
    return arr


@dataclass(frozen=True)
class BoundaryComponent:
    """One boundary piece with its coefficient exponents.

    ``beta``/``gamma`` are the collar power laws for diffusion and weight;
    the two-sided constants allow bound-only data (``D_minus < D_plus``),
    in which case numeric evaluation uses the geometric mean.  ``nu0`` is
    the collar depth the hypotheses refer to.
    """

    id: int
    d_j: int
    beta: float
    gamma: float
    D_minus: float = 1.0
    D_plus: float = 1.0
    rho_minus: float = 1.0
    rho_plus: float = 1.0
    K: float = 1.0
    L: float = 1.0
    nu0: float = 0.25
    a_fn: Callable[[np.ndarray], np.ndarray] | None = None     # custom a(t)
    rho_fn: Callable[[np.ndarray], np.ndarray] | None = None   # custom rho(t)

    def __post_init__(self):
        if self.D_minus > self.D_plus or self.rho_minus > self.rho_plus:
            raise ValueError("lower constants must not exceed upper constants")

    @property
    def D(self) -> float:
        return math.sqrt(self.D_minus * self.D_plus)

    @property
    def rho(self) -> float:
        return math.sqrt(self.rho_minus * self.rho_plus)

    @property
    def is_power_law(self) -> bool:
        return self.a_fn is None and self.rho_fn is None

    def codim(self, dim: int) -> int:
        return dim - self.d_j

    def eta(self, dim: int) -> float:
        return 1.0 - self.codim(dim)


def power_component(cid, d_j, beta, gamma, D=1.0, rho=1.0, nu0=0.25, K=None, L=1.0):
    """Power-law component with equal lower/upper constants."""
    return BoundaryComponent(
        id=cid, d_j=d_j, beta=beta, gamma=gamma,
        D_minus=D, D_plus=D, rho_minus=rho, rho_plus=rho,
        K=K if K is not None else max(D, 1.0), L=L, nu0=nu0,
    )


@dataclass(frozen=True)
class InfinityRecord:
    """Growth data at infinity for unbounded domains.

    ``beta_inf`` bounds the diffusion scale by K |x|**beta_inf for |x| > R_cut,
    and ``L_inf`` is the constant in the admissible weight growth
    (exp(L |x|**(1 - beta_inf/2)) when beta_inf < 2, |x|**L when beta_inf == 2).
    """

    beta_inf: float
    L_inf: float = 1.0
    R_cut: float = 1.0

    def __post_init__(self):
        if self.R_cut <= 0:
            raise ValueError("R_cut must be positive")


@dataclass(frozen=True)
class CoefficientProfile:
    """Domain + per-component coefficient laws; the single source of truth."""

    domain: DomainSpec
    components: tuple[BoundaryComponent, ...]
    infinity: InfinityRecord | None = None
    blended: bool = False        # flatten laws to 1 past the collar

    def __post_init__(self):
        comps = tuple(self.components)
        object.__setattr__(self, "components", comps)
        if len(comps) != self.domain.n_components():
            raise ValueError(
                f"{self.domain.kind} needs {self.domain.n_components()} components, "
                f"got {len(comps)}"
            )
        for j, c in enumerate(comps):
            if c.id != j:
                raise ValueError("component ids must be 0..p-1 in order")

    # -- radial laws ----------------------------------------------------
    def component(self, j: int) -> BoundaryComponent:
        return self.components[j]

    def a_of(self, j: int, t):
        """Diffusion scale a(t) at depth t from component j."""
        c = self.components[j]
        t = np.asarray(t, dtype=float)
        if c.a_fn is not None:
            raw = np.asarray(c.a_fn(t), dtype=float)
        else:
            raw = c.D * t**c.beta
        return self._blend(raw, t, c.nu0) if self.blended else raw

    def rho_of(self, j: int, t):
        """Weight rho_inf(t) at depth t from component j."""
        c = self.components[j]
        t = np.asarray(t, dtype=float)
        if c.rho_fn is not None:
            raw = np.asarray(c.rho_fn(t), dtype=float)
        else:
            raw = c.rho * t**c.gamma
        return self._blend(raw, t, c.nu0) if self.blended else raw

    @staticmethod
    def _blend(raw, t, nu0):
        # cosine ramp from the collar law to the reference value 1 over
        # [nu0/2, nu0]; the hypotheses only constrain the collar itself
        s = np.clip((t - 0.5 * nu0) / (0.5 * nu0), 0.0, 1.0)
        w = 0.5 * (1.0 + np.cos(math.pi * s))
        return w * raw + (1.0 - w)

    # -- pointwise fields -------------------------------------------------
    def evaluate_diffusion(self, x) -> np.ndarray:
        """Isotropic diffusion matrix a(delta_j(x)) * Identity at x."""
        delta, j = self.domain.boundary_distance(x)
        return float(self.a_of(j, delta)) * np.eye(self.domain.dim)

    def evaluate_weight(self, x) -> float:
        delta, j = self.domain.boundary_distance(x)
        return float(self.rho_of(j, delta))

    def drift_potential(self, x) -> float:
        """F(x) with rho_inf = exp(-F)."""
        return -math.log(self.evaluate_weight(x))

    def boundary_distance(self, x) -> tuple[float, int]:
        return self.domain.boundary_distance(x)

    # -- validation -------------------------------------------------------
    def validate(self) -> list[str]:
        """Invariant diagnostics; an empty list means the profile is usable."""
        diags: list[str] = []
        d0 = self.domain.separation()
        for c in self.components:
            if not (0 <= c.d_j <= self.domain.dim - 1):
                diags.append(f"BadComponentDim: component {c.id} d_j={c.d_j}")
            if min(c.D_minus, c.D_plus) <= 0:
                diags.append(f"NonPositiveDiffusion: component {c.id}")
            if min(c.rho_minus, c.rho_plus) <= 0:
                diags.append(f"NonPositiveWeight: component {c.id}")
            if c.nu0 <= 0 or c.nu0 > 1:
                diags.append(f"BadCollarDepth: component {c.id} nu0={c.nu0}")
            ts = np.geomspace(1e-8, min(c.nu0, 1.0), 33)
            try:
                if np.any(self.a_of(c.id, ts) <= 0):
                    diags.append(f"NonPositiveDiffusion: component {c.id} (sampled)")
                if np.any(self.rho_of(c.id, ts) <= 0):
                    diags.append(f"NonPositiveWeight: component {c.id} (sampled)")
            except (ValueError, FloatingPointError):
                diags.append(f"LawEvaluationFailed: component {c.id}")
        if len(self.components) > 1 and d0 < math.inf:
            for c in self.components:
                if 4.0 * c.nu0 > d0:
                    diags.append(
                        f"CollarOverlap: component {c.id} 4*nu0={4 * c.nu0:g} "
                        f"exceeds separation {d0:g}"
                    )
        if self.domain.kind in (PUNCTURED_SPACE, EXTERIOR) and self.infinity is None:
            diags.append("MissingInfinityRecord: unbounded domain with "
                         "bounded boundary")
        return diags

    def with_exponents(self, beta=None, gamma=None, j=0) -> "CoefficientProfile":
        """Copy with one component's exponents replaced (sweep helper)."""
        comp = self.components[j]
        new = replace(
            comp,
            beta=comp.beta if beta is None else float(beta),
            gamma=comp.gamma if gamma is None else float(gamma),
        )
        comps = list(self.components)
        comps[j] = new
        return replace(self, components=tuple(comps))


# ----------------------------------------------------------------------
# Stock profile factories
# ----------------------------------------------------------------------

def _auto_nu0(domain: DomainSpec, nu0: float | None) -> float:
    cap = min(1.0, domain.separation() / 4.0)
    if domain.kind in (BALL, PUNCTURED_BALL, EXTERIOR):
        cap = min(cap, domain.radius)
    if domain.kind == ANNULUS:
        cap = min(cap, (domain.r_out - domain.r_in) / 2.0)
    if domain.kind == INTERVAL:
        cap = min(cap, domain.length)
    if domain.kind == HALF_STRIP:
        cap = min(cap, domain.width)
    return min(nu0, cap) if nu0 is not None else min(0.25, cap)


def normal_model_profile(beta, gamma, length=1.0, dim=2, d_j=None, D=1.0,
                         rho=1.0, nu0=1.0, blended=False) -> CoefficientProfile:
    """Interval normal model (0, length) with a single power-law wall at 0."""
    dom = DomainSpec.interval(length, dim)
    if d_j is None:
        d_j = dim - 1
    nu = min(nu0, length)
    comp = power_component(0, d_j, beta, gamma, D=D, rho=rho, nu0=nu)
    return CoefficientProfile(dom, (comp,), blended=blended)


def ball_profile(beta, gamma, radius=1.0, dim=2, D=1.0, rho=1.0, nu0=None,
                 blended=False) -> CoefficientProfile:
    dom = DomainSpec.ball(radius, dim)
    comp = power_component(0, dim - 1, beta, gamma, D=D, rho=rho,
                           nu0=_auto_nu0(dom, nu0))
    return CoefficientProfile(dom, (comp,), blended=blended)


def annulus_profile(r_in, r_out, dim, inner: dict, outer: dict,
                    blended=True) -> CoefficientProfile:
    dom = DomainSpec.annulus(r_in, r_out, dim)
    nu = _auto_nu0(dom, None)
    comps = (
        power_component(0, dim - 1, nu0=inner.pop("nu0", nu), **inner),
        power_component(1, dim - 1, nu0=outer.pop("nu0", nu), **outer),
    )
    return CoefficientProfile(dom, comps, blended=blended)


def punctured_ball_profile(radius, dim, origin: dict, outer: dict,
                           blended=True) -> CoefficientProfile:
    dom = DomainSpec.punctured_ball(radius, dim)
    nu = _auto_nu0(dom, None)
    comps = (
        power_component(0, 0, nu0=origin.pop("nu0", nu), **origin),
        power_component(1, dim - 1, nu0=outer.pop("nu0", nu), **outer),
    )
    return CoefficientProfile(dom, comps, blended=blended)


def punctured_space_profile(beta, gamma, dim, beta_inf, L_inf=1.0, R_cut=1.0,
                            D=1.0, rho=1.0, nu0=None, blended=True) -> CoefficientProfile:
    dom = DomainSpec.punctured_space(dim)
    comp = power_component(0, 0, beta, gamma, D=D, rho=rho,
                           nu0=_auto_nu0(dom, nu0))
    return CoefficientProfile(dom, (comp,),
                              infinity=InfinityRecord(beta_inf, L_inf, R_cut),
                              blended=blended)


def exterior_profile(beta, gamma, radius, dim, beta_inf, L_inf=1.0, R_cut=None,
                     D=1.0, rho=1.0, nu0=None, blended=True) -> CoefficientProfile:
    dom = DomainSpec.exterior(radius, dim)
    comp = power_component(0, dim - 1, beta, gamma, D=D, rho=rho,
                           nu0=_auto_nu0(dom, nu0))
    rec = InfinityRecord(beta_inf, L_inf, R_cut if R_cut is not None else 4 * radius)
    return CoefficientProfile(dom, (comp,), infinity=rec, blended=blended)


def half_strip_profile(width: float = 1.0) -> CoefficientProfile:
    """The planar strip with diffusion (1 - (x2/width)^2)^(-1) * Identity.

    As a function of the wall distance t the scale is
    a(t) = width^2 / (t (2 width - t)), which blows up like t^(-1) at the
    wall; the asymptotic power-law tags are beta = -1, D = width / 2.
    """
    w = width

    def a_fn(t):
        t = np.asarray(t, dtype=float)
        return w * w / (t * (2.0 * w - t))

    dom = DomainSpec.half_strip(w)
    comp = BoundaryComponent(
        id=0, d_j=1, beta=-1.0, gamma=0.0,
        D_minus=w / 2.0, D_plus=w / 2.0, nu0=min(1.0, w),
        a_fn=a_fn,
    )
    return CoefficientProfile(dom, (comp,))


# ----------------------------------------------------------------------
# TOML profile files
# ----------------------------------------------------------------------

def load_profile(path) -> CoefficientProfile:
    """Read a profile description from a TOML file.

    Layout::

        [domain]
        kind = "ball"       # ball | annulus | punctured_ball | interval |
                            # punctured_space | exterior | half_strip
        radius = 1.0
        dim = 2

        [[component]]
        beta = 1.5
        gamma = 0.0
        D = 1.0
        rho = 1.0
        nu0 = 0.25

        [infinity]          # only for unbounded domains
        beta = 2.0
        L = 1.0
        R = 4.0
    """
    with open(path, "rb") as fh:
        data = tomllib.load(fh)
    dom_tbl = data["domain"]
    kind = dom_tbl["kind"]
    dim = int(dom_tbl.get("dim", 2))
    if kind == BALL:
        dom = DomainSpec.ball(float(dom_tbl["radius"]), dim)
    elif kind == ANNULUS:
        dom = DomainSpec.annulus(float(dom_tbl["r_in"]), float(dom_tbl["r_out"]), dim)
    elif kind == PUNCTURED_BALL:
        dom = DomainSpec.punctured_ball(float(dom_tbl["radius"]), dim)
    elif kind == INTERVAL:
        dom = DomainSpec.interval(float(dom_tbl.get("length", 1.0)), dim)
    elif kind == PUNCTURED_SPACE:
        dom = DomainSpec.punctured_space(dim)
    elif kind == EXTERIOR:
        dom = DomainSpec.exterior(float(dom_tbl["radius"]), dim)
    elif kind == HALF_STRIP:
        return half_strip_profile(float(dom_tbl.get("width", 1.0)))
    else:
        raise UnsupportedDomain(kind)

    comp_tbls = data.get("component", [])
    default_dims = dom.component_dims()
    comps = []
    for j, tbl in enumerate(comp_tbls):
        d_j = int(tbl.get("d_j", default_dims[j] if j < len(default_dims) else dim - 1))
        if "D" in tbl:
            d_lo = d_hi = float(tbl["D"])
        else:
            d_lo, d_hi = float(tbl.get("D_minus", 1.0)), float(tbl.get("D_plus", 1.0))
        if "rho" in tbl:
            r_lo = r_hi = float(tbl["rho"])
        else:
            r_lo, r_hi = float(tbl.get("rho_minus", 1.0)), float(tbl.get("rho_plus", 1.0))
        comps.append(BoundaryComponent(
            id=j, d_j=d_j, beta=float(tbl["beta"]), gamma=float(tbl.get("gamma", 0.0)),
            D_minus=d_lo, D_plus=d_hi, rho_minus=r_lo, rho_plus=r_hi,
            K=float(tbl.get("K", max(d_hi, 1.0))), L=float(tbl.get("L", 1.0)),
            nu0=float(tbl.get("nu0", _auto_nu0(dom, None))),
        ))

    inf_rec = None
    if "infinity" in data:
        tbl = data["infinity"]
        inf_rec = InfinityRecord(float(tbl["beta"]), float(tbl.get("L", 1.0)),
                                 float(tbl.get("R", 1.0)))

    return CoefficientProfile(dom, tuple(comps), infinity=inf_rec,
                              blended=bool(data.get("blended", False)))
