"""Closed-form eigenvalue bounds for lambda_1(Omega, beta) with hypothesis gates.

Every function returns a :class:`Bound`: a one-sided value together with
whether the hypotheses of the underlying theorem were verified. Lower bounds
that depend on universal constants of unknown size carry ``conditional=True``
and are never turned into a pass/fail verdict by :func:`check`.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
from scipy.special import jn_zeros

from . import geometry as geo
from .eigensolve import Spectrum

# first Dirichlet eigenvalue of the unit disk, j_{0,1}^2
GAMMA_UNIT_DISK = float(jn_zeros(0, 1)[0] ** 2)
CONDITIONAL_NOTE = "unconditional only up to universal constants"


@lru_cache(maxsize=1)
def theta0_value() -> float:
    """De Gennes constant from the half-line shooting solver (cached)."""
    from .closedform import theta0

    return float(theta0().theta0)


@lru_cache(maxsize=1)
def xi0_value() -> float:
    from .closedform import theta0

    return float(theta0().xi0)


@dataclass(frozen=True)
class Bound:
    theorem: str
    side: str                     # "upper" | "lower"
    value: float
    strict: bool = False
    hypotheses_ok: bool = True
    messages: tuple = ()
    constants_used: dict = field(default_factory=dict)
    conditional: bool = False

    def __post_init__(self):
        if self.side not in ("upper", "lower"):
            raise ValueError(f"side must be 'upper' or 'lower', got {self.side!r}")
        if not math.isfinite(self.value):
            raise ValueError(f"bound value must be finite, got {self.value}")
        if self.side == "lower" and self.value < 0:
            raise ValueError("lower bounds are clipped at 0")

    def to_json(self) -> dict:
        d = asdict(self)
        d["messages"] = list(self.messages)
        return d


@dataclass(frozen=True)
class BoundConstants:
    """Universal constants the lower bounds depend on.

    C1 is the Chen-Li constant (value unknown, placeholder 1). c and C are
    derived through c = C1/(96 gamma) and C = c 2^-14 / M unless overridden.
    M is the covering multiplicity; None means "measure it with eps_net".
    Lambda is the self-tiling constant, user supplied.
    """

    C1: float = 1.0
    C1_known: bool = False
    c: Optional[float] = None
    C: Optional[float] = None
    M: Optional[float] = None
    Lambda: Optional[float] = None

    def __post_init__(self):
        for name in ("C1", "c", "C", "M", "Lambda"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ValueError(f"constant {name} must be > 0, got {v}")
        if self.Lambda is not None and self.Lambda > theta0_value() + 1e-12:
            raise ValueError(f"Lambda={self.Lambda} exceeds Theta0={theta0_value():.6f}")

    @property
    def c_value(self) -> float:
        return self.c if self.c is not None else self.C1 / (96.0 * GAMMA_UNIT_DISK)

    def C_value(self, M: Optional[float] = None) -> float:
        if self.C is not None:
            return self.C
        M = M if M is not None else self.M
        if M is None:
            raise ValueError("covering multiplicity M is unknown; measure it with eps_net")
        return self.c_value * 2.0 ** -14 / M

    @property
    def known(self) -> bool:
        return self.C1_known

    @classmethod
    def from_dict(cls, d: dict) -> "BoundConstants":
        allowed = {"C1", "C1_known", "c", "C", "M", "Lambda"}
        extra = set(d) - allowed
        if extra:
            raise ValueError(f"unknown constants: {sorted(extra)}")
        return cls(**d)


DEFAULT_CONSTANTS = BoundConstants()


def _require_positive(**kw) -> None:
    for k, v in kw.items():
        if not (v > 0 and math.isfinite(v)):
            raise ValueError(f"{k} must be positive and finite, got {v}")


# --- upper bounds ---------------------------------------------------------------

def ub_circumradius(R: float, beta: float) -> Bound:
    """beta - 1/(2R^2) for R > 1/sqrt(beta), R^2 beta^2 / 2 otherwise."""
    _require_positive(R=R, beta=beta)
    if R * R * beta > 1.0:
        v, regime = beta - 1.0 / (2 * R * R), "R > 1/sqrt(beta)"
    else:
        v, regime = R * R * beta * beta / 2.0, "R <= 1/sqrt(beta)"
    return Bound("circumradius", "upper", float(v), messages=(regime,))


def ub_universal(beta: float) -> Bound:
    if beta < 0:
        raise ValueError("use |beta|; the spectrum is symmetric in beta")
    if beta == 0:
        return Bound("universal", "upper", 0.0, strict=False,
                     messages=("beta=0: lambda_1 = 0 is attained by constants",))
    return Bound("universal", "upper", float(beta), strict=True)


def ub_theta0_class(spec: geo.DomainSpec, beta: float) -> Bound:
    """Theta0 beta, strict, for sub-graphs or for domains in a half-strip.

    Case 2 needs the domain to contain (a,b) x (0, -2 xi0 / sqrt(beta)).
    """
    _require_positive(beta=beta)
    th = theta0_value()
    value = th * beta
    if spec.is_subgraph:
        return Bound("theta0_class", "upper", value, strict=True, messages=("case 1: sub-graph",),
                     constants_used={"Theta0": th})
    H = spec.strip_height
    need = -2.0 * xi0_value() / math.sqrt(beta)
    if H is not None and H >= need:
        return Bound("theta0_class", "upper", value, strict=True,
                     messages=(f"case 2: strip height {H:g} >= {need:.6g}",),
                     constants_used={"Theta0": th})
    msg = "neither the sub-graph nor the strip condition holds"
    if spec.kind == "disk":
        msg += "; disks are not covered"
    return Bound("theta0_class", "upper", value, strict=True, hypotheses_ok=False, messages=(msg,),
                 constants_used={"Theta0": th})


def ub_selftiling(Lambda: float, beta: float) -> Bound:
    _require_positive(Lambda=Lambda, beta=beta)
    th = theta0_value()
    if Lambda > th + 1e-12:
        raise ValueError(f"Lambda={Lambda} exceeds Theta0={th:.6f}")
    return Bound("self_tiling", "upper", float(Lambda * beta), constants_used={"Lambda": Lambda})


def ub_width(eps: float, beta: float) -> Bound:
    """eps^2 beta^2 / 4 where eps is the minimal width."""
    if eps < 0 or beta < 0:
        raise ValueError("width and beta must be >= 0")
    return Bound("small_width", "upper", float(eps * eps * beta * beta / 4.0))


def ub_simply_connected_area(area: float, beta: float, simply_connected: bool = True) -> Bound:
    if area < 0 or beta < 0:
        raise ValueError("area and beta must be >= 0")
    v = beta * -math.expm1(-beta * area / (2 * math.pi))
    if simply_connected:
        return Bound("area_exponential", "upper", float(v))
    return Bound("area_exponential", "upper", float(v), hypotheses_ok=False,
                 messages=("requires a simply connected domain",))


def ub_fh2(area: float, beta: float, simply_connected: bool = True) -> Bound:
    if area < 0 or beta < 0:
        raise ValueError("area and beta must be >= 0")
    v = beta * beta * area / (8 * math.pi)
    if simply_connected:
        return Bound("area_quadratic", "upper", float(v))
    return Bound("area_quadratic", "upper", float(v), hypotheses_ok=False,
                 messages=("requires a simply connected domain",))


def ub_variable(beta_star: float, phi_star: float, area: Optional[float] = None,
                beta_min: float = 0.0, simply_connected: bool = True) -> list[Bound]:
    """Items 1-3 of the variable-field corollary.

    beta_star = max |beta|, phi_star = max of the torsion function (for the
    field beta, i.e. -Laplace phi = beta, phi = 0 on the boundary). Item 2
    needs beta >= 0 pointwise, item 3 additionally uses the area.
    """
    if beta_star < 0 or phi_star < 0:
        raise ValueError("beta_star and phi_star must be >= 0")
    gate = () if simply_connected else (
        "non-simply connected: holds for the canonical potential only",)
    ok = bool(simply_connected)
    out = []
    if beta_star == 0:
        out.append(Bound("variable_field_max", "upper", 0.0, hypotheses_ok=ok, messages=gate))
    else:
        out.append(Bound("variable_field_max", "upper", float(beta_star), strict=True,
                         hypotheses_ok=ok, messages=gate))
    ok2 = ok and beta_min >= 0
    msg2 = gate if beta_min >= 0 else gate + ("needs beta >= 0 pointwise",)
    out.append(Bound("variable_field_torsion", "upper", float(beta_star * -math.expm1(-2 * phi_star)),
                     hypotheses_ok=ok2, messages=msg2))
    if area is not None:
        out.append(Bound("variable_field_area", "upper",
                         float(beta_star * -math.expm1(-beta_star * area / (2 * math.pi))),
                         hypotheses_ok=ok2, messages=msg2))
    return out


def ub_variable_integral(mesh, beta_field, phi) -> Bound:
    """int beta (e^{2 phi} - 1) / int e^{2 phi} with P1 phi, midpoint quadrature."""
    areas = mesh.areas()
    tri = mesh.triangles
    pv = np.asarray(phi.values, dtype=float)[tri]                   # (T, 3)
    mid_phi = 0.5 * (pv + np.roll(pv, -1, axis=1))                  # edge midpoints
    pts = mesh.nodes[tri]
    mid_x = 0.5 * (pts + np.roll(pts, -1, axis=1))                  # (T, 3, 2)
    if callable(beta_field):
        b = np.asarray(beta_field(mid_x.reshape(-1, 2)), dtype=float).reshape(mid_phi.shape)
    else:
        b = np.full(mid_phi.shape, float(beta_field))
    w = areas[:, None] / 3.0
    e2 = np.exp(2 * mid_phi)
    num = float(np.sum(w * b * (e2 - 1.0)))
    den = float(np.sum(w * e2))
    value = num / den
    ok = mesh.spec is None or mesh.spec.simply_connected
    msgs = () if ok else ("non-simply connected: holds for the canonical potential only",)
    return Bound("variable_field_integral", "upper", float(value), hypotheses_ok=ok, messages=msgs)


def curve_ub_quarter(beta: float) -> Bound:
    """Upper bound beta/4 for the first eigenvalue of a closed curve."""
    if beta < 0:
        raise ValueError("beta must be >= 0")
    return Bound("curve_quarter", "upper", float(beta / 4.0),
                 messages=("bound for lambda_1 of the boundary curve",))


# --- lower bounds ---------------------------------------------------------------

def lb_kovarik(area: float, rho: float, lam2N: float, beta: float,
               simply_connected: bool = True) -> Bound:
    """Kovarik lower bound with inradius rho and Neumann lambda_2."""
    _require_positive(area=area, rho=rho, lam2N=lam2N, beta=beta)
    pre = math.pi / (4 * area)
    v1 = pre * beta ** 2 * rho ** 4 * lam2N / (beta ** 2 * rho ** 2 + 6 * lam2N)
    v2 = pre * beta * rho ** 2 * lam2N / (beta + 24 * lam2N)
    t = beta * rho * rho
    if math.isclose(t, 1.0, rel_tol=1e-14):
        v, regime = max(v1, v2), "beta = rho^-2: both regimes valid"
    elif t < 1.0:
        v, regime = v1, "beta < rho^-2"
    else:
        v, regime = v2, "beta > rho^-2"
    if not simply_connected:
        return Bound("kovarik", "lower", float(v), hypotheses_ok=False,
                     messages=(regime, "requires a simply connected domain"))
    return Bound("kovarik", "lower", float(v), messages=(regime,))


def lb_chenli(R: float, R0: float, constants: BoundConstants = DEFAULT_CONSTANTS) -> Bound:
    """Lower bound C1 R^2 / R0^4 for the Neumann lambda_2 of a star-shaped domain."""
    _require_positive(R=R, R0=R0)
    if R > R0:
        raise ValueError("need R <= R0")
    v = constants.C1 * R * R / R0 ** 4
    msgs = ("bounds the Neumann lambda_2, not lambda_1",)
    cond = not constants.known
    if cond:
        msgs += (CONDITIONAL_NOTE,)
    return Bound("chen_li", "lower", float(v), messages=msgs,
                 constants_used={"C1": constants.C1}, conditional=cond)


def lb_star(R: float, R0: float, rho: float, beta: float,
            constants: BoundConstants = DEFAULT_CONSTANTS) -> Bound:
    """Star-shaped lower bound; at beta = rho^-2 the larger regime value is reported."""
    _require_positive(R=R, R0=R0, rho=rho, beta=beta)
    if not R <= rho * (1 + 1e-12) or not rho <= R0 * (1 + 1e-12):
        raise ValueError("need R <= rho <= R0")
    c = constants.c_value
    v1 = c * beta ** 2 * R ** 8 / R0 ** 6
    v2 = c * R ** 6 * beta / (R0 ** 6 * (R * R * beta + 1))
    t = beta * rho * rho
    if math.isclose(t, 1.0, rel_tol=1e-14):
        v, regime = max(v1, v2), "beta = rho^-2: larger of both regimes"
    elif t < 1.0:
        v, regime = v1, "beta < rho^-2"
    else:
        v, regime = v2, "beta > rho^-2"
    cond = not constants.known
    return Bound("star_shaped", "lower", float(v),
                 messages=(regime,) + ((CONDITIONAL_NOTE,) if cond else ()),
                 constants_used={"C1": constants.C1, "c": c, "gamma": GAMMA_UNIT_DISK},
                 conditional=cond)


def lb_rolling(delta: float, beta: float, constants: BoundConstants = DEFAULT_CONSTANTS,
               M: Optional[float] = None) -> Bound:
    """C beta^2 delta^2 if beta delta^2 <= 1, C beta otherwise (delta = rolling radius)."""
    if delta < 0 or beta < 0:
        raise ValueError("delta and beta must be >= 0")
    C = constants.C_value(M)
    v = C * min(beta * beta * delta * delta, beta)
    cond = not constants.known
    used = {"C1": constants.C1, "c": constants.c_value, "C": C}
    if constants.C is None:
        used["M"] = M if M is not None else constants.M
    return Bound("rolling_radius", "lower", float(v),
                 messages=(CONDITIONAL_NOTE,) if cond else (),
                 constants_used=used, conditional=cond)


def lb_covering(piece_lambda1s: Sequence[float], K: int) -> Bound:
    """lambda_1(Omega) >= min_i lambda_1(Omega_i) / K for a K-fold covering."""
    vals = np.asarray(list(piece_lambda1s), dtype=float)
    if vals.size == 0:
        raise ValueError("need at least one piece")
    if K < 1:
        raise ValueError("multiplicity K must be >= 1")
    if np.any(vals < 0):
        raise ValueError("piece eigenvalues must be >= 0")
    return Bound("covering", "lower", float(vals.min() / K),
                 messages=(f"{vals.size} pieces, multiplicity {K}",))


def tube_lb(curve_lambda1: float, beta: float, h: float,
            enclosed_area: Optional[float] = None) -> Bound:
    """max(0, lambda_1(Gamma) - sqrt(beta) h) for the inner tube of half-width h."""
    if curve_lambda1 < 0 or beta < 0 or h < 0:
        raise ValueError("inputs must be >= 0")
    msgs = ["valid only for h below an unknown domain-dependent threshold"]
    ok = True
    if enclosed_area is not None:
        flux = beta * enclosed_area / (2 * math.pi)
        if abs(flux - round(flux)) < 1e-12 and round(flux) >= 1:
            ok = False
            msgs.append(f"beta |Omega| / 2 pi = {flux:g} is an integer")
    return Bound("tube", "lower", float(max(0.0, curve_lambda1 - math.sqrt(beta) * h)),
                 hypotheses_ok=ok, messages=tuple(msgs))


# --- epsilon nets ----------------------------------------------------------------

def _bbox(spec: geo.DomainSpec) -> tuple[np.ndarray, np.ndarray]:
    k, p = spec.kind, spec.params
    if k == "disk":
        r = p["R"]
        return np.array([-r, -r]), np.array([r, r])
    if k == "annulus":
        r = p["r_out"]
        return np.array([-r, -r]), np.array([r, r])
    if k == "rectangle":
        return np.array([-p["w"] / 2, -p["h"] / 2]), np.array([p["w"] / 2, p["h"] / 2])
    if k == "ellipse":
        return np.array([-p["a"], -p["b"]]), np.array([p["a"], p["b"]])
    if k == "polygon":
        v = np.asarray(p["vertices"], dtype=float)
        return v.min(axis=0), v.max(axis=0)
    pts = p["curve"].point(np.linspace(0, 2 * np.pi, 721))
    return pts.min(axis=0), pts.max(axis=0)


def eps_net(spec: geo.DomainSpec, eps: float, grid: int = 101):
    """Greedy maximal eps-net over a sampling grid.

    Points are pairwise >= eps apart and >= eps from the boundary. Returns
    (points, K) where K is the largest number of disks B(p_i, 2 eps) covering
    a single grid point of the domain.
    """
    _require_positive(eps=eps)
    if grid < 3:
        raise ValueError("grid must be >= 3")
    lo, hi = _bbox(spec)
    xs = np.linspace(lo[0], hi[0], grid)
    ys = np.linspace(lo[1], hi[1], grid)
    X, Y = np.meshgrid(xs, ys, indexing="xy")
    pts = np.column_stack([X.ravel(), Y.ravel()])
    inside = np.array([geo.contains(spec, q) for q in pts])
    pts = pts[inside]
    if len(pts) == 0:
        raise geo.GeometryError("sampling grid has no interior points")
    d = geo.boundary_distance(spec, pts)
    slack = 1e-12 * max(1.0, float(np.max(hi - lo)))
    cand = pts[d >= eps - slack]
    if len(cand) == 0:
        raise geo.GeometryError(f"eps={eps} leaves no interior points (eps >= inradius)")
    chosen = np.empty((0, 2))
    for q in cand:
        if len(chosen) == 0 or np.min(np.hypot(*(chosen - q).T)) >= eps - slack:
            chosen = np.vstack([chosen, q])
    diff = pts[:, None, :] - chosen[None, :, :]
    cover = np.sum(np.hypot(diff[..., 0], diff[..., 1]) < 2 * eps, axis=1)
    return chosen, max(1, int(cover.max()))


# --- homothety ----------------------------------------------------------------

def scale_map(lam, alpha: float, beta: float):
    """Returns (lam / alpha^2, alpha^2 beta).

    From lambda_j(alpha Omega, beta) = lambda_j(Omega, alpha^2 beta) / alpha^2:
    if lam is an eigenvalue of Omega at field alpha^2 beta (the second output),
    then lam / alpha^2 is the matching eigenvalue of alpha Omega at field beta.
    """
    _require_positive(alpha=alpha)
    return np.asarray(lam) / alpha ** 2 if np.ndim(lam) else float(lam) / alpha ** 2, \
        alpha ** 2 * beta


# --- verdicts -------------------------------------------------------------------

@dataclass(frozen=True)
class Verdict:
    status: str            # pass | fail | conditional | inapplicable
    margin: float          # value - lambda for upper bounds, lambda - value for lower
    tolerance: float
    bound: Bound

    def to_json(self) -> dict:
        return {"status": self.status, "margin": self.margin, "tolerance": self.tolerance,
                **self.bound.to_json()}


def check(bound: Bound, spectrum, residual: Optional[float] = None) -> Verdict:
    """Compare a bound with lambda_1 of a spectrum (or a bare eigenvalue).

    The tolerance is residual * max(lambda, 1), the backward-error radius of
    the solver. Strict bounds need the inequality to hold beyond it.
    """
    if isinstance(spectrum, Spectrum):
        lam = float(spectrum.eigenvalues[0])
        res = float(spectrum.residuals[0]) if residual is None else float(residual)
    else:
        lam = float(spectrum)
        res = 0.0 if residual is None else float(residual)
    tol = res * max(abs(lam), 1.0)
    margin = bound.value - lam if bound.side == "upper" else lam - bound.value
    if not bound.hypotheses_ok:
        status = "inapplicable"
    elif bound.conditional:
        status = "conditional"
    elif bound.strict:
        status = "pass" if margin > tol else "fail"
    else:
        status = "pass" if margin >= -tol else "fail"
    return Verdict(status, float(margin), float(tol), bound)


def with_messages(bound: Bound, *msgs: str) -> Bound:
    return replace(bound, messages=tuple(bound.messages) + tuple(msgs))
