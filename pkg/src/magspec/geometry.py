"""Parametric planar domains, closed curves and their geometric functionals.

All lengths are dimensionless.  Parametric kinds (disk, rectangle, annulus,
ellipse, tube) are centred at the origin; polygons keep their coordinates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import integrate
from scipy.spatial import ConvexHull

DOMAIN_KINDS = ("disk", "rectangle", "annulus", "ellipse", "polygon", "tube")
CURVE_KINDS = ("circle", "ellipse", "polyline")


class GeometryError(ValueError):
    """Invalid domain or curve specification."""


class CurvatureError(GeometryError):
    """Tube half-width not below the curve's minimal curvature radius."""


def _positive(params: dict, *names: str) -> None:
    for name in names:
        if name not in params:
            raise GeometryError(f"missing parameter {name!r}")
        value = params[name]
        if not np.isfinite(value) or value <= 0:
            raise GeometryError(f"length parameter {name}={value!r} must be > 0")


def _segments_cross(p1, p2, q1, q2) -> bool:
    """Closed-segment intersection test (touching counts)."""

    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    def on_seg(a, b, c):
        return (min(a[0], b[0]) <= c[0] <= max(a[0], b[0])
                and min(a[1], b[1]) <= c[1] <= max(a[1], b[1]))

    d1, d2 = orient(q1, q2, p1), orient(q1, q2, p2)
    d3, d4 = orient(p1, p2, q1), orient(p1, p2, q2)
    if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)) and d1 * d2 * d3 * d4 != 0:
        return True
    if d1 == 0 and on_seg(q1, q2, p1):
        return True
    if d2 == 0 and on_seg(q1, q2, p2):
        return True
    if d3 == 0 and on_seg(p1, p2, q1):
        return True
    if d4 == 0 and on_seg(p1, p2, q2):
        return True
    return False


def signed_area(vertices: np.ndarray) -> float:
    x, y = vertices[:, 0], vertices[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _check_simple_polygon(vertices: np.ndarray) -> None:
    n = len(vertices)
    if n < 3:
        raise GeometryError("polygon needs at least 3 vertices")
    if not np.all(np.isfinite(vertices)):
        raise GeometryError("polygon vertices must be finite")
    for i in range(n):
        for j in range(i + 1, n):
            # adjacent edges share a vertex by construction
            if j == i + 1 or (i == 0 and j == n - 1):
                continue
            if _segments_cross(vertices[i], vertices[(i + 1) % n],
                               vertices[j], vertices[(j + 1) % n]):
                raise GeometryError(f"polygon not simple: edges {i} and {j} intersect")
    for i in range(n):
        if np.array_equal(vertices[i], vertices[(i + 1) % n]):
            raise GeometryError(f"polygon has repeated vertex {i}")
    if signed_area(vertices) <= 0:
        raise GeometryError("polygon must be counterclockwise with positive area")


@dataclass(frozen=True, eq=False)
class CurveSpec:
    """Simple closed counterclockwise curve: circle{R}, ellipse{a,b} or polyline{vertices}."""

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in CURVE_KINDS:
            raise GeometryError(f"unknown curve kind {self.kind!r}")
        if self.kind == "circle":
            _positive(self.params, "R")
        elif self.kind == "ellipse":
            _positive(self.params, "a", "b")
        else:
            verts = np.asarray(self.params.get("vertices", []), dtype=float)
            if verts.ndim != 2 or verts.shape[1] != 2:
                raise GeometryError("polyline vertices must be an (m, 2) array")
            _check_simple_polygon(verts)

    # --- parametrisation on t in [0, 2*pi) (polyline: vertex index scaled) ---
    def point(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.kind == "circle":
            R = self.params["R"]
            return np.stack([R * np.cos(t), R * np.sin(t)], axis=-1)
        if self.kind == "ellipse":
            a, b = self.params["a"], self.params["b"]
            return np.stack([a * np.cos(t), b * np.sin(t)], axis=-1)
        verts = np.asarray(self.params["vertices"], dtype=float)
        m = len(verts)
        s = np.mod(t, 2 * np.pi) / (2 * np.pi) * m
        i = np.floor(s).astype(int) % m
        f = (s - np.floor(s))[..., None]
        return (1 - f) * verts[i] + f * verts[(i + 1) % m]

    def outward_normal(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.kind == "circle":
            return np.stack([np.cos(t), np.sin(t)], axis=-1)
        if self.kind == "ellipse":
            a, b = self.params["a"], self.params["b"]
            nx, ny = b * np.cos(t), a * np.sin(t)
            nrm = np.hypot(nx, ny)
            return np.stack([nx / nrm, ny / nrm], axis=-1)
        raise GeometryError("normals are undefined at polyline vertices")

    def speed(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.kind == "circle":
            return np.full_like(t, self.params["R"])
        if self.kind == "ellipse":
            a, b = self.params["a"], self.params["b"]
            return np.hypot(a * np.sin(t), b * np.cos(t))
        raise GeometryError("speed is piecewise for polylines")

    def min_curvature_radius(self) -> float:
        if self.kind == "circle":
            return float(self.params["R"])
        if self.kind == "ellipse":
            a, b = self.params["a"], self.params["b"]
            return min(a, b) ** 2 / max(a, b)
        return 0.0

    def arclength_parameter(self, s) -> np.ndarray:
        """Parameter t with arclength s measured from t=0 (s in [0, L])."""
        s = np.asarray(s, dtype=float)
        if self.kind == "circle":
            return s / self.params["R"]
        if self.kind == "ellipse":
            # tabulated inverse; node placement only needs approximate equispacing
            grid = np.linspace(0.0, 2 * np.pi, 16385)
            sp = self.speed(grid)
            cum = np.concatenate([[0.0], np.cumsum(0.5 * (sp[1:] + sp[:-1]) * np.diff(grid))])
            return np.interp(s * cum[-1] / self.length(), cum, grid)
        L = self.length()
        verts = np.asarray(self.params["vertices"], dtype=float)
        seg = np.linalg.norm(np.roll(verts, -1, axis=0) - verts, axis=1)
        cum = np.concatenate([[0.0], np.cumsum(seg)])
        idx = np.clip(np.searchsorted(cum, np.mod(s, L), side="right") - 1, 0, len(seg) - 1)
        frac = (np.mod(s, L) - cum[idx]) / seg[idx]
        return (idx + frac) * 2 * np.pi / len(verts)

    def length(self) -> float:
        if self.kind == "circle":
            return 2 * np.pi * self.params["R"]
        if self.kind == "ellipse":
            return 4.0 * integrate.quad(self.speed, 0.0, np.pi / 2, epsabs=1e-14, epsrel=1e-13,
                                        limit=200)[0]
        verts = np.asarray(self.params["vertices"], dtype=float)
        return float(np.sum(np.linalg.norm(np.roll(verts, -1, axis=0) - verts, axis=1)))

    def enclosed_area(self) -> float:
        if self.kind == "circle":
            return np.pi * self.params["R"] ** 2
        if self.kind == "ellipse":
            return np.pi * self.params["a"] * self.params["b"]
        return signed_area(np.asarray(self.params["vertices"], dtype=float))

    def closest_param(self, p) -> float:
        """Parameter of the nearest curve point to p (circle/ellipse)."""
        p = np.asarray(p, dtype=float)
        if self.kind == "circle":
            return float(np.mod(np.arctan2(p[1], p[0]), 2 * np.pi))
        if self.kind != "ellipse":
            raise GeometryError("closest_param needs a smooth curve")
        a, b = self.params["a"], self.params["b"]
        grid = np.linspace(0, 2 * np.pi, 721)
        t = float(grid[np.argmin(np.sum((self.point(grid) - p) ** 2, axis=1))])
        for _ in range(50):
            # Newton on g(t) = (x(t) - p) . x'(t)
            x, y = a * np.cos(t), b * np.sin(t)
            dx, dy = -a * np.sin(t), b * np.cos(t)
            g = (x - p[0]) * dx + (y - p[1]) * dy
            dg = dx * dx + dy * dy - (x - p[0]) * x - (y - p[1]) * y
            if dg <= 0:
                break
            step = g / dg
            t -= step
            if abs(step) < 1e-15:
                break
        return float(np.mod(t, 2 * np.pi))

    def distance(self, p) -> float:
        """Euclidean distance from p to the curve."""
        p = np.asarray(p, dtype=float)
        if self.kind == "circle":
            return abs(float(np.hypot(*p)) - self.params["R"])
        if self.kind == "polyline":
            verts = np.asarray(self.params["vertices"], dtype=float)
            return float(_dist_to_segments(p[None, :], verts, np.roll(verts, -1, axis=0))[0])
        grid = np.linspace(0, 2 * np.pi, 721)
        coarse = float(np.sqrt(np.min(np.sum((self.point(grid) - p) ** 2, axis=1))))
        return min(coarse, float(np.hypot(*(self.point(self.closest_param(p)) - p))))

    def contains(self, p) -> bool:
        p = np.asarray(p, dtype=float)
        if self.kind == "circle":
            return float(np.hypot(*p)) < self.params["R"]
        if self.kind == "ellipse":
            a, b = self.params["a"], self.params["b"]
            return (p[0] / a) ** 2 + (p[1] / b) ** 2 < 1.0
        return _polygon_contains(np.asarray(self.params["vertices"], dtype=float), p)

    def width(self) -> float:
        if self.kind == "circle":
            return 2 * self.params["R"]
        if self.kind == "ellipse":
            return 2 * min(self.params["a"], self.params["b"])
        return _hull_width_diameter(np.asarray(self.params["vertices"], dtype=float))[0]

    def diameter(self) -> float:
        if self.kind == "circle":
            return 2 * self.params["R"]
        if self.kind == "ellipse":
            return 2 * max(self.params["a"], self.params["b"])
        return _hull_width_diameter(np.asarray(self.params["vertices"], dtype=float))[1]

    def circumradius(self) -> float:
        if self.kind == "circle":
            return self.params["R"]
        if self.kind == "ellipse":
            return max(self.params["a"], self.params["b"])
        return min_enclosing_circle(np.asarray(self.params["vertices"], dtype=float))[1]

    def scaled(self, alpha: float) -> "CurveSpec":
        if self.kind == "circle":
            return CurveSpec("circle", {"R": alpha * self.params["R"]})
        if self.kind == "ellipse":
            return CurveSpec("ellipse", {"a": alpha * self.params["a"], "b": alpha * self.params["b"]})
        verts = alpha * np.asarray(self.params["vertices"], dtype=float)
        return CurveSpec("polyline", {"vertices": verts.tolist()})

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": dict(self.params)}


def curve_invariants(curve: CurveSpec) -> tuple[float, float]:
    """Length L and enclosed area S of a simple closed curve."""
    return float(curve.length()), float(curve.enclosed_area())


@dataclass(frozen=True)
class GeometricSummary:
    area: float
    perimeter: float
    circumradius: float
    inradius: float
    width: float
    diameter: float
    rolling_radius: Optional[float]
    simply_connected: bool
    inradius_uncertainty: float = 0.0


@dataclass(frozen=True, eq=False)
class DomainSpec:
    """Planar domain.

    params per kind: disk{R}, rectangle{w,h}, annulus{r_in,r_out}, ellipse{a,b},
    polygon{vertices}, tube{curve: CurveSpec, h}.
    flags: is_simply_connected, is_subgraph, strip_height, self_tiling_Lambda.
    """

    kind: str
    params: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)

    def __post_init__(self):
        k, p = self.kind, self.params
        if k not in DOMAIN_KINDS:
            raise GeometryError(f"unknown domain kind {k!r}")
        if k == "disk":
            _positive(p, "R")
        elif k == "rectangle":
            _positive(p, "w", "h")
        elif k == "annulus":
            _positive(p, "r_in", "r_out")
            if not p["r_in"] < p["r_out"]:
                raise GeometryError("annulus requires r_in < r_out")
        elif k == "ellipse":
            _positive(p, "a", "b")
        elif k == "polygon":
            verts = np.asarray(p.get("vertices", []), dtype=float)
            if verts.ndim != 2 or verts.shape[1] != 2:
                raise GeometryError("polygon vertices must be an (m, 2) array")
            _check_simple_polygon(verts)
        else:
            curve = p.get("curve")
            if not isinstance(curve, CurveSpec):
                raise GeometryError("tube requires a CurveSpec 'curve'")
            _positive(p, "h")
            if curve.kind == "polyline":
                raise CurvatureError("tube over a polyline: curvature radius vanishes at vertices")
            rc = curve.min_curvature_radius()
            if not p["h"] < rc:
                raise CurvatureError(
                    f"tube half-width h={p['h']} must be below minimal curvature radius {rc}")
        lam = self.flags.get("self_tiling_Lambda")
        if lam is not None and not lam > 0:
            raise GeometryError("self_tiling_Lambda must be > 0")

    @property
    def simply_connected(self) -> bool:
        return self.kind not in ("annulus", "tube")

    @property
    def is_subgraph(self) -> bool:
        if self.kind == "rectangle":
            return True
        return bool(self.flags.get("is_subgraph", False))

    @property
    def strip_height(self) -> Optional[float]:
        """Height H such that Omega lies in a strip (a,b)x(0,inf) and contains (a,b)x(0,H)."""
        if self.kind == "rectangle":
            return float(max(self.params["w"], self.params["h"]))
        return self.flags.get("strip_height")

    def to_dict(self) -> dict:
        params = dict(self.params)
        if self.kind == "tube":
            params["curve"] = self.params["curve"].to_dict()
        if self.kind == "polygon":
            params["vertices"] = np.asarray(params["vertices"], dtype=float).tolist()
        return {"kind": self.kind, "params": params, "flags": dict(self.flags)}

    @classmethod
    def from_dict(cls, d: dict) -> "DomainSpec":
        if not isinstance(d, dict) or "kind" not in d:
            raise GeometryError("domain JSON needs a 'kind' key")
        params = dict(d.get("params", {}))
        if d["kind"] == "tube":
            c = params.get("curve")
            if not isinstance(c, dict):
                raise GeometryError("tube params need a 'curve' object")
            params["curve"] = CurveSpec(c.get("kind", ""), dict(c.get("params", {})))
        return cls(d["kind"], params, dict(d.get("flags", {})))

    def label(self) -> str:
        if self.kind == "tube":
            c = self.params["curve"]
            inner = ",".join(f"{k}={v:g}" for k, v in sorted(c.params.items()))
            return f"tube[{c.kind}:{inner}]:h={self.params['h']:g}"
        if self.kind == "polygon":
            return f"polygon[{len(self.params['vertices'])}]"
        return f"{self.kind}:" + ",".join(f"{k}={v:g}" for k, v in sorted(self.params.items()))


def disk(R: float) -> DomainSpec:
    return DomainSpec("disk", {"R": R})


def rectangle(w: float, h: float) -> DomainSpec:
    return DomainSpec("rectangle", {"w": w, "h": h})


def annulus(r_in: float, r_out: float) -> DomainSpec:
    return DomainSpec("annulus", {"r_in": r_in, "r_out": r_out})


def ellipse(a: float, b: float) -> DomainSpec:
    return DomainSpec("ellipse", {"a": a, "b": b})


def polygon(vertices, **flags) -> DomainSpec:
    return DomainSpec("polygon", {"vertices": np.asarray(vertices, dtype=float).tolist()}, flags)


def tube_domain(curve: CurveSpec, h: float) -> DomainSpec:
    """One-sided inner tube {x inside the curve : dist(x, curve) < h}."""
    return DomainSpec("tube", {"curve": curve, "h": h})


def scale(spec: DomainSpec, alpha: float) -> DomainSpec:
    if not alpha > 0:
        raise GeometryError("scale factor must be > 0")
    p = spec.params
    flags = dict(spec.flags)
    if flags.get("strip_height") is not None:
        flags["strip_height"] = alpha * flags["strip_height"]
    if spec.kind == "polygon":
        new = {"vertices": (alpha * np.asarray(p["vertices"], dtype=float)).tolist()}
    elif spec.kind == "tube":
        new = {"curve": p["curve"].scaled(alpha), "h": alpha * p["h"]}
    else:
        new = {k: alpha * v for k, v in p.items()}
    return DomainSpec(spec.kind, new, flags)


# --- polygon helpers ---------------------------------------------------------

def _dist_to_segments(pts: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Min distance from each point to the segments [a_i, b_i]."""
    d = b - a
    dd = np.maximum(np.sum(d * d, axis=1), 1e-300)
    rel = pts[:, None, :] - a[None, :, :]
    t = np.clip(np.sum(rel * d[None], axis=2) / dd[None], 0.0, 1.0)
    proj = a[None] + t[..., None] * d[None]
    return np.sqrt(np.min(np.sum((pts[:, None, :] - proj) ** 2, axis=2), axis=1))


def _polygon_contains_many(vertices: np.ndarray, pts: np.ndarray) -> np.ndarray:
    x, y = pts[:, 0], pts[:, 1]
    inside = np.zeros(len(pts), dtype=bool)
    n = len(vertices)
    for i in range(n):
        x1, y1 = vertices[i]
        x2, y2 = vertices[(i + 1) % n]
        crosses = (y1 > y) != (y2 > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            xint = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
        inside ^= crosses & (x < xint)
    on_edge = _dist_to_segments(pts, vertices, np.roll(vertices, -1, axis=0)) <= 1e-14
    return inside & ~on_edge


def _polygon_contains(vertices: np.ndarray, p: np.ndarray) -> bool:
    return bool(_polygon_contains_many(vertices, p[None, :])[0])


def _hull_width_diameter(vertices: np.ndarray) -> tuple[float, float]:
    """Width and diameter of the convex hull by a caliper scan over hull edges."""
    hull = vertices[ConvexHull(vertices).vertices]
    diam = float(np.max(np.linalg.norm(hull[:, None] - hull[None], axis=2)))
    width = np.inf
    m = len(hull)
    for i in range(m):
        e = hull[(i + 1) % m] - hull[i]
        nrm = np.array([e[1], -e[0]]) / np.hypot(*e)
        width = min(width, float(np.max(np.abs((hull - hull[i]) @ nrm))))
    return width, diam


def _circle_two(a, b):
    c = 0.5 * (a + b)
    return c, float(np.hypot(*(a - c)))


def _circle_three(a, b, c):
    ax, ay = a
    bx, by = b
    cx, cy = c
    d = 2 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    if abs(d) < 1e-300:
        # collinear: the farthest pair spans the circle
        pairs = [(a, b), (a, c), (b, c)]
        return max((_circle_two(p, q) for p, q in pairs), key=lambda t: t[1])
    ux = ((ax ** 2 + ay ** 2) * (by - cy) + (bx ** 2 + by ** 2) * (cy - ay) + (cx ** 2 + cy ** 2) * (ay - by)) / d
    uy = ((ax ** 2 + ay ** 2) * (cx - bx) + (bx ** 2 + by ** 2) * (ax - cx) + (cx ** 2 + cy ** 2) * (bx - ax)) / d
    center = np.array([ux, uy])
    return center, float(np.hypot(*(a - center)))


def min_enclosing_circle(points: np.ndarray) -> tuple[np.ndarray, float]:
    """Smallest enclosing circle (Welzl, iterative form, deterministic order)."""
    pts = np.asarray(points, dtype=float)
    pts = pts[np.random.default_rng(0).permutation(len(pts))]
    eps = 1e-12

    def inside(c, r, p):
        return np.hypot(*(p - c)) <= r * (1 + eps) + eps

    c, r = pts[0].copy(), 0.0
    for i in range(1, len(pts)):
        if inside(c, r, pts[i]):
            continue
        c, r = pts[i].copy(), 0.0
        for j in range(i):
            if inside(c, r, pts[j]):
                continue
            c, r = _circle_two(pts[i], pts[j])
            for k in range(j):
                if not inside(c, r, pts[k]):
                    c, r = _circle_three(pts[i], pts[j], pts[k])
    return c, r


def polygon_inradius(vertices: np.ndarray, N: int = 512) -> tuple[float, float]:
    """Sampled inradius and its one-cell-diagonal uncertainty."""
    verts = np.asarray(vertices, dtype=float)
    lo, hi = verts.min(axis=0), verts.max(axis=0)
    xs = np.linspace(lo[0], hi[0], N)
    ys = np.linspace(lo[1], hi[1], N)
    X, Y = np.meshgrid(xs, ys)
    pts = np.column_stack([X.ravel(), Y.ravel()])
    a, b = verts, np.roll(verts, -1, axis=0)
    best = 0.0
    for chunk in np.array_split(pts, max(1, len(pts) // 16384)):
        ins = _polygon_contains_many(verts, chunk)
        if ins.any():
            best = max(best, float(_dist_to_segments(chunk[ins], a, b).max()))
    cell = float(np.hypot(xs[1] - xs[0], ys[1] - ys[0]))
    return best, cell


# --- summary / containment -----------------------------------------------------

def summarize(spec: DomainSpec, N: int = 512) -> GeometricSummary:
    k, p = spec.kind, spec.params
    if k == "disk":
        R = p["R"]
        return GeometricSummary(np.pi * R * R, 2 * np.pi * R, R, R, 2 * R, 2 * R, R, True)
    if k == "rectangle":
        w, h = p["w"], p["h"]
        diag = math.hypot(w, h)
        return GeometricSummary(w * h, 2 * (w + h), diag / 2, min(w, h) / 2, min(w, h), diag,
                                0.0, True)
    if k == "annulus":
        r1, r2 = p["r_in"], p["r_out"]
        return GeometricSummary(np.pi * (r2 * r2 - r1 * r1), 2 * np.pi * (r1 + r2), r2,
                                (r2 - r1) / 2, 2 * r2, 2 * r2, (r2 - r1) / 2, False)
    if k == "ellipse":
        c = CurveSpec("ellipse", {"a": p["a"], "b": p["b"]})
        lo, hi = min(p["a"], p["b"]), max(p["a"], p["b"])
        return GeometricSummary(np.pi * p["a"] * p["b"], c.length(), hi, lo, 2 * lo, 2 * hi,
                                lo * lo / hi, True)
    if k == "polygon":
        verts = np.asarray(p["vertices"], dtype=float)
        seg = np.linalg.norm(np.roll(verts, -1, axis=0) - verts, axis=1)
        width, diam = _hull_width_diameter(verts)
        rho, unc = polygon_inradius(verts, N)
        return GeometricSummary(signed_area(verts), float(seg.sum()),
                                min_enclosing_circle(verts)[1], rho, width, diam, 0.0, True, unc)
    curve, h = p["curve"], p["h"]
    L = curve.length()
    return GeometricSummary(L * h - np.pi * h * h, 2 * L - 2 * np.pi * h, curve.circumradius(),
                            h / 2, curve.width(), curve.diameter(), h / 2, False)


def contains(spec: DomainSpec, point) -> bool:
    """Strict interior membership; boundary points are outside."""
    x, y = (float(v) for v in point)
    k, p = spec.kind, spec.params
    if k == "disk":
        return math.hypot(x, y) < p["R"]
    if k == "rectangle":
        return abs(x) < p["w"] / 2 and abs(y) < p["h"] / 2
    if k == "annulus":
        r = math.hypot(x, y)
        return p["r_in"] < r < p["r_out"]
    if k == "ellipse":
        return (x / p["a"]) ** 2 + (y / p["b"]) ** 2 < 1.0
    if k == "polygon":
        return _polygon_contains(np.asarray(p["vertices"], dtype=float), np.array([x, y]))
    curve = p["curve"]
    pt = np.array([x, y])
    return curve.contains(pt) and curve.distance(pt) < p["h"]


def boundary_distance(spec: DomainSpec, pts: np.ndarray) -> np.ndarray:
    """Distance to the boundary for interior points (no sign handling outside)."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    k, p = spec.kind, spec.params
    r = np.hypot(pts[:, 0], pts[:, 1])
    if k == "disk":
        return p["R"] - r
    if k == "annulus":
        return np.minimum(p["r_out"] - r, r - p["r_in"])
    if k == "rectangle":
        return np.minimum(p["w"] / 2 - np.abs(pts[:, 0]), p["h"] / 2 - np.abs(pts[:, 1]))
    if k == "polygon":
        verts = np.asarray(p["vertices"], dtype=float)
        return _dist_to_segments(pts, verts, np.roll(verts, -1, axis=0))
    if k == "ellipse":
        c = CurveSpec("ellipse", {"a": p["a"], "b": p["b"]})
        return np.array([c.distance(q) for q in pts])
    curve = p["curve"]
    d = np.array([curve.distance(q) for q in pts])
    return np.minimum(d, p["h"] - d)
