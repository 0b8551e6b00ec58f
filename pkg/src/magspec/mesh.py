"""Deterministic triangulations of DomainSpec instances.

Disk/annulus/ellipse use ring "zipper" meshes, rectangles and tubes use
structured grids with one diagonal per cell, polygons use a Delaunay mesh of
boundary samples plus an interior triangular lattice.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
from scipy.spatial import Delaunay

from .geometry import (CurveSpec, DomainSpec, _polygon_contains_many, boundary_distance,
                       contains)

MIN_ANGLE_DEG = 20.0
# lattice meshes have edges up to ~1.5 spacing; shrink so h_max <= 1.5 h_target
LATTICE_SHRINK = 1.15
TUBE_SHRINK = 1.25
CURVED_KINDS = ("disk", "annulus", "ellipse", "tube")


class MeshError(ValueError):
    """Mesh cannot be generated or is invalid."""


class ResolutionError(MeshError):
    """h_target too coarse to resolve the domain."""


@dataclass(frozen=True, eq=False)
class TriangleMesh:
    nodes: np.ndarray            # (nv, 2)
    triangles: np.ndarray        # (nt, 3) counterclockwise
    boundary_edges: np.ndarray   # (nb, 2), oriented with the domain on the left
    boundary_loop: np.ndarray    # (nb,) loop id, 0 = outer loop
    h_max: float
    spec: Optional[DomainSpec] = None
    # curve parameter of boundary nodes (nan elsewhere); used to project refined midpoints
    node_param: Optional[np.ndarray] = None

    @property
    def n_loops(self) -> int:
        return int(self.boundary_loop.max()) + 1 if len(self.boundary_loop) else 0

    @property
    def boundary_nodes(self) -> np.ndarray:
        return np.unique(self.boundary_edges)

    def areas(self) -> np.ndarray:
        return signed_areas(self.nodes, self.triangles)

    def edges(self) -> np.ndarray:
        return unique_edges(self.triangles)


def signed_areas(nodes: np.ndarray, tris: np.ndarray) -> np.ndarray:
    p0, p1, p2 = nodes[tris[:, 0]], nodes[tris[:, 1]], nodes[tris[:, 2]]
    return 0.5 * ((p1[:, 0] - p0[:, 0]) * (p2[:, 1] - p0[:, 1])
                  - (p1[:, 1] - p0[:, 1]) * (p2[:, 0] - p0[:, 0]))


def unique_edges(tris: np.ndarray) -> np.ndarray:
    e = np.concatenate([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]])
    return np.unique(np.sort(e, axis=1), axis=0)


def _edge_length_max(nodes, tris) -> float:
    e = unique_edges(tris)
    return float(np.max(np.linalg.norm(nodes[e[:, 0]] - nodes[e[:, 1]], axis=1)))


def _boundary_loops(nodes: np.ndarray, tris: np.ndarray):
    """Boundary edges (domain on the left) grouped into closed loops, outer loop first."""
    directed = np.concatenate([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]])
    key = np.sort(directed, axis=1)
    _, inv, counts = np.unique(key, axis=0, return_inverse=True, return_counts=True)
    inv = inv.ravel()
    if np.any(counts > 2):
        raise MeshError("edge shared by more than two triangles")
    bd = directed[counts[inv] == 1]
    nxt = {}
    for a, b in bd:
        if a in nxt:
            raise MeshError(f"boundary node {a} is pinched")
        nxt[int(a)] = int(b)
    loops = []
    seen = set()
    for start in sorted(nxt):
        if start in seen:
            continue
        loop = []
        cur = start
        while cur not in seen:
            seen.add(cur)
            loop.append((cur, nxt[cur]))
            cur = nxt[cur]
            if cur not in nxt:
                raise MeshError("boundary edges do not close")
        if cur != start:
            raise MeshError("boundary edges do not form simple loops")
        loops.append(np.array(loop, dtype=np.int64))

    def loop_area(lp):
        p = nodes[lp[:, 0]]
        q = nodes[lp[:, 1]]
        return 0.5 * np.sum(p[:, 0] * q[:, 1] - q[:, 0] * p[:, 1])

    loops.sort(key=lambda lp: -abs(loop_area(lp)))
    edges = np.concatenate(loops) if loops else np.zeros((0, 2), dtype=np.int64)
    ids = np.concatenate([np.full(len(lp), i) for i, lp in enumerate(loops)]) if loops else \
        np.zeros(0, dtype=np.int64)
    return edges, ids.astype(np.int64)


def _orient(nodes: np.ndarray, tris: np.ndarray) -> np.ndarray:
    tris = np.asarray(tris, dtype=np.int64).copy()
    neg = signed_areas(nodes, tris) < 0
    tris[neg] = tris[neg][:, [0, 2, 1]]
    return tris


def _finish(nodes, tris, spec, node_param) -> TriangleMesh:
    nodes = np.ascontiguousarray(nodes, dtype=float)
    tris = _orient(nodes, tris)
    edges, loop = _boundary_loops(nodes, tris)
    return TriangleMesh(nodes, tris, edges, loop, _edge_length_max(nodes, tris), spec, node_param)


# --- ring zipper ----------------------------------------------------------------

def _zip(inner_idx, inner_t, outer_idx, outer_t) -> list:
    """Triangulate the band between two closed rings sorted by angle."""
    tris = []
    if len(inner_idx) == 1:
        c = inner_idx[0]
        no = len(outer_idx)
        for j in range(no):
            tris.append((c, outer_idx[j], outer_idx[(j + 1) % no]))
        return tris
    ni, no = len(inner_idx), len(outer_idx)
    ti = np.append(inner_t, inner_t[0] + 2 * np.pi)
    to = np.append(outer_t, outer_t[0] + 2 * np.pi)
    i = j = 0
    while i < ni or j < no:
        if j < no and (i == ni or to[j + 1] <= ti[i + 1]):
            tris.append((inner_idx[i % ni], outer_idx[j % no], outer_idx[(j + 1) % no]))
            j += 1
        else:
            tris.append((inner_idx[i % ni], outer_idx[j % no], inner_idx[(i + 1) % ni]))
            i += 1
    return tris


def _ring_mesh(rings):
    """rings: list of (points (m,2), params (m,)) from inside out; returns nodes, tris, params."""
    nodes, params, tris, idx = [], [], [], []
    off = 0
    for pts, t in rings:
        nodes.append(pts)
        params.append(t)
        idx.append(np.arange(off, off + len(pts)))
        off += len(pts)
    for k in range(len(rings) - 1):
        tris.extend(_zip(idx[k], rings[k][1], idx[k + 1], rings[k + 1][1]))
    return np.vstack(nodes), np.array(tris, dtype=np.int64), np.concatenate(params), idx


def _mesh_disk(spec, h):
    R = spec.params["R"]
    # ring diagonals are ~1.73 ring spacings long
    nr = max(1, math.ceil(1.2 * R / h))
    rings = [(np.zeros((1, 2)), np.array([0.0]))]
    for i in range(1, nr + 1):
        m = 6 * i
        t = 2 * np.pi * np.arange(m) / m
        r = R * i / nr
        pts = np.column_stack([r * np.cos(t), r * np.sin(t)])
        if i == nr:
            pts = R * np.column_stack([np.cos(t), np.sin(t)])
        rings.append((pts, t))
    nodes, tris, params, idx = _ring_mesh(rings)
    node_param = np.full(len(nodes), np.nan)
    node_param[idx[-1]] = params[idx[-1]]
    return nodes, tris, node_param


def _mesh_annulus(spec, h):
    r1, r2 = spec.params["r_in"], spec.params["r_out"]
    nr = max(1, math.ceil((r2 - r1) / h))
    rings = []
    for i in range(nr + 1):
        r = r1 + (r2 - r1) * i / nr
        if i == nr:
            r = r2
        m = max(6, math.ceil(2 * np.pi * r / h))
        t = 2 * np.pi * np.arange(m) / m
        rings.append((np.column_stack([r * np.cos(t), r * np.sin(t)]), t))
    nodes, tris, params, idx = _ring_mesh(rings)
    node_param = np.full(len(nodes), np.nan)
    for k in (0, nr):
        node_param[idx[k]] = params[idx[k]]
    return nodes, tris, node_param


def _lattice(spec: DomainSpec, lo, hi, h) -> np.ndarray:
    """Triangular lattice points at least h/2 inside the domain."""
    dy = h * np.sqrt(3) / 2
    ys = np.arange(lo[1], hi[1] + dy, dy)
    ys = ys - 0.5 * (ys[0] + ys[-1]) + 0.5 * (lo[1] + hi[1])
    xs0 = np.arange(lo[0] - h, hi[0] + h, h)
    xs0 = xs0 - 0.5 * (xs0[0] + xs0[-1]) + 0.5 * (lo[0] + hi[0])
    rows = [np.column_stack([xs0 + (0.5 * h if k % 2 else 0.0), np.full(len(xs0), y)])
            for k, y in enumerate(ys)]
    lat = np.vstack(rows)
    lat = lat[np.array([contains(spec, q) for q in lat], dtype=bool)]
    return lat[boundary_distance(spec, lat) >= 0.5 * h]


def _mesh_ellipse(spec, h):
    a, b = spec.params["a"], spec.params["b"]
    h = h / LATTICE_SHRINK
    curve = CurveSpec("ellipse", {"a": a, "b": b})
    L = curve.length()
    ns = max(6, math.ceil(L / h))
    t = np.mod(curve.arclength_parameter(L * np.arange(ns) / ns), 2 * np.pi)
    bp = curve.point(t)
    lat = _lattice(spec, (-a, -b), (a, b), h)
    pts = np.vstack([bp, lat])
    tri = Delaunay(pts).simplices
    # convex domain: all hull edges are boundary edges, no filtering needed
    node_param = np.full(len(pts), np.nan)
    node_param[:ns] = t
    return pts, tri, node_param


def _grid_tris(nx, ny, periodic_x=False):
    """Cells of an (nx+1 or nx) x (ny+1) lattice split along alternating diagonals."""
    cols = nx if periodic_x else nx + 1

    def v(i, j):
        return (i % cols if periodic_x else i) + j * cols

    tris = []
    for j in range(ny):
        for i in range(nx):
            a, b, c, d = v(i, j), v(i + 1, j), v(i + 1, j + 1), v(i, j + 1)
            tris.append((a, b, c))
            tris.append((a, c, d))
    return np.array(tris, dtype=np.int64)


def _mesh_rectangle(spec, h):
    w, hh = spec.params["w"], spec.params["h"]
    nx, ny = max(1, math.ceil(w / h)), max(1, math.ceil(hh / h))
    xs = -w / 2 + w * np.arange(nx + 1) / nx
    ys = -hh / 2 + hh * np.arange(ny + 1) / ny
    xs[-1], ys[-1] = w / 2, hh / 2
    X, Y = np.meshgrid(xs, ys)
    nodes = np.column_stack([X.ravel(), Y.ravel()])
    return nodes, _grid_tris(nx, ny), np.full(len(nodes), np.nan)


def _tube_point(curve, t, depth):
    return curve.point(t) - depth[..., None] * curve.outward_normal(t)


def _parallel_params(curve, depth: float, m: int) -> np.ndarray:
    """m parameters equispaced in arclength along the inner parallel curve at `depth`."""
    grid = np.linspace(0.0, 2 * np.pi, 16385)
    p = _tube_point(curve, grid, np.full(grid.shape, depth))
    cum = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(p, axis=0), axis=1))])
    return np.interp(cum[-1] * np.arange(m) / m, cum, grid)


def _mesh_tube(spec, h):
    curve, th = spec.params["curve"], spec.params["h"]
    if h > th:
        raise ResolutionError(f"h_target={h} exceeds tube half-width {th}")
    L = curve.length()
    h = h / TUBE_SHRINK
    nt = max(1, math.ceil(th / h))
    rings = []
    for k in range(nt + 1):
        d = th * k / nt
        # parallel curve length is L - 2 pi d for a convex curve
        m = max(6, math.ceil((L - 2 * np.pi * d) / h))
        t = _parallel_params(curve, d, m)
        rings.append((_tube_point(curve, t, np.full(m, d)), t))
    # zipper runs inside-out: deepest ring first
    nodes, tris, params, idx = _ring_mesh(rings[::-1])
    node_param = np.full(len(nodes), np.nan)
    node_param[idx[0]] = params[idx[0]]
    node_param[idx[-1]] = params[idx[-1]]
    return nodes, tris, node_param


def _mesh_polygon(spec, h, max_rounds=12):
    h = h / LATTICE_SHRINK
    verts = np.asarray(spec.params["vertices"], dtype=float)
    nv = len(verts)
    bpts = []
    for i in range(nv):
        a, b = verts[i], verts[(i + 1) % nv]
        m = max(1, math.ceil(np.hypot(*(b - a)) / h))
        s = np.arange(m) / m
        bpts.append(a[None] + s[:, None] * (b - a)[None])
    bpts = np.vstack(bpts)
    lat = _lattice(spec, verts.min(axis=0), verts.max(axis=0), h)
    for _ in range(max_rounds):
        nb = len(bpts)
        pts = np.vstack([bpts, lat])
        tri = Delaunay(pts).simplices
        cent = pts[tri].mean(axis=1)
        tri = tri[_polygon_contains_many(verts, cent)]
        have = set(map(tuple, np.sort(np.concatenate([tri[:, [0, 1]], tri[:, [1, 2]], tri[:, [2, 0]]]),
                                      axis=1).tolist()))
        missing = [i for i in range(nb) if tuple(sorted((i, (i + 1) % nb))) not in have]
        if not missing:
            return pts, tri, np.full(len(pts), np.nan)
        new = []
        for i in range(nb):
            new.append(bpts[i])
            if i in missing:
                new.append(0.5 * (bpts[i] + bpts[(i + 1) % nb]))
        bpts = np.array(new)
    raise MeshError("polygon boundary could not be recovered")


_GENERATORS = {
    "disk": _mesh_disk,
    "annulus": _mesh_annulus,
    "ellipse": _mesh_ellipse,
    "rectangle": _mesh_rectangle,
    "tube": _mesh_tube,
    "polygon": _mesh_polygon,
}


class Quality(NamedTuple):
    min_angle: float
    h_max: float

    @property
    def acceptable(self) -> bool:
        return self.min_angle >= MIN_ANGLE_DEG


def quality(mesh: TriangleMesh) -> Quality:
    """Minimum interior angle (degrees) and longest edge."""
    p = mesh.nodes[mesh.triangles]
    ang = []
    for k in range(3):
        u = p[:, (k + 1) % 3] - p[:, k]
        v = p[:, (k + 2) % 3] - p[:, k]
        nu, nv = np.linalg.norm(u, axis=1), np.linalg.norm(v, axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            c = np.sum(u * v, axis=1) / (nu * nv)
        a = np.degrees(np.arccos(np.clip(np.nan_to_num(c, nan=1.0), -1.0, 1.0)))
        ang.append(a)
    return Quality(float(np.min(ang)), _edge_length_max(mesh.nodes, mesh.triangles))


def generate(spec: DomainSpec, h_target: float) -> TriangleMesh:
    if not (np.isfinite(h_target) and h_target > 0):
        raise MeshError("h_target must be > 0")
    nodes, tris, node_param = _GENERATORS[spec.kind](spec, h_target)
    mesh = _finish(nodes, tris, spec, node_param)
    validate(mesh)
    q = quality(mesh)
    if not q.acceptable:
        raise MeshError(f"generated mesh min angle {q.min_angle:.2f} deg below {MIN_ANGLE_DEG}")
    return mesh


def validate(mesh: TriangleMesh) -> None:
    nv = len(mesh.nodes)
    t = mesh.triangles
    if t.size and (t.min() < 0 or t.max() >= nv):
        raise MeshError("triangle node index out of range")
    if np.any(mesh.areas() <= 0):
        raise MeshError("triangle with non-positive signed area")
    _boundary_loops(mesh.nodes, t)


def euler_characteristic(mesh: TriangleMesh) -> int:
    return len(mesh.nodes) - len(mesh.edges()) + len(mesh.triangles)


def _project(spec: DomainSpec, loop: int, p: np.ndarray) -> tuple[np.ndarray, float]:
    """Closest point on boundary loop `loop` and its curve parameter."""
    k, prm = spec.kind, spec.params
    if k in ("disk", "annulus"):
        t = float(np.mod(np.arctan2(p[1], p[0]), 2 * np.pi))
        r = prm.get("R") or (prm["r_out"] if loop == 0 else prm["r_in"])
        return r * np.array([np.cos(t), np.sin(t)]), t
    if k == "ellipse":
        c = CurveSpec("ellipse", {"a": prm["a"], "b": prm["b"]})
        t = c.closest_param(p)
        return c.point(t), t
    if k == "tube":
        # parallel curves share normals, so the base-curve foot point is the foot point
        c = prm["curve"]
        t = c.closest_param(p)
        depth = 0.0 if loop == 0 else prm["h"]
        return _tube_point(c, np.array(t), np.array(depth)), t
    return p, np.nan


def refine(mesh: TriangleMesh) -> TriangleMesh:
    """Uniform 4-way split; new boundary nodes are projected onto the analytic boundary."""
    tris = mesh.triangles
    nv = len(mesh.nodes)
    e_all = np.concatenate([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]])
    edges, inv = np.unique(np.sort(e_all, axis=1), axis=0, return_inverse=True)
    inv = inv.ravel()
    nt = len(tris)
    m01, m12, m20 = nv + inv[:nt], nv + inv[nt:2 * nt], nv + inv[2 * nt:]
    mids = 0.5 * (mesh.nodes[edges[:, 0]] + mesh.nodes[edges[:, 1]])
    nodes = np.vstack([mesh.nodes, mids])
    node_param = None
    if mesh.node_param is not None:
        node_param = np.concatenate([mesh.node_param, np.full(len(edges), np.nan)])
    if mesh.spec is not None and mesh.spec.kind in CURVED_KINDS and mesh.node_param is not None:
        bkey = {tuple(sorted(e)): lp for e, lp in zip(mesh.boundary_edges.tolist(),
                                                      mesh.boundary_loop.tolist())}
        for idx, (a, b) in enumerate(edges.tolist()):
            lp = bkey.get((a, b))
            if lp is None:
                continue
            nodes[nv + idx], node_param[nv + idx] = _project(mesh.spec, lp, nodes[nv + idx])
    new = np.concatenate([
        np.column_stack([tris[:, 0], m01, m20]),
        np.column_stack([tris[:, 1], m12, m01]),
        np.column_stack([tris[:, 2], m20, m12]),
        np.column_stack([m01, m12, m20]),
    ])
    # interleave so children of triangle i are contiguous
    new = new.reshape(4, nt, 3).transpose(1, 0, 2).reshape(-1, 3)
    out = _finish(nodes, new, mesh.spec, node_param)
    return out


def write_mesh(mesh: TriangleMesh, path) -> None:
    lines = [f"{len(mesh.nodes)} {len(mesh.triangles)} {len(mesh.boundary_edges)}"]
    lines += [f"{x!r} {y!r}" for x, y in mesh.nodes.tolist()]
    lines += [f"{i} {j} {k}" for i, j, k in mesh.triangles.tolist()]
    lines += [f"{i} {j} {l}" for (i, j), l in zip(mesh.boundary_edges.tolist(),
                                                  mesh.boundary_loop.tolist())]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_mesh(path) -> TriangleMesh:
    with open(path) as fh:
        rows = fh.read().split("\n")
    try:
        nv, nt, nb = (int(v) for v in rows[0].split())
        nodes = np.array([[float(v) for v in r.split()] for r in rows[1:1 + nv]]).reshape(nv, 2)
        tris = np.array([[int(v) for v in r.split()] for r in rows[1 + nv:1 + nv + nt]],
                        dtype=np.int64).reshape(nt, 3)
        bd = np.array([[int(v) for v in r.split()] for r in rows[1 + nv + nt:1 + nv + nt + nb]],
                      dtype=np.int64).reshape(nb, 3)
    except (ValueError, IndexError) as exc:
        raise MeshError(f"malformed mesh file {path}: {exc}") from exc
    mesh = TriangleMesh(nodes, tris, bd[:, :2].copy(), bd[:, 2].copy(),
                        _edge_length_max(nodes, tris) if nt else 0.0)
    validate(mesh)
    return mesh
