"""P1 finite elements for the magnetic form int |grad u - i u A|^2.

Conventions: K[i, j] = a(phi_j, phi_i) so that v^* K v = a(u, u) for
u = sum_j v_j phi_j.  Stiffness and mass are exact for P1; A-dependent terms
use the 3-point edge-midpoint rule (exact for quadratics).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve
from scipy.spatial import cKDTree

from .mesh import TriangleMesh

# basis values at midpoints m01, m12, m20 (rows) for local nodes 0, 1, 2 (cols)
_PHI_MID = np.array([[0.5, 0.5, 0.0],
                     [0.0, 0.5, 0.5],
                     [0.5, 0.0, 0.5]])


class SolverError(RuntimeError):
    """Linear or eigen solve failed."""


@dataclass(frozen=True, eq=False)
class PotentialField:
    """Vector potential A(x).  `per_triangle` holds P0 values when tag == 'from_torsion'."""

    evaluator: Callable[[np.ndarray], np.ndarray]
    tag: str
    beta: Optional[float] = None
    mesh: Optional[TriangleMesh] = None
    per_triangle: Optional[np.ndarray] = None

    def __call__(self, x) -> np.ndarray:
        return self.evaluator(np.asarray(x, dtype=float))

    def __neg__(self) -> "PotentialField":
        pt = None if self.per_triangle is None else -self.per_triangle
        beta = None if self.beta is None else -self.beta
        return PotentialField(lambda x: -self.evaluator(x), self.tag, beta, self.mesh, pt)


def standard_potential(beta: float) -> PotentialField:
    """A(x) = (beta/2) (-x2, x1)."""
    beta = float(beta)

    def ev(x):
        x = np.asarray(x, dtype=float)
        return 0.5 * beta * np.stack([-x[..., 1], x[..., 0]], axis=-1)

    return PotentialField(ev, "standard", beta)


def custom_potential(fn: Callable[[np.ndarray], np.ndarray]) -> PotentialField:
    return PotentialField(fn, "custom")


@dataclass(frozen=True, eq=False)
class HermitianSystem:
    K: sp.csr_matrix
    M: sp.csr_matrix
    n: int
    boundary_dofs: np.ndarray
    dof_nodes: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    h: Optional[float] = None

    def shifted(self, sigma: float) -> "HermitianSystem":
        return HermitianSystem((self.K + sigma * self.M).tocsr(), self.M, self.n,
                               self.boundary_dofs, self.dof_nodes, self.h)


def _geometry(mesh: TriangleMesh):
    p = mesh.nodes[mesh.triangles]                      # (nt, 3, 2)
    e1 = p[:, 1] - p[:, 0]
    e2 = p[:, 2] - p[:, 0]
    det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    area = 0.5 * det
    # gradients of barycentric coordinates: grad l_i = rot90(opposite edge) / (2 area)
    opp = np.stack([p[:, 2] - p[:, 1], p[:, 0] - p[:, 2], p[:, 1] - p[:, 0]], axis=1)
    grads = np.stack([-opp[..., 1], opp[..., 0]], axis=-1) / det[:, None, None]
    return p, area, grads


def _midpoints(p: np.ndarray) -> np.ndarray:
    return np.einsum("qi,tid->tqd", _PHI_MID, p)


def _potential_at_midpoints(mesh: TriangleMesh, A: PotentialField, p) -> np.ndarray:
    if A.per_triangle is not None and A.mesh is mesh:
        return np.repeat(A.per_triangle[:, None, :], 3, axis=1)
    mids = _midpoints(p)
    return A(mids.reshape(-1, 2)).reshape(mids.shape)


def _scatter(mesh: TriangleMesh, local: np.ndarray, n: int) -> sp.csr_matrix:
    t = mesh.triangles
    rows = np.repeat(t, 3, axis=1).ravel()
    cols = np.tile(t, (1, 3)).ravel()
    return sp.coo_matrix((local.reshape(len(t), 9).ravel(), (rows, cols)), shape=(n, n)).tocsr()


def local_matrices(mesh: TriangleMesh, A: Optional[PotentialField]):
    """Element stiffness S, magnetic part (complex) and mass, each (nt, 3, 3)."""
    p, area, grads = _geometry(mesh)
    S = area[:, None, None] * np.einsum("tid,tjd->tij", grads, grads)
    Mloc = area[:, None, None] * (np.ones((3, 3)) + np.eye(3))[None] / 12.0
    if A is None:
        return S, np.zeros_like(S, dtype=complex), Mloc
    Aq = _potential_at_midpoints(mesh, A, p)            # (nt, 3q, 2)
    w = area / 3.0
    # C_ij = sum_q w phi_qi (A_q . grad phi_j)
    adotg = np.einsum("tqd,tjd->tqj", Aq, grads)
    C = w[:, None, None] * np.einsum("qi,tqj->tij", _PHI_MID, adotg)
    a2 = np.sum(Aq * Aq, axis=2)                         # (nt, q)
    Q = w[:, None, None] * np.einsum("tq,qi,qj->tij", a2, _PHI_MID, _PHI_MID)
    mag = 1j * (C - np.transpose(C, (0, 2, 1))) + Q
    return S, mag, Mloc


def assemble_magnetic(mesh: TriangleMesh, A: Optional[PotentialField]) -> HermitianSystem:
    """Magnetic Neumann pencil (K, M); natural boundary conditions need no boundary terms."""
    n = len(mesh.nodes)
    S, mag, Mloc = local_matrices(mesh, A)
    K = _scatter(mesh, S + mag, n)
    M = _scatter(mesh, Mloc, n)
    return HermitianSystem(K, M, n, mesh.boundary_nodes, np.arange(n), mesh.h_max)


def assemble_dirichlet(mesh: TriangleMesh, A: Optional[PotentialField]) -> HermitianSystem:
    full = assemble_magnetic(mesh, A)
    interior = np.setdiff1d(np.arange(full.n), mesh.boundary_nodes)
    K = full.K[interior][:, interior].tocsr()
    M = full.M[interior][:, interior].tocsr()
    return HermitianSystem(K, M, len(interior), np.zeros(0, dtype=np.int64), interior, mesh.h_max)


def neumann_laplacian(mesh: TriangleMesh) -> HermitianSystem:
    return assemble_magnetic(mesh, None)


def rayleigh(system: HermitianSystem, v) -> float:
    v = np.asarray(v)
    if v.shape != (system.n,):
        raise ValueError(f"vector must have shape ({system.n},)")
    den = float(np.real(np.vdot(v, system.M @ v)))
    if not den > 0:
        raise ValueError("Rayleigh quotient of the zero vector")
    return float(np.real(np.vdot(v, system.K @ v))) / den


# --- torsion and the canonical potential ------------------------------------------

@dataclass(frozen=True, eq=False)
class TorsionField:
    mesh: TriangleMesh
    values: np.ndarray
    residual: float

    @property
    def phi_star(self) -> float:
        return float(np.max(np.abs(self.values)))


def _field_at_midpoints(beta_field, p):
    mids = _midpoints(p)
    if callable(beta_field):
        return np.asarray(beta_field(mids.reshape(-1, 2)), dtype=float).reshape(mids.shape[:2])
    return np.full(mids.shape[:2], float(beta_field))


def load_vector(mesh: TriangleMesh, f) -> np.ndarray:
    """F_i = int f phi_i by the midpoint rule."""
    p, area, _ = _geometry(mesh)
    fq = _field_at_midpoints(f, p)
    loc = (area / 3.0)[:, None] * (fq @ _PHI_MID)
    return np.bincount(mesh.triangles.ravel(), weights=loc.ravel(), minlength=len(mesh.nodes))


def solve_torsion(mesh: TriangleMesh, beta_field) -> TorsionField:
    """P1 solution of -div grad phi = beta in Omega, phi = 0 on the boundary.

    With the positive-Laplacian sign convention this is the torsion problem;
    for beta = 1 on the unit disk phi = (1 - |x|^2)/4.
    """
    n = len(mesh.nodes)
    S, _, _ = local_matrices(mesh, None)
    K = _scatter(mesh, S, n)
    F = load_vector(mesh, beta_field)
    interior = np.setdiff1d(np.arange(n), mesh.boundary_nodes)
    Kii = K[interior][:, interior].tocsc()
    phi = np.zeros(n)
    if len(interior):
        phi[interior] = spsolve(Kii, F[interior])
    if not np.all(np.isfinite(phi)):
        raise SolverError("torsion system is singular")
    r = Kii @ phi[interior] - F[interior] if len(interior) else np.zeros(0)
    scale = max(float(np.linalg.norm(F[interior])) if len(interior) else 0.0, 1e-300)
    res = float(np.linalg.norm(r)) / scale if np.any(F[interior]) else float(np.linalg.norm(r))
    if res > 1e-10:
        raise SolverError(f"torsion residual {res:.2e} above 1e-10")
    return TorsionField(mesh, phi, res)


class _Locator:
    """Point location on a triangle mesh via nearest centroids + barycentric test."""

    def __init__(self, mesh: TriangleMesh, k: int = 12):
        self.mesh = mesh
        self.k = min(k, len(mesh.triangles))
        self.tree = cKDTree(mesh.nodes[mesh.triangles].mean(axis=1))

    def find(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(pts)
        _, cand = self.tree.query(pts, k=self.k)
        cand = np.atleast_2d(cand).reshape(len(pts), -1)
        p = self.mesh.nodes[self.mesh.triangles[cand]]          # (m, k, 3, 2)
        v0, v1, v2 = p[..., 0, :], p[..., 1, :], p[..., 2, :]
        d = (v1[..., 0] - v0[..., 0]) * (v2[..., 1] - v0[..., 1]) - \
            (v1[..., 1] - v0[..., 1]) * (v2[..., 0] - v0[..., 0])
        x = pts[:, None, :] - v0
        l1 = (x[..., 0] * (v2[..., 1] - v0[..., 1]) - x[..., 1] * (v2[..., 0] - v0[..., 0])) / d
        l2 = ((v1[..., 0] - v0[..., 0]) * x[..., 1] - (v1[..., 1] - v0[..., 1]) * x[..., 0]) / d
        lmin = np.minimum(np.minimum(l1, l2), 1 - l1 - l2)
        best = np.argmax(lmin, axis=1)
        out = cand[np.arange(len(pts)), best]
        out[lmin[np.arange(len(pts)), best] < -1e-9] = -1
        return out


def potential_from_torsion(phi: TorsionField) -> PotentialField:
    """A_can = (d phi/d x2, -d phi/d x1), piecewise constant per triangle."""
    mesh = phi.mesh
    _, _, grads = _geometry(mesh)
    g = np.einsum("ti,tid->td", phi.values[mesh.triangles], grads)
    per_tri = np.column_stack([g[:, 1], -g[:, 0]])
    loc = _Locator(mesh)

    def ev(x):
        x = np.asarray(x, dtype=float)
        shape = x.shape
        idx = loc.find(x.reshape(-1, 2))
        out = np.where((idx >= 0)[:, None], per_tri[np.maximum(idx, 0)], np.nan)
        return out.reshape(shape)

    return PotentialField(ev, "from_torsion", None, mesh, per_tri)


def boundary_circulation(mesh: TriangleMesh, A: PotentialField, loop: int) -> float:
    """Counterclockwise line integral of A along boundary loop `loop`."""
    sel = mesh.boundary_loop == loop
    e = mesh.boundary_edges[sel]
    a, b = mesh.nodes[e[:, 0]], mesh.nodes[e[:, 1]]
    if A.per_triangle is not None and A.mesh is mesh:
        # P0 field: use the value of the triangle owning each edge
        owner = {}
        for t, tri in enumerate(mesh.triangles.tolist()):
            for k in range(3):
                owner[(tri[k], tri[(k + 1) % 3])] = t
        vals = A.per_triangle[[owner[(i, j)] for i, j in e.tolist()]]
        total = float(np.sum(np.sum(vals * (b - a), axis=1)))
    else:
        # Simpson on each straight edge
        fa, fm, fb = A(a), A(0.5 * (a + b)), A(b)
        total = float(np.sum(np.sum((fa + 4 * fm + fb) / 6.0 * (b - a), axis=1)))
    # loops carry the domain on their left: outer ccw, inner cw
    pts = a
    signed = 0.5 * np.sum(pts[:, 0] * b[:, 1] - b[:, 0] * pts[:, 1])
    return total if signed > 0 else -total


def write_coo(matrix: sp.spmatrix, path) -> None:
    """Coordinate text export: one 'i j re im' line per stored entry."""
    c = matrix.tocoo()
    with open(path, "w") as fh:
        for i, j, v in zip(c.row.tolist(), c.col.tolist(), np.asarray(c.data).tolist()):
            v = complex(v)
            fh.write(f"{i} {j} {v.real!r} {v.imag!r}\n")
