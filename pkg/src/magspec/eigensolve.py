"""Smallest eigenpairs of the Hermitian pencil K x = lambda M x.

Shift-invert Arnoldi (ARPACK via scipy) with an explicit sparse LU of
K - sigma M, sigma < 0 so the shifted matrix is Hermitian positive definite.
At beta = 0 the constant null vector is deflated by an M-orthogonal
projector applied to every operator output.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigs, splu

from .fem import (HermitianSystem, SolverError, assemble_dirichlet, assemble_magnetic,
                  neumann_laplacian, standard_potential)
from .mesh import TriangleMesh, generate

DEFAULT_SEED = 42
DEFAULT_TOL = 1e-8
MAX_BLOCKS = 500
DENSE_LIMIT = 400


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray
    residuals: np.ndarray
    beta: float
    domain_id: str = ""
    method: str = "fem"
    h: Optional[float] = None
    labels: Optional[list] = field(default=None, compare=False)

    @property
    def k(self) -> int:
        return len(self.eigenvalues)

    def __len__(self) -> int:
        return len(self.eigenvalues)

    def rows(self):
        h = "" if self.h is None else repr(float(self.h))
        for i, (lam, res) in enumerate(zip(self.eigenvalues.tolist(), self.residuals.tolist())):
            yield [i + 1, repr(lam), repr(res), self.method, repr(float(self.beta)), self.domain_id, h]


SPECTRUM_COLUMNS = ["index", "lambda", "residual", "method", "beta", "domain_id", "h"]


def write_spectrum_csv(spec: Spectrum, path, header_comments=()) -> None:
    with open(path, "w", newline="") as fh:
        for line in header_comments:
            fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SPECTRUM_COLUMNS)
        w.writerows(spec.rows())


class ConvergenceError(SolverError):
    def __init__(self, msg, best_residuals=None):
        super().__init__(msg)
        self.best_residuals = best_residuals


def pencil_residuals(K, M, lam, X) -> np.ndarray:
    """||K x - lam M x||_{M^-1} / (||x||_M max(lam, 1)) for each column x.

    The M^{-1} norm of the residual makes the backward-error bound read
    |lam - lam_true| <= residual * max(lam, 1).
    """
    R = K @ X - (M @ X) * lam[None, :]
    Mlu = splu(sp.csc_matrix(M, dtype=complex)) if sp.issparse(M) else None
    if Mlu is not None:
        MinvR = Mlu.solve(np.asarray(R, dtype=complex))
    else:
        MinvR = np.linalg.solve(M, R)
    rn = np.sqrt(np.abs(np.real(np.sum(np.conj(R) * MinvR, axis=0))))
    xn = np.sqrt(np.abs(np.real(np.sum(np.conj(X) * (M @ X), axis=0))))
    return rn / (xn * np.maximum(np.abs(lam), 1.0))


def _is_real(K) -> bool:
    data = K.data if sp.issparse(K) else np.asarray(K)
    return not np.iscomplexobj(data) or not np.any(np.imag(data))


def _dense(K, M, k, deflate):
    Kd = K.toarray() if sp.issparse(K) else np.asarray(K)
    Md = M.toarray() if sp.issparse(M) else np.asarray(M)
    w, V = sla.eigh(Kd, Md)
    if deflate:
        c = np.ones(Kd.shape[0])
        overlap = np.abs(np.conj(V).T @ (Md @ c)) / np.sqrt(c @ Md @ c)
        drop = int(np.argmax(overlap))
        keep = np.ones(len(w), dtype=bool)
        keep[drop] = False
        w, V = w[keep], V[:, keep]
    return w[:k], V[:, :k]


def _sigma(K, M) -> float:
    """Negative shift on the scale of lambda_1 so K - sigma M is definite.

    The Rayleigh quotient of the constant vector bounds lambda_1 from above;
    a shift far below the spectrum clusters the shift-inverted eigenvalues.
    At beta = 0 that quotient vanishes and 1/|Omega| sets the scale.
    """
    c = np.ones(K.shape[0])
    cMc = float(np.real(c @ (M @ c)))
    rho = float(np.real(c @ (K @ c))) / cMc
    return -0.1 * rho if rho > 1e-12 / cMc else -0.1 / cMc


def smallest(system: HermitianSystem, k: int, tol: float = DEFAULT_TOL, seed: int = DEFAULT_SEED,
             deflate_constants: Optional[bool] = None, domain_id: str = "", beta: float = 0.0,
             return_vectors: bool = False):
    """k smallest eigenpairs of (K, M).

    deflate_constants defaults to True only when K is real (no magnetic
    field); the constant then is an exact null vector of the Neumann pencil.
    At beta = 0 the deflated zero mode is reported as eigenvalue 0 first so
    indices match the usual Neumann ordering.
    """
    K, M = system.K, system.M
    n = system.n
    if k < 1 or k > n:
        raise ValueError(f"k={k} must satisfy 1 <= k <= n={n}")
    if not tol > 0:
        raise ValueError("tol must be > 0")
    real = _is_real(K)
    if real and np.iscomplexobj(K.data if sp.issparse(K) else K):
        K = K.real
    if deflate_constants is None:
        deflate_constants = real and len(system.boundary_dofs) > 0 and \
            abs(float(np.sum(K @ np.ones(n)))) <= 1e-9 * max(1.0, abs(K).sum())
    k_solve = k - 1 if deflate_constants else k
    c = np.ones(n)
    zero_vec = c / np.sqrt(float(c @ (M @ c)))

    if k_solve == 0:
        lam = np.zeros(0)
        X = np.zeros((n, 0), dtype=complex)
    elif n <= DENSE_LIMIT or k_solve >= n - 2:
        lam, X = _dense(K, M, k_solve, deflate_constants)
    else:
        sigma = _sigma(K, M)
        dtype = float if real else complex
        lu = splu(sp.csc_matrix(K - sigma * M, dtype=dtype))
        Mc = M.tocsr()
        Mc_c = Mc @ c
        cMc = float(c @ Mc_c)

        def op(x):
            y = lu.solve(np.asarray(x, dtype=dtype))
            if deflate_constants:
                y = y - c * (np.vdot(Mc_c, y) / cMc)
            return y

        OPinv = LinearOperator((n, n), matvec=op, dtype=dtype)
        rng = np.random.default_rng(seed)
        v0 = rng.standard_normal(n)
        if not real:
            v0 = v0 + 1j * rng.standard_normal(n)
        if deflate_constants:
            v0 = v0 - c * (np.vdot(Mc_c, v0) / cMc)
        ncv = min(n - 1, max(2 * k_solve + 1, k_solve + 20))
        try:
            if real:
                from scipy.sparse.linalg import eigsh

                w, X = eigsh(K, k=k_solve, M=Mc, sigma=sigma, which="LM",
                             v0=v0, ncv=ncv, maxiter=MAX_BLOCKS * n, tol=tol * 1e-4, OPinv=OPinv,
                             mode="normal")
            else:
                w, X = eigs(K, k=k_solve, M=Mc, sigma=sigma, which="LM", v0=v0, ncv=ncv,
                            maxiter=MAX_BLOCKS * n, tol=tol * 1e-4, OPinv=OPinv)
        except ArpackNoConvergence as exc:
            raise ConvergenceError(f"ARPACK did not converge: {exc}",
                                   getattr(exc, "eigenvalues", None)) from exc
        w = np.real(w)
        order = np.argsort(w, kind="stable")
        lam, X = w[order], X[:, order]
        # Rayleigh refinement of the eigenvalues from the returned vectors
        KX, MX = K @ X, Mc @ X
        lam = np.real(np.sum(np.conj(X) * KX, axis=0)) / np.real(np.sum(np.conj(X) * MX, axis=0))
        order = np.argsort(lam, kind="stable")
        lam, X = lam[order], X[:, order]

    if deflate_constants:
        lam = np.concatenate([[0.0], lam])
        X = np.column_stack([zero_vec.astype(X.dtype if X.size else float), X])
    lam = np.where((lam < 0) & (lam > -1e-10 * max(1.0, float(np.max(np.abs(lam))) if lam.size else 1.0)),
                   0.0, lam)
    res = pencil_residuals(K, M, lam, X)
    if np.any(res > tol):
        raise ConvergenceError(f"residuals above tol={tol:g}: max {float(res.max()):.3e}", res)
    if np.any(lam < 0):
        raise SolverError(f"negative eigenvalue {float(lam.min()):.3e} in a semidefinite pencil")
    spec = Spectrum(np.asarray(lam, dtype=float), res, float(beta), domain_id, "fem", system.h)
    if return_vectors:
        return spec, X
    return spec


def neumann_lambda2(mesh: TriangleMesh, tol: float = DEFAULT_TOL, seed: int = DEFAULT_SEED) -> float:
    """First positive eigenvalue of the Neumann Laplacian (constants deflated)."""
    sys0 = neumann_laplacian(mesh)
    return float(smallest(sys0, 2, tol=tol, seed=seed, deflate_constants=True).eigenvalues[1])


def fem_spectrum(spec, beta: float, h: float, k: int, tol: float = DEFAULT_TOL,
                 seed: int = DEFAULT_SEED, dirichlet: bool = False, mesh: Optional[TriangleMesh] = None):
    """Mesh a DomainSpec, assemble with the standard potential and solve."""
    mesh = generate(spec, h) if mesh is None else mesh
    A = standard_potential(beta) if beta != 0 else None
    system = assemble_dirichlet(mesh, A) if dirichlet else assemble_magnetic(mesh, A)
    out = smallest(system, k, tol=tol, seed=seed, domain_id=spec.label(), beta=beta)
    return Spectrum(out.eigenvalues, out.residuals, float(beta), spec.label(),
                    "fem-dirichlet" if dirichlet else "fem", float(h))
