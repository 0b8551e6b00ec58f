"""Semiclassical Riesz-mean and eigenvalue-average bounds for constant field beta.

With X = 2 pi k / (beta |Omega|):
    R_1(z) = sum_j (z - lambda_j)_+ >= |Omega| z^2 / 8 pi - |Omega| beta^2 psi^2(z/2beta + 1/2) / 2 pi
    (1/k) sum_{j<=k} lambda_j <= 2 pi k / |Omega| + R(X)
    lambda_{k+1} <= 8 pi k / |Omega| + beta
    sum_j exp(-lambda_j t) >= beta |Omega| / (4 pi sinh(beta t))
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .eigensolve import Spectrum

R1_REL_TOL = 1e-9
REPORT_COLUMNS = ["z", "R1_emp", "R1_low", "margin", "valid"]


def fluctuation(a):
    """psi(a) = a - floor(a) - 1/2."""
    a = np.asarray(a, dtype=float)
    out = a - np.floor(a) - 0.5
    return float(out) if out.ndim == 0 else out


def _eigs(spectrum) -> np.ndarray:
    lam = spectrum.eigenvalues if isinstance(spectrum, Spectrum) else spectrum
    lam = np.asarray(lam, dtype=float)
    if lam.size and np.any(np.diff(lam) < -1e-12 * max(1.0, float(np.abs(lam).max()))):
        raise ValueError("spectrum must be sorted ascending")
    return lam


def R1_empirical(spectrum, z: float) -> tuple[float, bool]:
    """Sum of (z - lambda_j)_+ over the computed eigenvalues.

    Exact (valid) only for z <= largest computed eigenvalue; beyond it the
    missing eigenvalues could still contribute.
    """
    lam = _eigs(spectrum)
    if lam.size == 0:
        return 0.0, False
    return float(np.sum(np.clip(z - lam, 0.0, None))), bool(z <= lam[-1])


def R1_lower(z, beta: float, area: float):
    beta = abs(beta)
    z = np.asarray(z, dtype=float)
    if beta == 0:
        out = area * z * z / (8 * math.pi)
    else:
        psi = fluctuation(z / (2 * beta) + 0.5)
        out = area * z * z / (8 * math.pi) - area * beta * beta * np.square(psi) / (2 * math.pi)
    return float(out) if np.ndim(out) == 0 else out


def remainder_R(X, beta: float):
    """R(X) = beta/X (X - [X]) ([X] - X + 1); equals beta (1 - X) on [0, 1]."""
    X = np.asarray(X, dtype=float)
    if np.any(X < 0):
        raise ValueError("X must be >= 0")
    frac = X - np.floor(X)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(X > 0, beta / np.where(X > 0, X, 1.0) * frac * (1.0 - frac), beta)
    return float(out) if out.ndim == 0 else out


def avg_upper(k: int, beta: float, area: float) -> float:
    if k < 1:
        raise ValueError("k must be >= 1")
    beta = abs(beta)
    if beta == 0:
        raise ValueError("average bound needs beta != 0")
    X = 2 * math.pi * k / (beta * area)
    return 2 * math.pi * k / area + remainder_R(X, beta)


def sum_upper(k: int, beta: float, area: float) -> float:
    """Right-hand side of the k-sum bound written through [X], the Legendre dual form."""
    beta = abs(beta)
    X = 2 * math.pi * k / (beta * area)
    fl = math.floor(X)
    return beta * beta * area / (2 * math.pi) * ((2 * fl + 1) * (X - fl) + fl * fl)


def single_upper(k: int, beta: float, area: float) -> float:
    if k < 0:
        raise ValueError("k must be >= 0")
    return 8 * math.pi * k / area + abs(beta)


def single_implicit(k: int, beta: float, area: float, lam_next: float) -> float:
    """Implicit bound for lambda_{k+1} evaluated at the computed lambda_{k+1}."""
    beta = abs(beta)
    psi = fluctuation(lam_next / (2 * beta) + 0.5) if beta else 0.0
    inner = k * k + (beta * area / (2 * math.pi)) ** 2 * psi * psi
    return 4 * math.pi / area * (k + math.sqrt(inner))


def heat_lower(t: float, beta: float, area: float) -> float:
    if not t > 0:
        raise ValueError("t must be > 0")
    beta = abs(beta)
    if beta == 0:
        return area / (4 * math.pi * t)
    return beta * area / (4 * math.pi * math.sinh(beta * t))


@dataclass
class RieszReport:
    z: np.ndarray
    R1_emp: np.ndarray
    R1_low: np.ndarray
    margin: np.ndarray
    valid: np.ndarray
    tol: np.ndarray
    avg_k: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    avg: np.ndarray = field(default_factory=lambda: np.zeros(0))
    avg_bound: np.ndarray = field(default_factory=lambda: np.zeros(0))
    single_bound: np.ndarray = field(default_factory=lambda: np.zeros(0))
    single_implicit: np.ndarray = field(default_factory=lambda: np.zeros(0))
    heat_t: np.ndarray = field(default_factory=lambda: np.zeros(0))
    heat_truncated: np.ndarray = field(default_factory=lambda: np.zeros(0))
    heat_bound: np.ndarray = field(default_factory=lambda: np.zeros(0))
    lam_next: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def riesz_ok(self) -> bool:
        v = self.valid
        return bool(np.all(self.margin[v] >= -self.tol[v]))

    @property
    def avg_ok(self) -> bool:
        return bool(np.all(self.avg <= self.avg_bound * (1 + 1e-12)))

    @property
    def single_ok(self) -> bool:
        slack = 1 + 1e-12
        return bool(np.all(self.lam_next <= self.single_bound * slack)
                    and np.all(self.lam_next <= self.single_implicit * slack))

    @property
    def passed(self) -> bool:
        return self.riesz_ok and self.avg_ok and self.single_ok

    def __len__(self):
        return len(self.z)


def z_grid(lam: np.ndarray, z_max: float, n_uniform: int = 200) -> np.ndarray:
    """Eigenvalues, midpoints between neighbours, and a uniform grid on [0, z_max]."""
    lam = lam[lam <= z_max]
    mids = 0.5 * (lam[1:] + lam[:-1])
    z = np.concatenate([np.linspace(0.0, z_max, n_uniform), lam, mids])
    return np.unique(z)


def verify_spectrum(spectrum, beta: float, area: float, k_max: int | None = None,
                    n_uniform: int = 200, heat_t=(0.5, 1.0, 2.0)) -> RieszReport:
    """All semiclassical checks on the first k_max computed eigenvalues.

    The heat-trace comparison is recorded only: a truncated sum underestimates
    the trace, so it cannot fail meaningfully.
    """
    lam = _eigs(spectrum)
    if lam.size == 0:
        e = np.zeros(0)
        return RieszReport(e, e, e, e, np.zeros(0, dtype=bool), e)
    beta = abs(beta)
    k_max = lam.size if k_max is None else min(int(k_max), lam.size)
    z = z_grid(lam, float(lam[k_max - 1]), n_uniform)
    emp = np.sum(np.clip(z[:, None] - lam[None, :], 0.0, None), axis=1)
    low = np.asarray(R1_lower(z, beta, area), dtype=float).reshape(z.shape)
    valid = z <= lam[-1]
    tol = R1_REL_TOL * np.maximum(1.0, z * z * area)

    ks = np.arange(1, k_max + 1)
    avg = np.cumsum(lam[:k_max]) / ks
    avg_b = np.array([avg_upper(int(k), beta, area) for k in ks]) if beta else np.full(k_max, np.inf)
    # lambda_{k+1} against the bound with k = 1..k_max-1
    nxt = lam[1:k_max]
    single_b = np.array([single_upper(int(k), beta, area) for k in ks[:-1]])
    single_i = np.array([single_implicit(int(k), beta, area, float(l)) for k, l in zip(ks[:-1], nxt)])
    ht = np.asarray(heat_t, dtype=float)
    trunc = np.array([float(np.sum(np.exp(-lam * t))) for t in ht])
    hb = np.array([heat_lower(float(t), beta, area) for t in ht])
    return RieszReport(z, emp, low, emp - low, valid, tol, ks, avg, avg_b, single_b, single_i,
                       ht, trunc, hb, nxt)


def write_report_csv(report: RieszReport, path, header_comments=()) -> None:
    with open(path, "w", newline="") as fh:
        for line in header_comments:
            fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REPORT_COLUMNS)
        for row in zip(report.z, report.R1_emp, report.R1_low, report.margin, report.valid):
            w.writerow([repr(float(row[0])), repr(float(row[1])), repr(float(row[2])),
                        repr(float(row[3])), int(bool(row[4]))])
