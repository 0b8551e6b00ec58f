"""Closed-form and semi-analytic spectra.

Disk eigenfunctions separate as e^{i n t} v_n(r) with
v_n(r) = r^|n| e^{-y/2} M(a, |n|+1, y),  y = beta r^2 / 2,
a = (|n| - n + 1)/2 - lambda/(2 beta).  Eigenvalues solve v_n'(R) = 0.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import eigh_tridiagonal
from scipy.optimize import brentq
from scipy.special import jnp_zeros, jvp

from .eigensolve import Spectrum

SERIES_TOL = 1e-16
# the alternating Kummer series loses ~e^{y/2} relative accuracy to cancellation
SERIES_Y_MAX = 25.0
SERIES_GAMMA_MAX = 30.0
# small y: terms peak near exp(2 sqrt(gamma y)), so gamma y <= 30 keeps the series accurate
SERIES_GAMMA_Y_MAX = 30.0
# outside those regions the series is still used when sum |terms| stays below this
SERIES_ABS_SUM_MAX = 1e8
GRID_DIVISOR = 20          # lambda-grid step max(beta, sqrt(lam_min) / R) / 20
BISECT_TOL = 1e-12         # relative to beta; contract needs 1e-10
AUDIT_RETRIES = 3


class BranchError(RuntimeError):
    """Root bracketing failed the sign-consistency audit."""


@dataclass(frozen=True)
class DiskBranchPoint:
    n: int
    j: int
    lam: float
    R: float
    beta: float
    residual: float


@dataclass(frozen=True)
class DeGennesResult:
    theta0: float
    xi0: float
    T: float
    N: int
    tol: float


# --- Kummer series ---------------------------------------------------------------

def kummer_series(a, b: float, y: float, max_terms: int = 5000):
    """M(a, b, y) for an array of a; returns (value, sum of |terms|)."""
    a = np.atleast_1d(np.asarray(a, dtype=float))
    if a.size <= 4:
        # per-term numpy overhead dominates for a handful of parameters
        pairs = [_kummer_scalar(float(v), b, y, max_terms) for v in a.ravel()]
        return (np.array([p[0] for p in pairs]).reshape(a.shape),
                np.array([p[1] for p in pairs]).reshape(a.shape))
    term = np.ones_like(a)
    total = np.ones_like(a)
    abs_total = np.ones_like(a)
    active = np.ones(a.shape, dtype=bool)
    for k in range(max_terms):
        term = term * (a + k) / (b + k) * y / (k + 1)
        total = total + np.where(active, term, 0.0)
        abs_total = abs_total + np.where(active, np.abs(term), 0.0)
        # stop only past the sign-change region k > |a|
        done = (np.abs(term) <= SERIES_TOL * np.abs(total)) & (k > np.abs(a))
        done |= term == 0.0
        active &= ~done
        if not active.any():
            break
    else:
        raise BranchError("Kummer series did not converge")
    return total, abs_total


def _kummer_scalar(a: float, b: float, y: float, max_terms: int) -> tuple[float, float]:
    term = total = abs_total = 1.0
    for k in range(max_terms):
        term = term * (a + k) / (b + k) * y / (k + 1)
        total += term
        abs_total += abs(term)
        if term == 0.0 or (abs(term) <= SERIES_TOL * abs(total) and k > abs(a)):
            return total, abs_total
    raise BranchError("Kummer series did not converge")


def _branch_series(n: int, beta: float, R: float, lam: np.ndarray, with_abs_sum: bool = False):
    m = abs(n)
    y = beta * R * R / 2
    a = (m - n + 1) / 2 - lam / (2 * beta)
    b = m + 1
    M0, s0 = kummer_series(a, b, y)
    M1, s1 = kummer_series(a + 1, b + 1, y)
    val = (m - y) * M0 + 2 * y * (a / b) * M1
    return (val, np.maximum(s0, s1)) if with_abs_sum else val


def _branch_ode(n: int, beta: float, R: float, lam: float) -> float:
    """Sign of v_n'(R) (times a positive factor) by integrating the radial equation."""
    m = abs(n)
    r0 = min(1e-3 * R, 1e-3 / math.sqrt(max(abs(lam), beta, 1.0)))
    c2 = -(lam + beta * n) / (4 * (m + 1))
    v = r0 ** m * (1 + c2 * r0 * r0)
    dv = m * r0 ** (m - 1) * (1 + c2 * r0 * r0) + 2 * c2 * r0 ** (m + 1) if m > 0 else \
        2 * c2 * r0
    s = math.hypot(v, dv)
    y0 = np.array([v / s, dv / s])

    def rhs(r, u):
        pot = (beta * r / 2 - n / r) ** 2 - lam
        return [u[1], -u[1] / r + pot * u[0]]

    edges = np.linspace(r0, R, 1 + max(4, int(math.ceil(R * math.sqrt(abs(lam) + beta * R * R)))))
    for lo, hi in zip(edges[:-1], edges[1:]):
        sol = solve_ivp(rhs, (lo, hi), y0, method="DOP853", rtol=1e-12, atol=1e-14)
        if not sol.success:
            raise BranchError(f"radial ODE failed: {sol.message}")
        y0 = sol.y[:, -1]
        y0 = y0 / math.hypot(*y0)  # positive rescaling keeps the sign
    return float(y0[1])


def branch_function(n: int, beta: float, R: float, lam):
    """Sign-accurate multiple of v_n'(R) as a function of lambda (array-valued)."""
    if not beta > 0 or not R > 0:
        raise ValueError("branch_function needs beta > 0 and R > 0")
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    y = beta * R * R / 2
    gamma = lam / (2 * beta) - 0.5
    use_series = (y <= SERIES_Y_MAX) & ((gamma <= SERIES_GAMMA_MAX) | (gamma * y <= SERIES_GAMMA_Y_MAX))
    out = np.empty_like(lam)
    if use_series.any():
        out[use_series] = _branch_series(n, beta, R, lam[use_series])
    # cheap second chance before the ODE: the series sign is sound while cancellation is bounded
    rest = np.flatnonzero(~use_series & (y <= SERIES_Y_MAX))
    if rest.size:
        val, abs_sum = _branch_series(n, beta, R, lam[rest], with_abs_sum=True)
        ok = abs_sum <= SERIES_ABS_SUM_MAX
        out[rest[ok]] = val[ok]
        use_series[rest[ok]] = True
    for i in np.flatnonzero(~use_series):
        out[i] = _branch_ode(n, beta, R, float(lam[i]))
    if np.any(np.isnan(out)):
        raise BranchError("branch function returned NaN")
    return out


def _bessel_branch(n: int, R: float, lam: np.ndarray) -> np.ndarray:
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    k = np.sqrt(np.maximum(lam, 0.0))
    # J_m'(kR) / k^(m-1) stays positive as k -> 0
    with np.errstate(divide="ignore", invalid="ignore"):
        val = jvp(abs(n), k * R) / np.where(k > 0, k, 1.0) ** max(abs(n) - 1, 0)
    return val


def _brackets(f, lam_max: float, step: float, lam_min: float = 0.0):
    """Sign changes of f on a lambda-grid; returns (exact roots, bracket lows, bracket highs)."""
    # start one step below lam_min, a rigorous lower bound for the roots
    start = max(0.0, (math.floor(lam_min / step) - 1) * step)
    grid = np.arange(start, lam_max + step, step)
    grid[-1] = max(grid[-1], lam_max)
    F = f(grid)
    exact = [float(g) for g, v in zip(grid, F) if v == 0.0 and 0 < g <= lam_max]
    sel = np.flatnonzero(F[:-1] * F[1:] < 0)
    return exact, grid[sel], grid[sel + 1]


def _polish(f, exact, lo, hi, lam_max: float, tol: float) -> np.ndarray:
    def scalar(x):
        return float(f(np.array([x]))[0])

    roots = list(exact)
    roots += [brentq(scalar, a, b, xtol=tol, rtol=4 * np.finfo(float).eps) for a, b in zip(lo, hi)]
    return np.array(sorted(r for r in roots if 0 < r <= lam_max))


def _roots_on_grid(f, lam_max: float, step: float, tol: float, lam_min: float = 0.0):
    return _polish(f, *_brackets(f, lam_max, step, lam_min), lam_max, tol)


def disk_branch_eigens(n: int, beta: float, R: float, lam_max: float) -> list[DiskBranchPoint]:
    """All roots of v_n'(R) = 0 in (0, lam_max], ascending in j."""
    if not lam_max > 0:
        raise ValueError("lam_max must be > 0")
    if beta < 0:
        # lambda_j(n, -beta) = lambda_j(-n, beta)
        pts = disk_branch_eigens(-n, -beta, R, lam_max)
        return [DiskBranchPoint(n, p.j, p.lam, R, beta, p.residual) for p in pts]
    scale = beta if beta > 0 else 1.0
    if beta > 0:
        def f(lam):
            return branch_function(n, beta, R, lam)
    else:
        def f(lam):
            return _bessel_branch(n, R, lam)
    tol = BISECT_TOL * scale
    lam_min = _branch_lower_bound(n, beta, R)
    if lam_min > lam_max:
        return []
    # radial roots above lam_min are spaced roughly 2 pi sqrt(lam) / R apart
    step = max(scale, math.sqrt(lam_min) / R) / GRID_DIVISOR
    # sign-consistency audit: halving the step must not reveal new sign changes
    br = _brackets(f, lam_max, step, lam_min)
    for _ in range(AUDIT_RETRIES + 1):
        finer = _brackets(f, lam_max, step / 2, lam_min)
        if len(finer[0]) + len(finer[1]) == len(br[0]) + len(br[1]):
            break
        br, step = finer, step / 2
    else:
        raise BranchError(f"root count unstable for n={n}, R={R}, beta={beta}")
    roots = _polish(f, *br, lam_max, tol)
    res = np.abs(f(roots)) if len(roots) else np.zeros(0)
    return [DiskBranchPoint(n, j + 1, float(lam), float(R), float(beta), float(r))
            for j, (lam, r) in enumerate(zip(roots, res))]


def _branch_lower_bound(n: int, beta: float, R: float) -> float:
    """Rigorous lower bound on the branch minimum from the radial potential."""
    b = abs(beta)
    if beta < 0:
        n = -n
    if n < 0:
        # (|n|/r + b r/2)^2 is minimal at r^2 = 2|n|/b with value 2 b |n|
        if b > 0 and 2 * abs(n) / b <= R * R:
            return 2 * b * abs(n)
        return (abs(n) / R + b * R / 2) ** 2
    if n > b * R * R / 2:
        return (n / R - b * R / 2) ** 2
    return 0.0


def disk_spectrum(R: float, beta: float, k: int, return_points: bool = False):
    """k smallest Neumann eigenvalues of the disk of radius R, with multiplicity.

    For a cap Lambda, scans n upward and downward until the potential lower
    bound of branch n exceeds Lambda, so every eigenvalue <= Lambda is found.
    Lambda starts at a Weyl-type guess and doubles up to 8 pi (k-1)/|B_R| + beta,
    a proven upper bound for lambda_k.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if not R > 0:
        raise ValueError("R must be > 0")
    area = math.pi * R * R
    proven = 8 * math.pi * (k - 1) / area + abs(beta)
    if beta == 0:
        proven = max(proven, 8 * math.pi * k / area)
    proven *= 1.0 + 1e-9
    # enumerate every eigenvalue below a cap; grow the cap until k are found
    cap = min(proven, 4 * math.pi * k / area + abs(beta))
    while True:
        pts = _all_branches_below(R, beta, cap)
        if len(pts) >= k or cap >= proven:
            break
        cap = min(2 * cap, proven)
    pts.sort(key=lambda p: (p.lam, p.n, p.j))
    if len(pts) < k:
        raise BranchError(f"found {len(pts)} < k={k} eigenvalues below {cap}")
    pts = pts[:k]
    spec = Spectrum(np.array([p.lam for p in pts]), np.array([p.residual for p in pts]),
                    float(beta), f"disk:R={R:g}", "closedform-disk", None,
                    [(p.n, p.j) for p in pts])
    return (spec, pts) if return_points else spec


def _all_branches_below(R: float, beta: float, lam_max: float) -> list[DiskBranchPoint]:
    pts: list[DiskBranchPoint] = []
    for direction in (1, -1):
        n = 0 if direction == 1 else -1
        while _branch_lower_bound(n, beta, R) <= lam_max:
            if beta == 0:
                pts.extend(_bessel_points(n, R, lam_max))
            else:
                pts.extend(disk_branch_eigens(n, beta, R, lam_max))
            n += direction
            if abs(n) > 100000:
                raise BranchError("n-scan did not terminate")
    return pts


def _bessel_points(n: int, R: float, lam_max: float) -> list[DiskBranchPoint]:
    m = abs(n)
    out = []
    if m == 0:
        out.append(DiskBranchPoint(n, 1, 0.0, R, 0.0, 0.0))
    cnt = 1
    while True:
        z = jnp_zeros(m, cnt)
        lam = (z / R) ** 2
        if lam[-1] > lam_max:
            break
        cnt += 1
    for j, v in enumerate(lam[lam <= lam_max]):
        out.append(DiskBranchPoint(n, len(out) + 1, float(v), R, 0.0, 0.0))
    return out


BRANCH_COLUMNS = ["n", "j", "lambda", "R", "beta", "residual"]


def write_branch_csv(points, path, header_comments=()) -> None:
    with open(path, "w", newline="") as fh:
        for line in header_comments:
            fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(BRANCH_COLUMNS)
        for p in points:
            w.writerow([p.n, p.j, repr(p.lam), repr(p.R), repr(p.beta), repr(p.residual)])


def dirichlet_disk_lambda1(R: float, beta: float) -> float:
    """First Dirichlet eigenvalue of the disk: smallest root of M(a, 1, beta R^2/2) on n = 0.

    The ground state of the Dirichlet disk is radial; test-oracle only.
    """
    y = beta * R * R / 2

    def f(lam):
        return kummer_series(0.5 - np.asarray(lam) / (2 * beta), 1.0, y)[0]

    step = beta / GRID_DIVISOR
    lam_max = 2.0 * (2.404825557695773 / R) ** 2 + beta
    roots = _roots_on_grid(f, lam_max, step, BISECT_TOL * beta)
    if not len(roots):
        raise BranchError("no Dirichlet root found")
    return float(roots[0])


# --- circle ------------------------------------------------------------------------

def _check_curve(L: float, S: float) -> None:
    if not (L > 0 and S > 0):
        raise ValueError("L and S must be > 0")
    if L * L < 4 * math.pi * S * (1 - 1e-12):
        raise ValueError(f"isoperimetric violation: L^2={L * L} < 4 pi S={4 * math.pi * S}")


def circle_spectrum(L: float, S: float, beta: float, count: int) -> Spectrum:
    """Smallest `count` values of (4 pi^2/L^2)(n - beta S/2 pi)^2, n in Z."""
    _check_curve(L, S)
    if count < 1:
        raise ValueError("count must be >= 1")
    flux = beta * S / (2 * math.pi)
    c = math.floor(flux)
    ns = np.arange(c - count - 1, c + count + 2)
    vals = (4 * math.pi ** 2 / (L * L)) * (ns - flux) ** 2
    order = np.lexsort((ns, vals))[:count]
    return Spectrum(vals[order], np.zeros(count), float(beta), f"circle:L={L:g},S={S:g}",
                    "closedform-circle", None, [int(v) for v in ns[order]])


def curve_lambda1(L: float, S: float, beta: float) -> float:
    return float(circle_spectrum(L, S, beta, 1).eigenvalues[0])


# --- Landau levels -------------------------------------------------------------------

def landau_level(l: int, beta: float) -> float:
    if l < 0:
        raise ValueError("l must be >= 0")
    return beta * (2 * l + 1)


def landau_norm_sq(n: int, l: int, beta: float) -> float:
    """pi (2/beta)^{n+1} (l+n)!/l!"""
    if n < 0 or l < 0 or not beta > 0:
        raise ValueError("need n, l >= 0 and beta > 0")
    return math.pi * (2 / beta) ** (n + 1) * math.factorial(l + n) / math.factorial(l)


def laguerre(l: int, alpha: int, y: float) -> float:
    """Generalized Laguerre polynomial by its explicit finite sum."""
    return sum((-1) ** i * math.comb(l + alpha, l - i) * y ** i / math.factorial(i)
               for i in range(l + 1))


def landau_sum_partial(l: int, y: float, N: int) -> float:
    """sum_{n=0}^N |v_{n,l}|^2 / c_{n,l}^2 at beta r^2/2 = y, in units of beta/2pi."""
    if y < 0:
        raise ValueError("y must be >= 0")
    total = 0.0
    for n in range(N + 1):
        L = laguerre(l, n, y)
        if L == 0.0:
            continue
        if y == 0.0:
            if n > 0:
                continue
            logp = math.lgamma(l + 1) - math.lgamma(l + n + 1)
        else:
            logp = n * math.log(y) - y + math.lgamma(l + 1) - math.lgamma(l + n + 1)
        total += math.exp(logp + 2 * math.log(abs(L)))
    return total


def upper_gamma_int(m: int, x: float) -> float:
    """Gamma(m, x) for integer m >= 1: (m-1)! e^{-x} sum_{k<m} x^k/k!."""
    if m < 1:
        raise ValueError("integer upper gamma needs m >= 1")
    return math.factorial(m - 1) * math.exp(-x) * sum(x ** k / math.factorial(k) for k in range(m))


def rayleigh_ratio_G(m: int, n: int) -> float:
    """Rayleigh quotient over beta of e^{-beta r^2/4} r^m e^{imt} on B_R, beta R^2/2 = n."""
    if m < 0 or n < 1:
        raise ValueError("need m >= 0, n >= 1")
    g_m = upper_gamma_int(m, n) if m >= 1 else 0.0  # multiplied by m^2 = 0 when m = 0
    num = (math.factorial(m) - m * m * g_m + 2 * m * upper_gamma_int(m + 1, n)
           - upper_gamma_int(m + 2, n))
    den = math.factorial(m) - upper_gamma_int(m + 1, n)
    return num / den


# --- de Gennes model ----------------------------------------------------------------

def _mu1_fd(xi: float, T: float, N: int) -> float:
    d = T / N
    t = (np.arange(N) + 0.5) * d
    diag = 2.0 / d ** 2 + (xi + t) ** 2
    diag[0] -= 1.0 / d ** 2      # symmetric ghost: f'(0) = 0
    diag[-1] += 1.0 / d ** 2     # antisymmetric ghost: f(T) = 0
    off = np.full(N - 1, -1.0 / d ** 2)
    w = eigh_tridiagonal(diag, off, eigvals_only=True, select="i", select_range=(0, 0))
    return float(w[0])


def mu1(xi: float, T: Optional[float] = None, N: int = 2000) -> float:
    """Ground state of -f'' + (xi+t)^2 f on (0, T), f'(0) = 0, f(T) = 0.

    Second-order cell-centred differences, Richardson-extrapolated over N and 2N.
    """
    if T is None:
        T = 10.0 + abs(xi)
    if T < 10.0 + abs(xi):
        raise ValueError("truncation T must be >= 10 + |xi|")
    if N < 2000:
        raise ValueError("grid N must be >= 2000")
    a, b = _mu1_fd(xi, T, N), _mu1_fd(xi, T, 2 * N)
    if not (np.isfinite(a) and np.isfinite(b)) or abs(b - a) > 1e-3 * max(1.0, abs(b)):
        raise ArithmeticError(f"mu1 not converged: {a} vs {b}")
    return (4 * b - a) / 3


def theta0(tol: float = 1e-5, T: float = 13.0, N: int = 2000) -> DeGennesResult:
    """Golden-section minimization of mu1 over xi in [-3, 0]."""
    if tol < 1e-6:
        raise ValueError("tol must be >= 1e-6")
    lo, hi = -3.0, 0.0
    g = (math.sqrt(5) - 1) / 2
    x1, x2 = hi - g * (hi - lo), lo + g * (hi - lo)
    f1, f2 = mu1(x1, T, N), mu1(x2, T, N)
    while hi - lo > tol:
        if f1 < f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - g * (hi - lo)
            f1 = mu1(x1, T, N)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + g * (hi - lo)
            f2 = mu1(x2, T, N)
    xi0 = 0.5 * (lo + hi)
    if xi0 - (-3.0) < 2 * tol or 0.0 - xi0 < 2 * tol:
        raise ArithmeticError("minimizer at bracket edge")
    th = mu1(xi0, T, N)
    if abs(th - xi0 * xi0) > 10 * tol:
        raise ArithmeticError(f"|Theta0 - xi0^2| = {abs(th - xi0 * xi0):.2e} exceeds 10 tol")
    return DeGennesResult(th, xi0, T, N, tol)
