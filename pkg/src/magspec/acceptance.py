"""Acceptance criteria 1-11 as plain functions shared by the CLI and the test suite.

Each criterion returns a CriterionResult with a pass flag, a one-line detail
and the raw numbers (margins, errors) for the report.
"""
from __future__ import annotations

import math
import os
import tempfile
import time
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import jnp_zeros

from . import bounds as bd
from . import closedform as cf
from . import geometry as geo
from . import riesz
from .eigensolve import DEFAULT_TOL, fem_spectrum, write_spectrum_csv
from .fem import solve_torsion
from .mesh import generate

THETA0_REF = 0.590106

# mesh sizes for the FEM suite; each solves in under 2 s
SUITE = (
    (geo.disk(0.5), 0.025),
    (geo.disk(1.0), 0.04),
    (geo.disk(2.0), 0.06),
    (geo.disk(4.0), 0.1),
    (geo.disk(6.0), 0.12),
    (geo.rectangle(1.0, 1.0), 0.04),
    (geo.rectangle(2.0, 1.0), 0.04),
    (geo.annulus(1.0, 2.0), 0.05),
    (geo.rectangle(4.0, 0.1), 0.02),
)

# criterion 2: ~1e4 DOF at the fine level
DISK_H = (0.04, 0.02)
CONVERGENCE_RATIO = 2.5

# criterion 8: thresholds frozen from the oracle run (mesh size = h/4)
TUBE_HALF_WIDTHS = (0.2, 0.1, 0.05)
TUBE_MESH_DIV = 4
TUBE_ELLIPSE_RATIO = 1.5   # observed 1.83, 1.92 per halving
TUBE_CIRCLE_RATIO = 3.0    # observed 4.17, 4.08 per halving

DVSN_RADII = (0.5, 1.0, 2.0, 4.0)
DVSN_FEM_H = {0.5: 0.025, 1.0: 0.05, 2.0: 0.07, 4.0: 0.1}


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str
    data: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] criterion {self.number:2d} {self.title}: {self.detail} ({self.seconds:.1f}s)"

    def to_json(self) -> dict:
        return {"number": self.number, "title": self.title, "passed": self.passed,
                "detail": self.detail, "seconds": self.seconds, "data": _jsonable(self.data)}


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    return x


def _timed(fn):
    def wrapper(*args, **kw):
        t = time.perf_counter()
        res = fn(*args, **kw)
        res.seconds = time.perf_counter() - t
        return res
    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


@lru_cache(maxsize=None)
def _suite_fem(index: int, beta: float = 1.0):
    spec, h = SUITE[index]
    return fem_spectrum(spec, beta, h, 1)


def neumann_lambda2_exact(spec: geo.DomainSpec) -> float:
    """Closed-form Neumann lambda_2 for disks and rectangles."""
    if spec.kind == "disk":
        return float((jnp_zeros(1, 1)[0] / spec.params["R"]) ** 2)
    if spec.kind == "rectangle":
        return (math.pi / max(spec.params["w"], spec.params["h"])) ** 2
    raise ValueError(f"no closed-form Neumann lambda_2 for {spec.kind}")


# --- criteria -------------------------------------------------------------------

@_timed
def criterion_1() -> CriterionResult:
    t = time.perf_counter()
    r = cf.theta0(1e-5)
    dt = time.perf_counter() - t
    err = abs(r.theta0 - THETA0_REF)
    self_c = abs(r.theta0 - r.xi0 ** 2)
    ok = err <= 5e-4 and self_c <= 1e-4 and dt < 10
    return CriterionResult(1, "de Gennes constant", ok,
                           f"Theta0={r.theta0:.7f} xi0={r.xi0:.7f} |Theta0-xi0^2|={self_c:.1e}",
                           {"theta0": r.theta0, "xi0": r.xi0, "error": err, "runtime": dt})


@_timed
def criterion_2(h_pair=DISK_H, k: int = 10) -> CriterionResult:
    exact = cf.disk_spectrum(1.0, 1.0, k).eigenvalues
    errs, dofs = [], []
    for h in h_pair:
        mesh = generate(geo.disk(1.0), h)
        s = fem_spectrum(geo.disk(1.0), 1.0, h, k, mesh=mesh)
        errs.append(np.abs(s.eigenvalues - exact) / exact)
        dofs.append(len(mesh.nodes))
    coarse, fine = errs
    ratio = coarse / np.maximum(fine, 1e-300)
    ok = bool(np.all(fine <= 0.01) and np.all(ratio >= CONVERGENCE_RATIO))
    return CriterionResult(2, "closed form vs FEM on the unit disk", ok,
                           f"max rel err {fine.max():.2e} at {dofs[-1]} DOF, min ratio {ratio.min():.2f}",
                           {"exact": exact, "rel_err_coarse": coarse, "rel_err_fine": fine,
                            "ratio": ratio, "dof": dofs, "h": list(h_pair)})


@_timed
def criterion_3() -> CriterionResult:
    ok, rows = True, []
    for n in (1, 2, 3):
        R = math.sqrt(2 * n)
        lam = cf.disk_spectrum(R, 1.0, n + 3).eigenvalues
        dist = float(np.min(np.abs(lam - 1.0)))
        below = int(np.sum(lam < 1.0 - 1e-8))
        ok &= dist <= 1e-8 and below >= n
        rows.append({"n": n, "R": R, "dist_to_beta": dist, "count_below": below})
    return CriterionResult(3, "beta is an eigenvalue at R = sqrt(2n)", ok,
                           "; ".join(f"n={r['n']}: {r['count_below']} below, |lam-1|={r['dist_to_beta']:.1e}"
                                     for r in rows), {"rows": rows})


@_timed
def criterion_4(beta: float = 1.0) -> CriterionResult:
    rows, ok = [], True
    th = cf.theta0(1e-5).theta0
    for i, (spec, h) in enumerate(SUITE):
        s = _suite_fem(i, beta)
        lam, res = float(s.eigenvalues[0]), float(s.residuals[0])
        margin = beta - 10 * res - lam
        ok &= margin > 0
        # Theta0 beta margin is recorded only: whether it is always positive is open.
        # Coarse large-disk meshes sit ~6% high, so disks use the closed form here.
        ref = float(cf.disk_spectrum(spec.params["R"], beta, 1).eigenvalues[0]) \
            if spec.kind == "disk" else lam
        rows.append({"domain": spec.label(), "lambda1": lam, "residual": res, "margin": margin,
                     "theta0_margin": th * beta - ref})
    worst = min(rows, key=lambda r: r["margin"])
    th_worst = min(r["theta0_margin"] for r in rows)
    return CriterionResult(4, "lambda_1 < beta strictly", ok,
                           f"smallest margin {worst['margin']:.4f} on {worst['domain']}; "
                           f"min Theta0*beta - lambda_1 {th_worst:.4f} (logged)", {"rows": rows})


def suite_bounds(spec: geo.DomainSpec, h: float, beta: float, lam_spec):
    """Every applicable constant-free bound for one suite domain, with verdicts."""
    summ = geo.summarize(spec)
    sc = spec.simply_connected
    mesh = generate(spec, h)
    tors = solve_torsion(mesh, beta)
    upper = [bd.ub_universal(beta), bd.ub_circumradius(summ.circumradius, beta),
             bd.ub_width(summ.width, beta), bd.ub_simply_connected_area(summ.area, beta, sc),
             bd.ub_fh2(summ.area, beta, sc)]
    upper += bd.ub_variable(beta, tors.phi_star, summ.area, beta, sc)
    upper.append(bd.ub_variable_integral(mesh, beta, tors))
    lower = []
    if spec.kind in ("disk", "rectangle"):
        lower.append(bd.lb_kovarik(summ.area, summ.inradius, neumann_lambda2_exact(spec), beta, sc))
    return [bd.check(b, lam_spec) for b in upper + lower]


@_timed
def criterion_5(beta: float = 1.0) -> CriterionResult:
    rows, ok, n_checked = [], True, 0
    for i, (spec, h) in enumerate(SUITE):
        s = _suite_fem(i, beta)
        for v in suite_bounds(spec, h, beta, s):
            if v.status == "inapplicable":
                continue
            n_checked += 1
            ok &= v.status == "pass"
            rows.append({"domain": spec.label(), "bound": v.bound.theorem, "side": v.bound.side,
                         "value": v.bound.value, "lambda1": float(s.eigenvalues[0]),
                         "margin": v.margin, "status": v.status})
    fails = [r for r in rows if r["status"] != "pass"]
    detail = f"{n_checked} checks, {len(fails)} failures"
    if rows:
        tight = min(rows, key=lambda r: r["margin"])
        detail += f", tightest {tight['bound']} on {tight['domain']} margin {tight['margin']:.2e}"
    return CriterionResult(5, "bound sandwich", ok, detail, {"rows": rows})


@_timed
def criterion_6() -> CriterionResult:
    area = 16 * math.pi
    s = cf.disk_spectrum(4.0, 1.0, 40)
    lam = s.eigenvalues
    z = np.linspace(0.0, lam[29], 200)
    emp = np.sum(np.clip(z[:, None] - lam[None, :], 0.0, None), axis=1)
    low = riesz.R1_lower(z, 1.0, area)
    tol = riesz.R1_REL_TOL * np.maximum(1.0, z * z * area)
    riesz_ok = bool(np.all(emp - low >= -tol))
    rep = riesz.verify_spectrum(s, 1.0, area, 30)
    avg_ok = rep.avg_ok
    s6 = cf.disk_spectrum(math.sqrt(6.0), 1.0, 3).eigenvalues
    avg6 = np.cumsum(s6) / np.arange(1, 4)
    up1_ok = bool(np.all(avg6 <= 1.0))
    ok = riesz_ok and avg_ok and up1_ok and rep.riesz_ok
    return CriterionResult(6, "Riesz means and averages", ok,
                           f"min R1 margin {float(np.min(emp - low)):.2e}, "
                           f"min average margin {float(np.min(rep.avg_bound - rep.avg)):.3f}, "
                           f"B_sqrt6 averages {np.array2string(avg6, precision=4)}",
                           {"R1_margin": emp - low, "avg_margin": rep.avg_bound - rep.avg,
                            "avg_sqrt6": avg6})


@_timed
def criterion_7() -> CriterionResult:
    R = 0.1
    pts = cf.disk_branch_eigens(0, 1.0, R, 1.0)
    lam1 = min(p.lam for p in pts)
    ratio = lam1 * 8 / R ** 2
    return CriterionResult(7, "small-radius asymptote", abs(ratio - 1) <= 0.05,
                           f"8 lambda_1 / R^2 = {ratio:.8f}", {"lambda1": lam1, "ratio": ratio})


def _tube_lambda1(curve: geo.CurveSpec, h: float, beta: float) -> float:
    spec = geo.tube_domain(curve, h)
    return fem_spectrum(spec, beta, h / TUBE_MESH_DIV, 1)


@_timed
def criterion_8(beta: float = 1.0) -> CriterionResult:
    ell = geo.CurveSpec("ellipse", {"a": 1.0, "b": 0.5})
    L, S = geo.curve_invariants(ell)
    lam_gamma = cf.curve_lambda1(L, S, beta)
    gaps, lb_ok, ell_rows = [], True, []
    for h in TUBE_HALF_WIDTHS:
        s = _tube_lambda1(ell, h, beta)
        lam = float(s.eigenvalues[0])
        b = bd.tube_lb(lam_gamma, beta, h, S)
        tol = DEFAULT_TOL * max(lam, 1.0)
        lb_ok &= lam >= b.value - tol
        gaps.append(abs(lam - lam_gamma))
        ell_rows.append({"h": h, "lambda1": lam, "gap": gaps[-1], "tube_lb": b.value})
    ell_ratio = np.array(gaps[:-1]) / np.array(gaps[1:])
    ell_ok = bool(np.all(ell_ratio >= TUBE_ELLIPSE_RATIO)) and lb_ok

    circ = geo.CurveSpec("circle", {"R": math.sqrt(2.0)})
    lams = np.array([float(_tube_lambda1(circ, h, beta).eigenvalues[0]) for h in TUBE_HALF_WIDTHS])
    circ_ratio = lams[:-1] / lams[1:]
    circ_ok = bool(np.all(circ_ratio >= TUBE_CIRCLE_RATIO)) and lams[-1] < lams[0] / 2
    return CriterionResult(8, "tube limits", ell_ok and circ_ok,
                           f"ellipse gap ratios {np.array2string(ell_ratio, precision=2)}, "
                           f"circle ratios {np.array2string(circ_ratio, precision=2)}",
                           {"ellipse": ell_rows, "curve_lambda1": lam_gamma,
                            "circle_lambda1": lams, "ellipse_ratio": ell_ratio,
                            "circle_ratio": circ_ratio})


@_timed
def criterion_9(k: int = 10) -> CriterionResult:
    worst = 0.0
    for alpha in (0.5, 2.0):
        for R, beta in ((1.0, 1.0), (2.0, 0.5)):
            base = cf.disk_spectrum(R, beta, k).eigenvalues
            # lambda_j(Omega, beta) = alpha^2 lambda_j(alpha Omega, beta / alpha^2)
            scaled = cf.disk_spectrum(alpha * R, beta / alpha ** 2, k).eigenvalues
            worst = max(worst, float(np.max(np.abs(alpha ** 2 * scaled - base) / base)))
        L, S = 2 * math.pi * 1.3, math.pi * 1.3 ** 2
        base = cf.circle_spectrum(L, S, 1.0, k).eigenvalues
        scaled = cf.circle_spectrum(alpha * L, alpha ** 2 * S, 1.0 / alpha ** 2, k).eigenvalues
        worst = max(worst, float(np.max(np.abs(alpha ** 2 * scaled - base) / np.maximum(base, 1e-300))))
    return CriterionResult(9, "homothety", worst <= 1e-8, f"max relative deviation {worst:.1e}",
                           {"max_rel": worst})


@_timed
def criterion_10(use_fem: bool = True) -> CriterionResult:
    dir_cf = np.array([cf.dirichlet_disk_lambda1(R, 1.0) for R in DVSN_RADII])
    neu = np.array([cf.disk_spectrum(R, 1.0, 1).eigenvalues[0] for R in DVSN_RADII])
    ok = bool(np.all(np.diff(dir_cf) < 0) and np.all(dir_cf > 1.0) and np.all(neu < dir_cf))
    data = {"R": list(DVSN_RADII), "dirichlet": dir_cf, "neumann": neu}
    if use_fem:
        dir_fem = np.array([fem_spectrum(geo.disk(R), 1.0, DVSN_FEM_H[R], 1,
                                         dirichlet=True).eigenvalues[0] for R in DVSN_RADII])
        ok &= bool(np.all(np.diff(dir_fem) < 0) and np.all(dir_fem > 1.0) and np.all(neu < dir_fem))
        data["dirichlet_fem"] = dir_fem
    return CriterionResult(10, "Dirichlet above Neumann", ok,
                           "Dirichlet " + np.array2string(dir_cf, precision=4)
                           + " Neumann " + np.array2string(neu, precision=4), data)


@_timed
def criterion_11() -> CriterionResult:
    spec, h, k = geo.ellipse(1.0, 0.5), 0.05, 6
    plus = fem_spectrum(spec, 1.0, h, k)
    minus = fem_spectrum(spec, -1.0, h, k)
    diff = np.abs(plus.eigenvalues - minus.eigenvalues)
    sym_ok = bool(np.all(diff <= DEFAULT_TOL * np.maximum(plus.eigenvalues, 1.0)))
    cf_diff = float(np.max(np.abs(cf.disk_spectrum(1.0, 1.0, 8).eigenvalues
                                  - cf.disk_spectrum(1.0, -1.0, 8).eigenvalues)))
    sym_ok &= cf_diff <= 1e-10
    blobs = []
    with tempfile.TemporaryDirectory() as d:
        for i in range(2):
            p = os.path.join(d, f"run{i}.csv")
            write_spectrum_csv(fem_spectrum(spec, 1.0, h, k), p)
            with open(p, "rb") as fh:
                blobs.append(fh.read())
    det_ok = blobs[0] == blobs[1]
    return CriterionResult(11, "beta symmetry and determinism", sym_ok and det_ok,
                           f"max |lam(+1)-lam(-1)| FEM {diff.max():.1e}, closed form {cf_diff:.1e}, "
                           f"byte-identical {det_ok}",
                           {"fem_diff": diff, "closedform_diff": cf_diff, "identical": det_ok})


def riesz_negative_control(factor: float) -> CriterionResult:
    """Criterion 6 checks on the B_4 spectrum scaled by `factor`; expected to fail for large factors."""
    area = 16 * math.pi
    lam = cf.disk_spectrum(4.0, 1.0, 40).eigenvalues * factor
    rep = riesz.verify_spectrum(lam, 1.0, area, 30)
    return CriterionResult(6, f"Riesz means on B_4 scaled by {factor:g}", rep.riesz_ok and rep.avg_ok,
                           f"R1 ok {rep.riesz_ok}, averages ok {rep.avg_ok}",
                           {"factor": factor, "riesz_ok": rep.riesz_ok, "avg_ok": rep.avg_ok})


CRITERIA = {1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5,
            6: criterion_6, 7: criterion_7, 8: criterion_8, 9: criterion_9, 10: criterion_10,
            11: criterion_11}
# closed-form-only subset for quick runs
FAST = (1, 3, 6, 7, 9)


def run(numbers=None, fast: bool = False) -> list[CriterionResult]:
    if numbers is None:
        numbers = FAST if fast else tuple(CRITERIA)
    out = []
    for n in numbers:
        if fast and n == 10:
            out.append(criterion_10(use_fem=False))
        else:
            out.append(CRITERIA[n]())
    return out
