"""magspec command-line driver.

Exit codes: 0 success, 1 invalid input or failed acceptance, 2 solver failure, 3 I/O error.

Domains are given inline as JSON ({"kind": ..., "params": {...}, "flags": {...}}),
as a path to such a JSON file, or in shorthand:
    disk:R=1   rectangle:w=2,h=1   annulus:r_in=1,r_out=2   ellipse:a=1,b=0.5
    tube:curve=ellipse,a=1,b=0.5,h=0.1   tube:curve=circle,R=1.4142,h=0.1
"""
from __future__ import annotations

import argparse
import contextlib
import csv
import hashlib
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import __version__
from . import acceptance
from . import bounds as bd
from . import closedform as cf
from . import geometry as geo
from .eigensolve import (DEFAULT_SEED, DEFAULT_TOL, fem_spectrum, neumann_lambda2,
                         write_spectrum_csv)
from .fem import SolverError, solve_torsion
from .mesh import MeshError, generate

EXIT_OK, EXIT_INPUT, EXIT_SOLVER, EXIT_IO = 0, 1, 2, 3


class InputError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    domain: Optional[dict] = None
    beta: float = 1.0
    h: float = 0.05
    k: int = 10
    tol: float = DEFAULT_TOL
    seed: int = DEFAULT_SEED
    out: Optional[str] = None
    options: dict = field(default_factory=dict)

    def validate(self) -> None:
        if not math.isfinite(self.beta):
            raise InputError("beta must be finite")
        if not (self.h > 0 and math.isfinite(self.h)):
            raise InputError("--h must be > 0")
        if self.k < 1:
            raise InputError("--k must be >= 1")
        if not self.tol > 0:
            raise InputError("--tol must be > 0")

    def digest(self) -> str:
        # the output location does not affect results
        d = {k: v for k, v in asdict(self).items() if k != "out"}
        blob = json.dumps(d, sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def header(self) -> list[str]:
        return [f"magspec {__version__}", f"config {self.digest()}"]


# --- parsing helpers -------------------------------------------------------------

def _num(s: str) -> float:
    try:
        return float(s)
    except ValueError as exc:
        raise InputError(f"not a number: {s!r}") from exc


def parse_domain(text: str) -> geo.DomainSpec:
    text = text.strip()
    if text.startswith("{"):
        try:
            return geo.DomainSpec.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise InputError(f"bad domain JSON: {exc}") from exc
    if os.path.isfile(text):
        with open(text) as fh:
            return geo.DomainSpec.from_dict(json.load(fh))
    kind, _, rest = text.partition(":")
    kv = {}
    for item in filter(None, rest.split(",")):
        key, eq, val = item.partition("=")
        if not eq:
            raise InputError(f"expected key=value in domain shorthand, got {item!r}")
        kv[key.strip()] = val.strip()
    if kind == "tube":
        ckind = kv.pop("curve", "ellipse")
        h = _num(kv.pop("h", "nan"))
        curve = geo.CurveSpec(ckind, {k: _num(v) for k, v in kv.items()})
        return geo.tube_domain(curve, h)
    return geo.DomainSpec(kind, {k: _num(v) for k, v in kv.items()})


def parse_grid(text: str) -> np.ndarray:
    """'a:b:n' for n points from a to b, or a comma list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise InputError("grid must be start:stop:count")
        a, b, n = _num(parts[0]), _num(parts[1]), int(_num(parts[2]))
        grid = np.linspace(a, b, n)
    else:
        grid = np.array([_num(v) for v in text.split(",") if v.strip()])
    if grid.size == 0:
        raise InputError("empty grid")
    if np.any(grid <= 0):
        raise InputError("grid values must be > 0")
    return grid


def _write_json(path: Optional[str], payload: dict) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True, default=_json_default) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _json_default(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    raise TypeError(f"not JSON serializable: {type(x)}")


def _csv_out(path: Optional[str], header: list[str], columns: list[str], rows) -> None:
    fh = sys.stdout if path is None else open(path, "w", newline="")
    try:
        for line in header:
            fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        w.writerows(rows)
    finally:
        if path is not None:
            fh.close()


def load_constants(path: Optional[str]) -> bd.BoundConstants:
    if path is None:
        return bd.DEFAULT_CONSTANTS
    with open(path) as fh:
        data = json.load(fh)
    try:
        return bd.BoundConstants.from_dict(data)
    except (TypeError, ValueError) as exc:
        raise InputError(f"bad constants file: {exc}") from exc


# --- commands -------------------------------------------------------------------

def cmd_spectrum(cfg: RunConfig) -> int:
    spec = geo.DomainSpec.from_dict(cfg.domain)
    if cfg.options.get("method") == "closedform":
        if spec.kind != "disk":
            raise InputError("closed-form spectra exist for disks only")
        s = cf.disk_spectrum(spec.params["R"], cfg.beta, cfg.k)
    else:
        s = fem_spectrum(spec, cfg.beta, cfg.h, cfg.k, tol=cfg.tol, seed=cfg.seed)
    if cfg.out is None:
        _csv_out(None, cfg.header(), ["index", "lambda", "residual", "method", "beta",
                                      "domain_id", "h"], s.rows())
        return EXIT_OK
    write_spectrum_csv(s, cfg.out, cfg.header())
    _write_json(cfg.out + ".json", {"version": __version__, "config_hash": cfg.digest(),
                                    "config": asdict(cfg), "domain": spec.label(),
                                    "n_eigenvalues": len(s), "method": s.method})
    return EXIT_OK


def cmd_disk_branches(cfg: RunConfig) -> int:
    grid = parse_grid(cfg.options["R_grid"])
    n_max = int(cfg.options.get("n_max", 10))
    rows = []
    if cfg.options.get("circle"):
        for R in grid:
            L, S = 2 * math.pi * R, math.pi * R * R
            rows.append([repr(float(R)), repr(cf.curve_lambda1(L, S, cfg.beta))])
        _csv_out(cfg.out, cfg.header(), ["R", "lambda1_circle"], rows)
        return EXIT_OK
    lam_max = cfg.options.get("lam_max")
    for R in grid:
        for n in range(0, n_max + 1):
            p = first_branch_point(n, cfg.beta, float(R), lam_max)
            if p is not None:
                rows.append([n, repr(float(R)), repr(p.lam), repr(p.residual)])
    _csv_out(cfg.out, cfg.header(), ["n", "R", "lambda1_n", "residual"], rows)
    return EXIT_OK


def first_branch_point(n: int, beta: float, R: float, lam_max: Optional[float] = None):
    """Lowest eigenvalue of branch n; the cap doubles from 2|beta| unless given."""
    if lam_max is not None:
        pts = cf.disk_branch_eigens(n, beta, R, float(lam_max))
        return min(pts, key=lambda q: q.lam) if pts else None
    cap = max(2 * abs(beta), 1.0)
    for _ in range(40):
        pts = cf.disk_branch_eigens(n, beta, R, cap)
        if pts:
            return min(pts, key=lambda q: q.lam)
        cap *= 2
    raise cf.BranchError(f"no eigenvalue on branch {n} at R={R}")


def domain_bounds(spec: geo.DomainSpec, beta: float, h: float, constants: bd.BoundConstants,
                  tol: float = DEFAULT_TOL, seed: int = DEFAULT_SEED) -> dict:
    """FEM lambda_1 and every bound with hypothesis gates and verdicts."""
    beta_abs = abs(beta)
    mesh = generate(spec, h)
    s = fem_spectrum(spec, beta, h, 1, tol=tol, seed=seed, mesh=mesh)
    summ = geo.summarize(spec)
    sc = spec.simply_connected
    tors = solve_torsion(mesh, beta_abs)
    items = [bd.ub_universal(beta_abs), bd.ub_circumradius(summ.circumradius, beta_abs),
             bd.ub_width(summ.width, beta_abs),
             bd.ub_simply_connected_area(summ.area, beta_abs, sc), bd.ub_fh2(summ.area, beta_abs, sc)]
    items += bd.ub_variable(beta_abs, tors.phi_star, summ.area, beta_abs, sc)
    items.append(bd.ub_variable_integral(mesh, beta_abs, tors))
    items.append(bd.ub_theta0_class(spec, beta_abs))
    lam_tile = spec.flags.get("self_tiling_Lambda", constants.Lambda)
    if lam_tile is not None:
        items.append(bd.ub_selftiling(lam_tile, beta_abs))
    lam2N = None
    if sc:
        lam2N = neumann_lambda2(mesh, tol=tol, seed=seed)
        items.append(bd.lb_kovarik(summ.area, summ.inradius, lam2N, beta_abs, sc))
    if spec.kind == "disk":
        R = spec.params["R"]
        items.append(bd.lb_star(R, R, R, beta_abs, constants))
    delta = summ.rolling_radius or 0.0
    notes = []
    if delta > 0:
        # the covering lemma needs eps <= delta; eps = delta/2 keeps grid points available
        try:
            _, K = bd.eps_net(spec, delta / 2, grid=81)
        except geo.GeometryError as exc:
            K = None
            notes.append(f"rolling-radius bound skipped: {exc}")
        M = constants.M if constants.M is not None else K
        if M is not None:
            src = "M user supplied" if constants.M is not None else f"M from eps-net: {K}"
            items.append(bd.with_messages(bd.lb_rolling(delta, beta_abs, constants, M=M), src))
    verdicts = [bd.check(b, s).to_json() for b in items]
    out = {"domain": spec.label(), "beta": beta, "h": h, "lambda1": float(s.eigenvalues[0]),
           "residual": float(s.residuals[0]), "bounds": verdicts, "notes": notes}
    if lam2N is not None:
        chen = bd.lb_chenli(summ.inradius, summ.circumradius, constants) \
            if spec.kind in ("disk", "rectangle", "ellipse") else None
        out["neumann_lambda2"] = lam2N
        if chen is not None:
            out["neumann_bounds"] = [bd.check(chen, lam2N).to_json()]
    return out


def cmd_bounds(cfg: RunConfig) -> int:
    spec = geo.DomainSpec.from_dict(cfg.domain)
    constants = load_constants(cfg.options.get("constants_file"))
    report = domain_bounds(spec, cfg.beta, cfg.h, constants, cfg.tol, cfg.seed)
    report.update({"version": __version__, "config_hash": cfg.digest()})
    _write_json(cfg.out, report)
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    fast = bool(cfg.options.get("fast"))
    results = acceptance.run(fast=fast)
    factor = cfg.options.get("perturb")
    if factor is not None:
        results.append(acceptance.riesz_negative_control(float(factor)))
    for r in results:
        print(r.line())
    payload = {"version": __version__, "config_hash": cfg.digest(), "fast": fast,
               "results": [r.to_json() for r in results]}
    if cfg.out:
        _write_json(cfg.out, payload)
    return EXIT_OK if all(r.passed for r in results) else EXIT_INPUT


def cmd_theta0(cfg: RunConfig) -> int:
    r = cf.theta0(float(cfg.options.get("theta_tol", 1e-5)))
    _write_json(cfg.out, {"theta0": r.theta0, "xi0": r.xi0, "T": r.T, "N": r.N, "tol": r.tol,
                          "version": __version__, "config_hash": cfg.digest()})
    return EXIT_OK


def cmd_sweep(cfg: RunConfig) -> int:
    rows = []
    curves = [("ellipse", geo.CurveSpec("ellipse", {"a": 1.0, "b": 0.5})),
              ("circle", geo.CurveSpec("circle", {"R": math.sqrt(2.0)}))]
    widths = [float(v) for v in cfg.options.get("widths", acceptance.TUBE_HALF_WIDTHS)]
    for name, curve in curves:
        L, S = geo.curve_invariants(curve)
        lam_g = cf.curve_lambda1(L, S, cfg.beta)
        for hw in widths:
            spec = geo.tube_domain(curve, hw)
            s = fem_spectrum(spec, cfg.beta, hw / acceptance.TUBE_MESH_DIV, 1, cfg.tol, cfg.seed)
            lb = bd.tube_lb(lam_g, abs(cfg.beta), hw, S)
            rows.append([name, repr(hw), repr(float(s.eigenvalues[0])), repr(lam_g),
                         repr(lb.value), repr(float(s.residuals[0]))])
    _csv_out(cfg.out, cfg.header(),
             ["curve", "half_width", "lambda1", "curve_lambda1", "tube_lb", "residual"], rows)
    return EXIT_OK


def cmd_figure(cfg: RunConfig) -> int:
    if cfg.options.get("figure") != "dvsn":
        raise InputError("only the 'dvsn' figure is available")
    grid = parse_grid(cfg.options["R_grid"])
    rows = []
    for R in grid:
        d = cf.dirichlet_disk_lambda1(float(R), cfg.beta)
        nm = float(cf.disk_spectrum(float(R), cfg.beta, 1).eigenvalues[0])
        rows.append([repr(float(R)), repr(d), repr(nm)])
    _csv_out(cfg.out, cfg.header(), ["R", "dirichlet", "neumann"], rows)
    return EXIT_OK


COMMANDS = {"spectrum": cmd_spectrum, "disk-branches": cmd_disk_branches, "bounds": cmd_bounds,
            "verify": cmd_verify, "theta0": cmd_theta0, "sweep": cmd_sweep, "figure": cmd_figure}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--beta", type=float, default=1.0, help="field strength (default 1)")
    common.add_argument("--h", type=float, default=0.05, help="target mesh size (default 0.05)")
    common.add_argument("--k", type=int, default=10, help="number of eigenvalues (default 10)")
    common.add_argument("--tol", type=float, default=DEFAULT_TOL, help="residual tolerance")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED, help="Krylov start-vector seed")
    common.add_argument("--out", default=None, help="output path (default stdout)")

    p = argparse.ArgumentParser(prog="magspec", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"magspec {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("spectrum", parents=[common], help="smallest eigenvalues of a domain")
    sp.add_argument("--domain", required=True)
    sp.add_argument("--method", choices=("fem", "closedform"), default="fem")

    sp = sub.add_parser("disk-branches", parents=[common], help="disk branch data over an R grid")
    sp.add_argument("--R-grid", dest="R_grid", required=True, help="start:stop:count or list")
    sp.add_argument("--n-max", dest="n_max", type=int, default=10)
    sp.add_argument("--lam-max", dest="lam_max", type=float, default=None)
    sp.add_argument("--circle", action="store_true", help="first eigenvalue on circles instead")

    sp = sub.add_parser("bounds", parents=[common], help="bound report with verdicts")
    sp.add_argument("--domain", required=True)
    sp.add_argument("--constants-file", dest="constants_file", default=None)

    sp = sub.add_parser("verify", parents=[common], help="run the acceptance suite")
    sp.add_argument("--fast", action="store_true", help="closed-form criteria only")
    sp.add_argument("--perturb", type=float, default=None,
                    help="negative control: scale the B_4 spectrum by this factor")

    sp = sub.add_parser("theta0", parents=[common], help="de Gennes constant")
    sp.add_argument("--theta-tol", dest="theta_tol", type=float, default=1e-5)

    sp = sub.add_parser("sweep", parents=[common], help="tube half-width sweep")
    sp.add_argument("--widths", type=lambda t: [float(v) for v in t.split(",")], default=None)

    sp = sub.add_parser("figure", parents=[common], help="figure data series")
    sp.add_argument("figure", choices=("dvsn",))
    sp.add_argument("--R-grid", dest="R_grid", default="0.5,1,2,4")
    return p


def config_from_args(args: argparse.Namespace) -> RunConfig:
    base = {"command", "domain", "beta", "h", "k", "tol", "seed", "out"}
    opts = {k: v for k, v in vars(args).items() if k not in base and v is not None}
    domain = getattr(args, "domain", None)
    dom = parse_domain(domain).to_dict() if domain is not None else None
    if args.command == "disk-branches" and opts.get("lam_max") is None:
        opts.pop("lam_max", None)
    cfg = RunConfig(args.command, dom, args.beta, args.h, args.k, args.tol, args.seed, args.out, opts)
    cfg.validate()
    return cfg


def _thread_limit():
    n = os.environ.get("MAGSPEC_THREADS")
    if not n:
        return contextlib.nullcontext()
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=int(n))


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        cfg = config_from_args(args)
        with _thread_limit():
            return COMMANDS[cfg.command](cfg)
    except (SolverError, cf.BranchError, ArithmeticError) as exc:
        print(f"magspec: solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"magspec: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (InputError, geo.GeometryError, MeshError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"magspec: invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
