import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose
from scipy.special import jnp_zeros

from magspec import bounds as bd
from magspec import geometry as geo
from magspec import mesh as msh
from magspec.closedform import disk_spectrum
from magspec.eigensolve import Spectrum, fem_spectrum
from magspec.fem import solve_torsion

THETA0 = 0.590106
J11P = float(jnp_zeros(1, 1)[0])


@pytest.fixture(scope="module")
def square_lam1():
    return float(fem_spectrum(geo.rectangle(1.0, 1.0), 1.0, 0.05, 1).eigenvalues[0])


# --- upper bounds -------------------------------------------------------------

@pytest.mark.parametrize("R, beta, expected", [(0.5, 4.0, 2.0), (1.0, 4.0, 3.5), (0.1, 1.0, 0.005)])
def test_circumradius(R, beta, expected):
    b = bd.ub_circumradius(R, beta)
    assert_allclose(b.value, expected, rtol=1e-14)
    assert b.side == "upper" and not b.strict


def test_circumradius_regimes_agree_at_boundary():
    beta = 4.0
    R = 1 / math.sqrt(beta)
    below = bd.ub_circumradius(R * (1 - 1e-9), beta).value
    above = bd.ub_circumradius(R * (1 + 1e-9), beta).value
    assert_allclose([below, above], 2.0, rtol=1e-7)
    assert_allclose(beta - 1 / (2 * R * R), R * R * beta * beta / 2, rtol=1e-14)


def test_universal():
    b = bd.ub_universal(1.0)
    assert b.value == 1.0 and b.strict
    z = bd.ub_universal(0.0)
    assert z.value == 0.0 and not z.strict


def test_theta0_class_cases():
    r = bd.ub_theta0_class(geo.rectangle(2.0, 1.0), 3.0)
    assert r.hypotheses_ok and r.strict
    assert_allclose(r.value, 3.0 * THETA0, rtol=1e-5)
    d = bd.ub_theta0_class(geo.disk(1.0), 1.0)
    assert not d.hypotheses_ok
    p = bd.ub_theta0_class(geo.polygon([[0, 0], [1, 0], [1, 1], [0, 1]], is_subgraph=True), 1.0)
    assert p.hypotheses_ok and abs(p.value - THETA0) < 5e-4


def test_theta0_strip_condition():
    tri = [[0, 0], [1, 0], [0.5, 2]]
    need = 2 * math.sqrt(bd.theta0_value())      # strip height needed at beta = 1
    ok = bd.ub_theta0_class(geo.polygon(tri, strip_height=need * 1.01), 1.0)
    bad = bd.ub_theta0_class(geo.polygon(tri, strip_height=need * 0.99), 1.0)
    assert ok.hypotheses_ok and not bad.hypotheses_ok
    assert_allclose(-2 * bd.xi0_value(), need, rtol=1e-4)


def test_selftiling():
    assert abs(bd.ub_selftiling(bd.theta0_value(), 2.0).value - 1.18021) < 1e-3
    assert bd.ub_selftiling(0.5, 1.0).value == 0.5
    with pytest.raises(ValueError):
        bd.ub_selftiling(0.6, 1.0)
    with pytest.raises(ValueError):
        bd.BoundConstants(Lambda=0.7)


def test_width():
    assert_allclose(bd.ub_width(0.1, 1.0).value, 0.0025)
    assert bd.ub_width(0.0, 3.0).value == 0.0


def test_thin_rectangle_below_width_bound():
    lam = fem_spectrum(geo.rectangle(4.0, 0.1), 1.0, 0.02, 1)
    assert bd.check(bd.ub_width(0.1, 1.0), lam).status == "pass"


def test_area_bounds():
    assert_allclose(bd.ub_simply_connected_area(2 * math.pi, 1.0).value, 1 - math.exp(-1))
    assert_allclose(bd.ub_fh2(8 * math.pi, 1.0).value, 1.0)
    assert_allclose(bd.ub_fh2(math.pi, 2.0).value, 0.5)
    assert bd.ub_fh2(0.0, 2.0).value == 0.0
    assert bd.ub_simply_connected_area(0.0, 2.0).value == 0.0
    assert not bd.ub_fh2(1.0, 1.0, simply_connected=False).hypotheses_ok
    assert not bd.ub_simply_connected_area(1.0, 1.0, simply_connected=False).hypotheses_ok


@settings(deadline=None, max_examples=60)
@given(st.floats(1e-3, 100.0), st.floats(1e-3, 20.0))
def test_area_exponential_below_beta(area, beta):
    v = bd.ub_simply_connected_area(area, beta).value
    assert v <= beta
    # 1 - exp(-x) rounds to 1 once exp(-x) < eps/2
    if beta * area / (2 * math.pi) < 30:
        assert v < beta


def test_variable_constant_field_on_disk():
    beta = 1.3
    items = bd.ub_variable(beta, beta / 4, area=math.pi)
    assert items[0].strict and items[0].value == beta
    assert_allclose(items[1].value, beta * (1 - math.exp(-beta / 2)), rtol=1e-14)
    assert_allclose(items[1].value, bd.ub_simply_connected_area(math.pi, beta).value, rtol=1e-14)
    assert_allclose(items[2].value, items[1].value, rtol=1e-14)
    assert all(b.value == 0.0 for b in bd.ub_variable(0.0, 0.0, area=1.0))


def test_variable_negative_field_gate():
    items = bd.ub_variable(1.0, 0.2, beta_min=-0.5)
    assert items[0].hypotheses_ok and not items[1].hypotheses_ok


def test_variable_bounds_on_square(square_lam1):
    m = msh.generate(geo.rectangle(1.0, 1.0), 0.05)
    phi = solve_torsion(m, 1.0)
    for b in bd.ub_variable(1.0, phi.phi_star, area=1.0):
        assert b.value >= square_lam1
    integral = bd.ub_variable_integral(m, 1.0, phi)
    assert integral.value >= square_lam1
    # integral form is the sharpest of the family
    assert integral.value <= bd.ub_variable(1.0, phi.phi_star)[1].value + 1e-12


def test_curve_quarter_and_tube():
    assert bd.curve_ub_quarter(4.0).value == 1.0
    assert_allclose(bd.tube_lb(0.25, 1.0, 0.1).value, 0.15)
    assert bd.tube_lb(0.0, 1.0, 0.3).value == 0.0
    flagged = bd.tube_lb(0.0, 1.0, 0.1, enclosed_area=2 * math.pi)
    assert not flagged.hypotheses_ok
    assert any("threshold" in m for m in bd.tube_lb(0.25, 1.0, 0.1).messages)


# --- lower bounds ---------------------------------------------------------------

def test_kovarik_square(square_lam1):
    b = bd.lb_kovarik(1.0, 0.5, math.pi ** 2, 1.0)
    assert abs(b.value - 0.00815) < 1e-5
    assert b.value <= square_lam1


def test_kovarik_regimes():
    area, rho, lam2 = 1.0, 0.5, math.pi ** 2
    beta = 1 / rho ** 2
    at = bd.lb_kovarik(area, rho, lam2, beta).value
    pre = math.pi / (4 * area)
    v1 = pre * beta ** 2 * rho ** 4 * lam2 / (beta ** 2 * rho ** 2 + 6 * lam2)
    v2 = pre * beta * rho ** 2 * lam2 / (beta + 24 * lam2)
    assert_allclose(at, max(v1, v2), rtol=1e-14)
    assert_allclose(bd.lb_kovarik(area, rho, lam2, beta * (1 - 1e-9)).value, v1, rtol=1e-8)
    assert_allclose(bd.lb_kovarik(area, rho, lam2, beta * (1 + 1e-9)).value, v2, rtol=1e-8)
    assert not bd.lb_kovarik(area, rho, lam2, 1.0, simply_connected=False).hypotheses_ok


def test_kovarik_quadratic_small_beta():
    area, rho, lam2 = 2.0, 0.5, 2.4
    for beta in (1e-3, 1e-4):
        v = bd.lb_kovarik(area, rho, lam2, beta).value
        assert_allclose(v, math.pi / (4 * area) * rho ** 4 * beta ** 2 / 6, rtol=1e-5)


def test_chenli():
    c = bd.BoundConstants()
    assert bd.lb_chenli(1.0, 1.0, c).value == c.C1
    assert_allclose(bd.lb_chenli(1.0, 2.0, c).value, c.C1 / 16)
    b = bd.lb_chenli(1.0, 1.0)
    assert b.conditional
    assert bd.check(b, J11P ** 2).status == "conditional"
    assert b.value <= J11P ** 2
    with pytest.raises(ValueError):
        bd.lb_chenli(2.0, 1.0)


def test_star_boundary_reports_larger_regime():
    c = bd.DEFAULT_CONSTANTS.c_value
    assert_allclose(c, 1 / (96 * bd.GAMMA_UNIT_DISK))
    b = bd.lb_star(1.0, 1.0, 1.0, 1.0)
    # both regimes hold at beta = rho^-2: c (first) and c/2 (second); the larger is kept
    assert_allclose(b.value, c, rtol=1e-14)
    assert b.conditional
    assert bd.lb_star(1.0, 1.0, 1.0, 1e-4).value == pytest.approx(c * 1e-8, rel=1e-12)


def test_star_on_disk_below_closed_form():
    lam = disk_spectrum(1.0, 1.0, 1).eigenvalues[0]
    assert bd.lb_star(1.0, 1.0, 1.0, 1.0).value <= lam


def test_rolling():
    c = bd.BoundConstants(M=4)
    C = c.C_value()
    assert_allclose(C, c.c_value * 2 ** -14 / 4)
    delta = 0.5
    beta = 1 / delta ** 2
    assert_allclose(bd.lb_rolling(delta, beta, c).value, C * beta, rtol=1e-14)
    assert bd.lb_rolling(0.0, 3.0, c).value == 0.0
    ann = bd.lb_rolling(0.5, 1.0, c)
    assert_allclose(ann.value, C / 4)
    assert ann.conditional
    with pytest.raises(ValueError):
        bd.lb_rolling(0.5, 1.0)


def test_rolling_annulus_below_fem():
    lam = fem_spectrum(geo.annulus(1.0, 2.0), 1.0, 0.1, 1).eigenvalues[0]
    _, K = bd.eps_net(geo.annulus(1.0, 2.0), 0.25, grid=81)
    assert bd.lb_rolling(0.5, 1.0, M=K).value <= lam


def test_constants_validation():
    with pytest.raises(ValueError):
        bd.BoundConstants(C1=-1.0)
    with pytest.raises(ValueError):
        bd.BoundConstants.from_dict({"C1": 1.0, "bogus": 2})
    assert bd.BoundConstants.from_dict({"C1": 2.0, "C1_known": True}).known


def test_covering():
    assert bd.lb_covering([0.5, 0.7], 2).value == 0.25
    assert bd.lb_covering([0.42], 1).value == 0.42
    # a strip of 2k+1 unit squares: the bound does not see k
    vals = {bd.lb_covering([0.3] * (2 * k + 1), 2).value for k in range(1, 6)}
    assert len(vals) == 1
    with pytest.raises(ValueError):
        bd.lb_covering([], 1)
    with pytest.raises(ValueError):
        bd.lb_covering([0.1], 0)


def test_tiling_piece_below_whole():
    beta = 2.0
    whole = fem_spectrum(geo.rectangle(1.0, 1.0), beta, 0.05, 1).eigenvalues[0]
    piece = fem_spectrum(geo.rectangle(0.5, 0.5), beta, 0.025, 1).eigenvalues[0]
    # the same piece through homothety: lambda(Omega/2, beta) = 4 lambda(Omega, beta/4)
    scaled = 4 * fem_spectrum(geo.rectangle(1.0, 1.0), beta / 4, 0.05, 1).eigenvalues[0]
    assert_allclose(piece, scaled, rtol=1e-9)
    assert piece <= whole
    assert bd.check(bd.lb_covering([piece] * 4, 1), whole).status == "pass"


# --- eps nets -----------------------------------------------------------------

@pytest.mark.parametrize("spec, eps", [(geo.disk(1.0), 0.5), (geo.rectangle(10.0, 1.0), 0.5),
                                       (geo.annulus(1.0, 2.0), 0.2), (geo.ellipse(1.0, 0.5), 0.2)])
def test_eps_net_properties(spec, eps):
    pts, K = bd.eps_net(spec, eps, grid=81)
    assert K >= 1 and len(pts) >= 1
    d = geo.boundary_distance(spec, pts)
    assert np.all(d >= eps - 1e-9)
    if len(pts) > 1:
        diff = pts[:, None] - pts[None]
        dist = np.hypot(diff[..., 0], diff[..., 1]) + np.eye(len(pts)) * 1e9
        assert dist.min() >= eps - 1e-9


def test_eps_net_strip():
    pts, K = bd.eps_net(geo.rectangle(10.0, 1.0), 0.5)
    assert np.ptp(pts[:, 1]) == 0.0
    assert K <= 4


def test_eps_net_disk():
    pts, K = bd.eps_net(geo.disk(1.0), 0.5)
    # only the closed centre disk of radius 1/2 is admissible; four points fit on its rim
    assert 1 <= len(pts) <= 4 and K == len(pts)


def test_eps_net_count_scaling():
    counts = [len(bd.eps_net(geo.disk(1.0), e, grid=161)[0]) * e * e for e in (0.2, 0.1, 0.05)]
    assert max(counts) / min(counts) < 1.5


def test_eps_net_too_large():
    with pytest.raises(geo.GeometryError):
        bd.eps_net(geo.disk(1.0), 1.5)


# --- scale map and verdicts -------------------------------------------------------------

def test_scale_map():
    assert bd.scale_map(0.7, 1.0, 1.3) == (0.7, 1.3)
    assert bd.scale_map(1.0, 2.0, 1.0) == (0.25, 4.0)


@pytest.mark.parametrize("alpha", [0.5, 2.0])
def test_scale_map_on_disk(alpha):
    R, beta = 1.2, 0.9
    lam = disk_spectrum(R, alpha ** 2 * beta, 4).eigenvalues
    mapped, beta_omega = bd.scale_map(lam, alpha, beta)
    assert beta_omega == alpha ** 2 * beta
    assert_allclose(disk_spectrum(alpha * R, beta, 4).eigenvalues, mapped, rtol=1e-8)


def test_check_policy():
    s = Spectrum(np.array([0.4]), np.array([1e-10]), 1.0)
    assert bd.check(bd.ub_universal(1.0), s).status == "pass"
    assert bd.check(bd.ub_universal(1.0), 1.2).status == "fail"
    assert bd.check(bd.ub_universal(1.0), 1.0).status == "fail"
    assert bd.check(bd.ub_fh2(1.0, 1.0, simply_connected=False), s).status == "inapplicable"
    assert bd.check(bd.lb_star(1.0, 1.0, 1.0, 1.0), s).status == "conditional"
    v = bd.check(bd.ub_fh2(8 * math.pi, 1.0), 1.0 + 1e-12, residual=1e-10)
    assert v.status == "pass" and v.margin < 0


def test_bound_validation():
    with pytest.raises(ValueError):
        bd.Bound("x", "sideways", 1.0)
    with pytest.raises(ValueError):
        bd.Bound("x", "lower", -1.0)
    with pytest.raises(ValueError):
        bd.Bound("x", "upper", float("nan"))
    j = bd.ub_universal(2.0).to_json()
    assert set(j) >= {"theorem", "side", "value", "strict", "hypotheses_ok", "messages",
                      "constants_used"}


# --- sandwich on closed-form disks -------------------------------------------------------

@settings(deadline=None, max_examples=25)
@given(st.floats(0.3, 3.0), st.floats(0.1, 4.0))
def test_disk_sandwich_property(R, beta):
    lam = float(disk_spectrum(R, beta, 1).eigenvalues[0])
    area = math.pi * R * R
    uppers = [bd.ub_universal(beta), bd.ub_circumradius(R, beta), bd.ub_width(2 * R, beta),
              bd.ub_simply_connected_area(area, beta), bd.ub_fh2(area, beta)]
    uppers += bd.ub_variable(beta, beta * R * R / 4, area=area)
    for b in uppers:
        assert bd.check(b, lam, residual=1e-10).status == "pass", b.theorem
    low = bd.lb_kovarik(area, R, (J11P / R) ** 2, beta)
    assert bd.check(low, lam, residual=1e-10).status == "pass"
