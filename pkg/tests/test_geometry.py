import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from magspec import geometry as geo


def test_disk_summary():
    s = geo.summarize(geo.disk(2.0))
    assert_allclose([s.area, s.perimeter, s.circumradius, s.inradius, s.rolling_radius],
                    [4 * math.pi, 4 * math.pi, 2, 2, 2])
    assert s.simply_connected


def test_rectangle_summary():
    s = geo.summarize(geo.rectangle(2.0, 1.0))
    assert_allclose([s.area, s.width, s.circumradius, s.inradius],
                    [2.0, 1.0, math.sqrt(5) / 2, 0.5])
    assert s.rolling_radius == 0.0


def test_annulus_summary():
    s = geo.summarize(geo.annulus(1.0, 2.0))
    assert_allclose([s.area, s.inradius, s.circumradius, s.rolling_radius],
                    [3 * math.pi, 0.5, 2.0, 0.5])
    assert not s.simply_connected


@pytest.mark.parametrize("spec, point, inside", [
    (geo.disk(1.0), (0, 0), True),
    (geo.disk(1.0), (2, 0), False),
    (geo.disk(1.0), (1, 0), False),
    (geo.annulus(1.0, 2.0), (0, 0), False),
    (geo.annulus(1.0, 2.0), (1.5, 0), True),
    (geo.rectangle(2.0, 1.0), (0.9, 0.4), True),
    (geo.ellipse(1.0, 0.5), (0.0, 0.6), False),
])
def test_contains(spec, point, inside):
    assert geo.contains(spec, point) is inside


def test_tube_area_circle():
    c = geo.CurveSpec("circle", {"R": math.sqrt(2)})
    s = geo.summarize(geo.tube_domain(c, 0.1))
    assert_allclose(s.area, 2 * math.pi * math.sqrt(2) * 0.1 - math.pi * 0.01, rtol=1e-12)


def test_tube_area_ellipse_against_offset_polygon():
    # oracle: shoelace area of the finely sampled outer curve minus the inner parallel curve
    c = geo.CurveSpec("ellipse", {"a": 1.0, "b": 0.5})
    h = 0.05
    t = np.linspace(0, 2 * np.pi, 200001)[:-1]
    outer = c.point(t)
    inner = outer - h * c.outward_normal(t)
    area = geo.signed_area(outer) - geo.signed_area(inner)
    s = geo.summarize(geo.tube_domain(c, h))
    assert abs(s.area - area) < 1e-6


def test_tube_too_wide():
    c = geo.CurveSpec("ellipse", {"a": 1.0, "b": 0.5})
    # minimal curvature radius b^2/a = 0.25
    with pytest.raises(geo.CurvatureError):
        geo.tube_domain(c, 0.3)


@pytest.mark.parametrize("R", [1.0, math.sqrt(2)])
def test_circle_invariants(R):
    L, S = geo.curve_invariants(geo.CurveSpec("circle", {"R": R}))
    assert_allclose([L, S], [2 * math.pi * R, math.pi * R * R], rtol=1e-12)


def test_ellipse_invariants():
    from scipy.special import ellipe

    L, S = geo.curve_invariants(geo.CurveSpec("ellipse", {"a": 1.0, "b": 0.5}))
    # complete elliptic integral oracle: L = 4 a E(1 - b^2/a^2)
    assert_allclose(L, 4 * ellipe(1 - 0.25), rtol=1e-12)
    assert abs(L - 4.8442) < 1e-4
    assert_allclose(S, math.pi / 2, rtol=1e-12)


@pytest.mark.parametrize("bad", [
    lambda: geo.disk(-1.0),
    lambda: geo.annulus(2.0, 1.0),
    lambda: geo.rectangle(0.0, 1.0),
    lambda: geo.polygon([[0, 0], [1, 1], [1, 0], [0, 1]]),
    lambda: geo.polygon([[0, 0], [0, 1], [1, 0]]),
    lambda: geo.DomainSpec("hexagon", {}),
])
def test_invalid_specs(bad):
    with pytest.raises(geo.GeometryError):
        bad()


def test_polygon_summary_square():
    s = geo.summarize(geo.polygon([[0, 0], [1, 0], [1, 1], [0, 1]]))
    assert_allclose([s.area, s.perimeter, s.width, s.diameter], [1, 4, 1, math.sqrt(2)])
    assert_allclose(s.circumradius, math.sqrt(2) / 2)
    assert abs(s.inradius - 0.5) <= s.inradius_uncertainty + 1e-12
    assert s.rolling_radius == 0.0


def test_roundtrip_dict():
    c = geo.CurveSpec("ellipse", {"a": 1.0, "b": 0.5})
    spec = geo.tube_domain(c, 0.1)
    back = geo.DomainSpec.from_dict(spec.to_dict())
    assert back.label() == spec.label()


def test_subgraph_and_strip_flags():
    assert geo.rectangle(2, 1).is_subgraph
    assert not geo.disk(1).is_subgraph
    assert geo.polygon([[0, 0], [1, 0], [0, 1]], is_subgraph=True).is_subgraph


def _specs():
    pos = st.floats(0.2, 5.0)
    return st.one_of(
        pos.map(geo.disk),
        st.tuples(pos, pos).map(lambda t: geo.rectangle(*t)),
        st.tuples(pos, st.floats(0.1, 0.9)).map(lambda t: geo.annulus(t[0] * t[1], t[0])),
        st.tuples(pos, pos).map(lambda t: geo.ellipse(*t)),
    )


@settings(deadline=None, max_examples=40)
@given(_specs(), st.floats(0.1, 10.0))
def test_scaling(spec, alpha):
    s, t = geo.summarize(spec), geo.summarize(geo.scale(spec, alpha))
    assert_allclose(t.area, alpha ** 2 * s.area, rtol=1e-9)
    for name in ("perimeter", "circumradius", "inradius", "width", "diameter", "rolling_radius"):
        assert_allclose(getattr(t, name), alpha * getattr(s, name), rtol=1e-9)


@settings(deadline=None, max_examples=40)
@given(_specs())
def test_isoperimetric_and_ordering(spec):
    s = geo.summarize(spec)
    excess = s.perimeter ** 2 - 4 * math.pi * s.area
    if spec.kind == "disk":
        assert abs(excess) <= 1e-9 * s.perimeter ** 2
    else:
        assert excess >= -1e-9 * s.perimeter ** 2
    assert s.inradius <= s.circumradius + 1e-12
    assert s.area <= math.pi * s.circumradius ** 2 * (1 + 1e-12)
    assert s.rolling_radius <= s.inradius + 1e-12


@settings(deadline=None, max_examples=30)
@given(st.floats(0.3, 3.0), st.floats(0.001, 0.99))
def test_tube_area_circle_property(R, frac):
    h = frac * R
    s = geo.summarize(geo.tube_domain(geo.CurveSpec("circle", {"R": R}), h))
    L = 2 * math.pi * R
    assert_allclose(s.area, L * h - math.pi * h * h, rtol=1e-9, atol=1e-12)
