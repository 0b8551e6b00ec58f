import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from magspec import geometry as geo
from magspec import mesh as msh

ELLIPSE_CURVE = geo.CurveSpec("ellipse", {"a": 1.0, "b": 0.5})

CASES = [
    (geo.disk(1.0), 0.1, 1),
    (geo.rectangle(2.0, 1.0), 0.25, 1),
    (geo.annulus(1.0, 2.0), 0.1, 2),
    (geo.ellipse(1.0, 0.5), 0.1, 1),
    (geo.tube_domain(ELLIPSE_CURVE, 0.1), 0.05, 2),
    (geo.polygon([[0, 0], [2, 0], [2, 1], [1, 2], [0, 1]]), 0.2, 1),
]


@pytest.mark.parametrize("spec, h, loops", CASES, ids=lambda v: getattr(v, "kind", None))
def test_generate_invariants(spec, h, loops):
    m = msh.generate(spec, h)
    assert np.all(m.areas() > 0)
    assert m.triangles.min() >= 0 and m.triangles.max() < len(m.nodes)
    assert m.n_loops == loops
    assert msh.euler_characteristic(m) == (1 if loops == 1 else 0)
    assert m.h_max <= 1.5 * h
    assert msh.quality(m).min_angle >= msh.MIN_ANGLE_DEG
    # every edge shared by at most two triangles
    e = np.sort(np.concatenate([m.triangles[:, [0, 1]], m.triangles[:, [1, 2]],
                                m.triangles[:, [2, 0]]]), axis=1)
    _, counts = np.unique(e, axis=0, return_counts=True)
    assert counts.max() <= 2


def test_disk_area_and_boundary():
    m = msh.generate(geo.disk(1.0), 0.1)
    assert abs(m.areas().sum() - math.pi) < 0.02
    r = np.hypot(*m.nodes[m.boundary_nodes].T)
    assert_allclose(r, 1.0, atol=1e-12)


def test_ellipse_boundary_on_curve():
    m = msh.generate(geo.ellipse(1.0, 0.5), 0.1)
    x, y = m.nodes[m.boundary_nodes].T
    assert_allclose(x ** 2 + (y / 0.5) ** 2, 1.0, atol=1e-12)


def test_rectangle_area_exact():
    m = msh.generate(geo.rectangle(2.0, 1.0), 0.25)
    assert_allclose(m.areas().sum(), 2.0, rtol=1e-14)


def test_square_min_angle():
    assert_allclose(msh.quality(msh.generate(geo.rectangle(1.0, 1.0), 0.1)).min_angle, 45.0)


def test_quality_flags_degenerate():
    nodes = np.array([[0, 0], [1, 0], [0.5, 1e-6], [0, 1]], dtype=float)
    tris = np.array([[0, 1, 2], [0, 2, 3]])
    m = msh.TriangleMesh(nodes, tris, np.array([[0, 1], [1, 2], [2, 3], [3, 0]]),
                         np.zeros(4, dtype=int), 1.0)
    q = msh.quality(m)
    assert q.min_angle < 1e-3 and not q.acceptable


def test_refine_counts_and_loops():
    m = msh.generate(geo.annulus(1.0, 2.0), 0.2)
    r = msh.refine(m)
    assert len(r.triangles) == 4 * len(m.triangles)
    assert r.n_loops == m.n_loops
    assert msh.euler_characteristic(r) == 0
    rad = np.hypot(*r.nodes[r.boundary_nodes].T)
    assert np.all(np.isclose(rad, 1.0, atol=1e-12) | np.isclose(rad, 2.0, atol=1e-12))


def test_refine_area_rate():
    # P1 area deficit on the disk is O(h^2): two refinements shrink it ~16x
    m = msh.generate(geo.disk(1.0), 0.2)
    e0 = abs(m.areas().sum() - math.pi)
    e2 = abs(msh.refine(msh.refine(m)).areas().sum() - math.pi)
    assert 14.0 < e0 / e2 < 18.0


def test_resolution_error():
    with pytest.raises(msh.ResolutionError):
        msh.generate(geo.tube_domain(ELLIPSE_CURVE, 0.1), 0.5)


@pytest.mark.parametrize("h", [0.0, -1.0, float("nan")])
def test_bad_h(h):
    with pytest.raises(msh.MeshError):
        msh.generate(geo.disk(1.0), h)


def test_mesh_roundtrip(tmp_path):
    m = msh.generate(geo.ellipse(1.0, 0.5), 0.15)
    p = tmp_path / "m.txt"
    msh.write_mesh(m, p)
    back = msh.read_mesh(p)
    assert np.array_equal(back.nodes, m.nodes)
    assert np.array_equal(back.triangles, m.triangles)
    assert np.array_equal(back.boundary_edges, m.boundary_edges)
    assert np.array_equal(back.boundary_loop, m.boundary_loop)
    q = tmp_path / "m2.txt"
    msh.write_mesh(back, q)
    assert p.read_bytes() == q.read_bytes()


def test_generate_deterministic():
    a = msh.generate(geo.polygon([[0, 0], [2, 0], [2, 1], [1, 2], [0, 1]]), 0.2)
    b = msh.generate(geo.polygon([[0, 0], [2, 0], [2, 1], [1, 2], [0, 1]]), 0.2)
    assert np.array_equal(a.nodes, b.nodes) and np.array_equal(a.triangles, b.triangles)


@settings(deadline=None, max_examples=15)
@given(st.floats(0.3, 3.0), st.floats(0.05, 0.3))
def test_disk_mesh_property(R, frac):
    m = msh.generate(geo.disk(R), frac * R)
    assert msh.euler_characteristic(m) == 1
    assert m.h_max <= 1.5 * frac * R
    assert m.areas().sum() <= math.pi * R * R
    assert_allclose(np.hypot(*m.nodes[m.boundary_nodes].T), R, atol=1e-12 * R)


@settings(deadline=None, max_examples=15)
@given(st.floats(0.5, 3.0), st.floats(0.2, 3.0), st.floats(0.05, 0.2))
def test_rectangle_mesh_property(w, hgt, frac):
    h = frac * min(w, hgt)
    m = msh.generate(geo.rectangle(w, hgt), h)
    assert_allclose(m.areas().sum(), w * hgt, rtol=1e-12)
    assert msh.quality(m).acceptable
