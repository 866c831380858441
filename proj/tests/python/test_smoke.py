import numpy as np
import pytest
import shapely.geometry

import elastmatch as em


def star_polygon(rng, vertices=24):
    angles = np.sort(rng.uniform(0.0, 2.0 * np.pi, vertices))
    if np.min(np.diff(angles)) < 1e-3:
        angles = np.linspace(0.0, 2.0 * np.pi, vertices, endpoint=False)
    radii = rng.uniform(0.4, 1.0, vertices)
    center = rng.uniform(-0.2, 0.2, 2)
    return center + np.column_stack((radii * np.cos(angles), radii * np.sin(angles)))


def square(lo, hi):
    return np.array([[lo, lo], [hi, lo], [hi, hi], [lo, hi]], dtype=float)


def densified_square(lo, hi, n=8):
    side = np.linspace(lo, hi, n, endpoint=False)
    pts = [(s, lo) for s in side]
    pts += [(hi, s) for s in side]
    pts += [(hi + lo - s, hi) for s in side]
    pts += [(lo, hi + lo - s) for s in side]
    return np.array(pts)


def test_version_is_exposed():
    assert em.__version__.count(".") == 2


def test_symdiff_matches_shapely_on_random_polygons():
    rng = np.random.default_rng(7)
    for _ in range(20):
        a, b = star_polygon(rng), star_polygon(rng)
        got = em.symdiff_area(a, b)
        want = (
            shapely.geometry.Polygon(a)
            .symmetric_difference(shapely.geometry.Polygon(b))
            .area
        )
        assert got == pytest.approx(want, rel=1e-7, abs=1e-9)


def test_symdiff_of_offset_squares():
    assert em.symdiff_area(square(0, 2), square(1, 3)) == pytest.approx(6.0, abs=1e-7)
    assert em.symdiff_area(square(0, 2), square(0, 2)) == 0.0


def test_match_recovers_a_small_translation():
    source = densified_square(0.0, 1.0)
    target = source + np.array([0.06, 0.04])
    result = em.match(source, target)
    assert result.stop_reason == "converged"
    assert result.final_fraction < 0.01
    assert result.iterations[-1].force_norm < 1e-3
    assert result.iterations[-1].flipped == 0
    # the deformation tracks the translation at every boundary vertex
    assert np.allclose(result.displacement, [0.06, 0.04], atol=0.02)
    assert result.deformed == pytest.approx(source + result.displacement)


def test_nearest_point_match_runs():
    source = densified_square(0.0, 1.0)
    target = source + np.array([0.03, 0.0])
    result = em.nearest_point_match(source, target)
    assert result.final_fraction < 0.05
    assert len(result.iterations) >= 1


def test_match_exposes_mesh_and_interior():
    source = densified_square(0.0, 1.0)
    target = source + np.array([0.05, 0.02])
    r = em.match(source, target)
    n_boundary = len(source)
    n_interior = len(r.interior_nodes)
    assert r.mesh_nodes.shape[0] == n_boundary + n_interior
    assert r.interior_displacement.shape == (n_interior, 2)
    assert r.mesh_triangles.min() >= 0
    assert r.mesh_triangles.max() < r.mesh_nodes.shape[0]


def test_triangulate_preserves_boundary_and_area():
    poly = densified_square(0.0, 1.0)
    nodes, triangles, boundary = em.triangulate(poly, max_area=0.01)
    assert np.array_equal(nodes[: len(poly)], poly)
    assert boundary == list(range(len(poly)))
    tri_pts = nodes[triangles]
    double_areas = (tri_pts[:, 1, 0] - tri_pts[:, 0, 0]) * (
        tri_pts[:, 2, 1] - tri_pts[:, 0, 1]
    ) - (tri_pts[:, 2, 0] - tri_pts[:, 0, 0]) * (tri_pts[:, 1, 1] - tri_pts[:, 0, 1])
    assert np.all(double_areas > 0)
    assert double_areas.sum() / 2 == pytest.approx(1.0, rel=1e-12)


def test_shape_roundtrip(tmp_path):
    path = str(tmp_path / "ring.json")
    poly = densified_square(-0.5, 0.5)
    em.save_shape(path, poly)
    rings = em.load_shape(path)
    assert len(rings) == 1
    vertices, role = rings[0]
    assert role == "outer"
    assert np.array_equal(vertices, poly)


def test_invalid_inputs_raise():
    with pytest.raises(ValueError):
        em.symdiff_area(np.zeros((2, 2)), square(0, 1))
    bowtie = np.array([[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]])
    with pytest.raises(ValueError):
        em.match(bowtie, square(0, 1))
    with pytest.raises(em.IoError):
        em.load_shape("does_not_exist.json")
