import math

import numpy as np
import pytest

from dcpm.mesh import validate_topology
from dcpm.models import (CSV_HEADER, convergence_study, dual_distance_kappa,
                         embed_triangle, gen_octagon_genus2,
                         geodesic_midpoint, hyperbolic_distance,
                         minkowski_dot, octagon_fixture, refine_midpoint,
                         rows_to_csv, true_angle_sum_defect)

# frozen oracle values for the regular pi/4-cornered hyperbolic octagon
SPOKE_LEN = 2.44845244767807579    # arccosh(cot^2(pi/8))
SIDE_LEN = 3.0571418389619963      # 2*asinh(sin(pi/8)*sinh(spoke))


# -- hyperboloid helpers -------------------------------------------------------

def test_minkowski_basics():
    o = np.array([0.0, 0.0, 1.0])
    assert minkowski_dot(o, o) == -1.0
    assert hyperbolic_distance(o, o) == 0.0


def test_distance_along_geodesic():
    t = 1.3
    p = np.array([0.0, 0.0, 1.0])
    q = np.array([math.sinh(t), 0.0, math.cosh(t)])
    assert hyperbolic_distance(p, q) == pytest.approx(t, rel=1e-14)
    mid = geodesic_midpoint(p, q)
    assert hyperbolic_distance(p, mid) == pytest.approx(t / 2, rel=1e-12)
    assert hyperbolic_distance(mid, q) == pytest.approx(t / 2, rel=1e-12)
    assert minkowski_dot(mid, mid) == pytest.approx(-1.0, rel=1e-14)


def test_embed_triangle_side_lengths():
    rng = np.random.default_rng(0)
    for _ in range(50):
        a, b, c = np.exp(rng.uniform(-1, 1, 3))
        try:
            pts = embed_triangle(a, b, c)
        except ValueError:
            continue
        assert hyperbolic_distance(pts[0], pts[1]) == pytest.approx(a, rel=1e-12)
        assert hyperbolic_distance(pts[0], pts[2]) == pytest.approx(b, rel=1e-12)
        assert hyperbolic_distance(pts[1], pts[2]) == pytest.approx(c, rel=1e-12)


def test_embed_triangle_rejects_infeasible():
    with pytest.raises(ValueError):
        embed_triangle(3.0, 0.5, 0.5)


# -- octagon fixture -----------------------------------------------------------

def test_octagon_lengths():
    m = gen_octagon_genus2()
    np.testing.assert_allclose(m.lengths[:8], SPOKE_LEN, rtol=1e-15)
    np.testing.assert_allclose(m.lengths[8:], SIDE_LEN, rtol=1e-15)


def test_octagon_is_honest_hyperbolic(octagon_levels):
    for m in octagon_levels:
        assert true_angle_sum_defect(m) <= 1e-12


def test_refinement_counts(octagon_levels):
    for m0, m1 in zip(octagon_levels, octagon_levels[1:]):
        V, E, F = (m0.mesh.vertex_count, m0.mesh.edge_count,
                   m0.mesh.face_count)
        assert m1.mesh.vertex_count == V + E
        assert m1.mesh.edge_count == 2 * E + 3 * F
        assert m1.mesh.face_count == 4 * F
        report = validate_topology(m1.mesh)
        assert report.violations == []
        assert report.genus == 2


def test_refinement_halves_max_length(octagon_levels):
    for m0, m1 in zip(octagon_levels, octagon_levels[1:]):
        assert m1.lengths.max() <= 0.5 * m0.lengths.max() + 1e-15
        # halves of old edges are exactly half length
        assert m1.lengths[0] == m0.lengths[0] / 2.0


def test_refinement_is_simplicial_from_level2(octagon_levels):
    assert not validate_topology(octagon_levels[1].mesh).is_simplicial
    assert validate_topology(octagon_levels[2].mesh).is_simplicial


def test_octagon_fixture_matches_levels(octagon_levels):
    m = octagon_fixture(2)
    assert m.level == 2
    assert np.array_equal(m.mesh.edges, octagon_levels[2].mesh.edges)
    np.testing.assert_array_equal(m.lengths, octagon_levels[2].lengths)


# -- curvature families --------------------------------------------------------

def test_dual_distance_kappa(octagon1):
    kappa = dual_distance_kappa(octagon1.mesh, 0.3)
    assert kappa.shape == (octagon1.mesh.face_count,)
    assert (kappa < 0).all()
    assert kappa.min() == -1.0
    assert kappa.max() == pytest.approx(-0.7)
    with pytest.raises(ValueError):
        dual_distance_kappa(octagon1.mesh, 1.0)


# -- convergence study ---------------------------------------------------------

def test_convergence_study_levels():
    rows = convergence_study(3)
    assert [r.level for r in rows] == [0, 1, 2]
    assert all(r.converged for r in rows)
    assert all(r.residual <= 1e-10 for r in rows)
    # mesh size halves each level, discretization error shrinks with it
    assert rows[1].max_len == pytest.approx(rows[0].max_len / 2, rel=1e-12)
    assert rows[2].error_inf < rows[1].error_inf < rows[0].error_inf


def test_convergence_study_non_reference_kappa():
    rows = convergence_study(2, kappa_value=-1.5)
    assert all(math.isnan(r.error_inf) for r in rows)
    assert all(r.converged for r in rows)


def test_rows_to_csv_shape():
    rows = convergence_study(2)
    text = rows_to_csv(rows)
    lines = text.strip().split("\n")
    assert lines[0] == CSV_HEADER
    assert len(lines) == 3
    assert lines[1].startswith("0,")
    # deterministic output: rerunning gives the identical file
    assert rows_to_csv(convergence_study(2)) == text


def test_convergence_study_rejects_bad_levels():
    with pytest.raises(ValueError):
        convergence_study(0)
