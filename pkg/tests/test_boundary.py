import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ccsmeasure import boundary as bd
from ccsmeasure import circle_measure as cm
from conftest import closed_strategy, random_closed_atomic

TWO_PI = 2 * math.pi


def brute_support(b, phi):
    v = b.vertices
    return (v[:, 0][None, :] * np.cos(phi)[:, None] + v[:, 1][None, :] * np.sin(phi)[:, None]).max(axis=1)


def brute_curve_distance(p, q):
    """Directed max-min distance from the vertices of p to the segments of q."""
    p = p[:, 0] + 1j * p[:, 1]
    q = q[:, 0] + 1j * q[:, 1]
    a, s = q[:-1], np.diff(q)
    t = np.clip(((p[:, None] - a[None]) * np.conj(s[None])).real / np.abs(s[None]) ** 2, 0, 1)
    return np.abs(p[:, None] - (a[None] + t * s[None])).min(axis=1).max()


# -- construction ----------------------------------------------------------

def test_square_from_polygon_measure():
    b = bd.boundary_from_measure(cm.regular_polygon(4))
    np.testing.assert_allclose(b.vertices, [[0, 0], [0.25, 0], [0.25, 0.25], [0, 0.25]], atol=1e-15)
    assert b.perimeter == pytest.approx(1.0)
    assert bd.area_shoelace(b) == pytest.approx(1 / 16, abs=1e-16)


def test_segment_is_two_sided():
    b = bd.boundary_from_measure(cm.segment())
    assert b.is_segment
    assert b.n_edges == 2
    assert b.perimeter == pytest.approx(1.0)
    np.testing.assert_allclose(b.vertices, [[0, 0], [0, 0.5]], atol=1e-15)
    assert bd.area_shoelace(b) == 0.0


def test_unclosed_measure_rejected():
    with pytest.raises(bd.NotClosedError):
        bd.boundary_from_measure(cm.dirac(1.0))


def test_non_convex_loop_rejected():
    with pytest.raises(bd.NonConvexError):
        bd.ConvexBoundary.from_vertices([[0, 0], [2, 0], [1, 0.2], [1, 1]])


def test_clockwise_loop_rejected():
    with pytest.raises(bd.NonConvexError):
        bd.ConvexBoundary.from_vertices([[0, 0], [0, 1], [1, 1], [1, 0]])


def test_uniform_boundary_area_converges():
    b = bd.boundary_from_measure(cm.uniform(), arc_subdiv=2048)
    assert bd.area_shoelace(b) == pytest.approx(1 / (4 * math.pi), abs=1e-6)
    # chords lie on the circle of radius 1/(2 pi) centred at i/(2 pi)
    r = np.abs(b.vertices[:, 0] + 1j * (b.vertices[:, 1] - 1 / TWO_PI))
    np.testing.assert_allclose(r, 1 / TWO_PI, atol=1e-12)


@given(closed_strategy(24))
@settings(max_examples=60)
def test_round_trip_is_exact(m):
    back = bd.measure_from_boundary(bd.boundary_from_measure(m))
    np.testing.assert_allclose(back.angles, m.angles, atol=1e-12)
    np.testing.assert_allclose(back.weights, m.weights, atol=1e-12)


@given(closed_strategy(24))
@settings(max_examples=60)
def test_edge_angles_nondecreasing(m):
    b = bd.boundary_from_measure(m)
    assert np.all(np.diff(b.edge_angles) >= 0)
    z = b.complex_vertices()
    assert abs(z[-1] + b.edges()[-1] - z[0]) < 1e-12


def test_mixed_measure_boundary_closes_and_has_unit_perimeter():
    b = bd.boundary_from_measure(cm.half_disc(256), arc_subdiv=8)
    assert b.perimeter == pytest.approx(1.0, abs=1e-12)
    assert np.all(np.diff(b.edge_angles) >= 0)


# -- curve points ----------------------------------------------------------

def test_extremal_points_on_square():
    m = cm.regular_polygon(4)
    pts = bd.extremal_points(m, [0.0, 1.0, math.pi / 2, TWO_PI])
    np.testing.assert_allclose(pts, [[0.25, 0], [0.25, 0], [0.25, 0.25], [0, 0]], atol=1e-15)


def test_curve_point_is_arc_length():
    m = cm.half_disc(512)
    t = np.linspace(0, 1, 20001)
    z = bd.curve_point_complex(m, t)
    steps = np.abs(np.diff(z))
    assert steps.max() <= (t[1] - t[0]) * (1 + 1e-9)
    assert abs(z[-1]) < 1e-12


def test_curvature_radius_examples():
    M = 64
    g = np.zeros(M)
    g[: M // 2] = 2 / M
    m = cm.from_grid(g)
    assert bd.curvature_radius(m, math.pi / 2) == pytest.approx(1 / math.pi)
    assert bd.curvature_radius(m, 3 * math.pi / 2) is bd.Curvature.FLAT
    assert bd.curvature_radius(cm.regular_polygon(3), 0.0) is bd.Curvature.CORNER


# -- areas -----------------------------------------------------------------

@given(closed_strategy(32))
@settings(max_examples=80)
def test_area_pairs_equals_shoelace(m):
    b = bd.boundary_from_measure(m)
    assert bd.area_pairs(m) == pytest.approx(bd.area_shoelace(b), abs=1e-12)
    assert bd.area_exact(m) == pytest.approx(bd.area_shoelace(b), abs=1e-12)


@given(closed_strategy(16))
@settings(max_examples=40)
def test_area_fourier_within_bound(m):
    value, bound = bd.area_fourier(cm.fourier(m, 128))
    assert abs(value - bd.area_pairs(m)) <= bound


def test_area_pairs_needs_atoms():
    with pytest.raises(TypeError):
        bd.area_pairs(cm.uniform(16))


def test_circle_constants():
    value, bound = bd.area_fourier(cm.fourier(cm.uniform(), 64))
    assert value == pytest.approx(1 / (4 * math.pi), abs=1e-12)
    assert bd.area_exact(cm.uniform()) == pytest.approx(1 / (4 * math.pi), abs=1e-12)


def test_isoperimetric_inequality_on_random_polygons():
    rng = np.random.default_rng(4)
    for _ in range(50):
        m = random_closed_atomic(rng, int(rng.integers(3, 30)))
        assert bd.area_pairs(m) <= 1 / (4 * math.pi)


# -- support function and Hausdorff distances ------------------------------

@given(closed_strategy(16))
@settings(max_examples=40)
def test_support_function_matches_brute_force(m):
    b = bd.boundary_from_measure(m)
    phi = np.linspace(0, TWO_PI, 257)
    np.testing.assert_allclose(bd.support_function(b, phi), brute_support(b, phi), atol=1e-14)


@given(closed_strategy(12), closed_strategy(12))
@settings(max_examples=40)
def test_hausdorff_matches_dense_support_sampling(m1, m2):
    b1, b2 = bd.boundary_from_measure(m1), bd.boundary_from_measure(m2)
    phi = np.linspace(0, TWO_PI, 100001)
    sampled = np.abs(brute_support(b1, phi) - brute_support(b2, phi)).max()
    d = bd.hausdorff(b1, b2)
    assert sampled <= d + 1e-14
    # each support function is 1/2-Lipschitz for perimeter-one bodies
    assert d <= sampled + 0.5 * (phi[1] - phi[0])


def test_hausdorff_of_translate_is_shift():
    b = bd.boundary_from_measure(random_closed_atomic(np.random.default_rng(2), 9))
    assert bd.hausdorff(b, b.translated([0.3, -0.4])) == pytest.approx(0.5, abs=1e-14)


def test_hausdorff_curves_point_vs_segment():
    L = 0.37
    assert bd.hausdorff_curves([[0, 0]], [[0, 0], [L, 0]]) == pytest.approx(L)


@pytest.mark.parametrize("seed", range(5))
def test_hausdorff_curves_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    p = np.cumsum(rng.normal(size=(300, 2)), axis=0)
    q = np.cumsum(rng.normal(size=(50, 2)), axis=0)
    ref = max(brute_curve_distance(p, q), brute_curve_distance(q, p))
    assert bd.hausdorff_curves(p, q) == pytest.approx(ref, abs=1e-12)


def test_hausdorff_curves_with_long_segments():
    rng = np.random.default_rng(9)
    q = np.vstack([[[-50, 0], [50, 0]], rng.normal(size=(40, 2))])
    p = rng.uniform(-60, 60, size=(500, 2))
    ref = max(brute_curve_distance(p, q), brute_curve_distance(q, p))
    assert bd.hausdorff_curves(p, q) == pytest.approx(ref, abs=1e-12)


def test_area_pairs_hand_values():
    assert bd.area_pairs(cm.regular_polygon(4)) == pytest.approx(1 / 16, abs=1e-16)
    assert bd.area_pairs(cm.regular_polygon(3)) == pytest.approx(math.sqrt(3) / 36, abs=1e-16)
    assert bd.area_pairs(cm.segment()) == pytest.approx(0.0, abs=1e-16)


def test_area_pairs_ties_carry_half_weight():
    # a rectangle rotated by 30 degrees; its diagonal terms do not cancel
    m = cm.rotate(cm.CircleMeasure.from_atoms(
        [0, math.pi / 2, math.pi, 3 * math.pi / 2], [0.3, 0.2, 0.3, 0.2]), math.pi / 6)
    assert bd.area_pairs(m) == pytest.approx(0.3 * 0.2, abs=1e-15)


@given(closed_strategy(20))
@settings(max_examples=40)
def test_height_rises_then_falls(m):
    y = bd.curve_point(m, np.linspace(0, m.total_mass, 2001))[:, 1]
    top = int(np.argmax(y))
    assert np.all(np.diff(y[: top + 1]) >= -1e-14)
    assert np.all(np.diff(y[top:]) <= 1e-14)
