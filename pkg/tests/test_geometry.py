import math

import numpy as np
import pytest
from scipy.spatial import ConvexHull, HalfspaceIntersection

from sscgeo.datagen import gen_semi_random, make_rng, random_subspace
from sscgeo.errors import DimensionMismatch, EmptyExternalSet, TooFewPoints, UnboundedPolar
from sscgeo.geometry import (affinity, check_geometric_condition, circumradius_polar,
                             dual_directions, geodesic_distance, inradius, polar_vertices,
                             principal_angles, subspace_incoherence)
from sscgeo.solver import min_norm_dual_point


def grid_angle_oracle(U1, U2, steps=4000):
    """Principal angles of two planes by maximizing <y, z> over discretized unit circles."""
    t = np.linspace(0, 2 * np.pi, steps, endpoint=False)
    circle = np.stack([np.cos(t), np.sin(t)])
    Y, Z = U1 @ circle, U2 @ circle
    G = Y.T @ Z
    i, j = np.unravel_index(np.argmax(G), G.shape)
    first = math.acos(min(1.0, G[i, j]))
    y, z = Y[:, i], Z[:, j]
    # deflate: the second pair is orthogonal to the first within each plane
    y2 = U1 @ (np.array([[0, -1], [1, 0]]) @ (U1.T @ y))
    z2 = U2 @ (np.array([[0, -1], [1, 0]]) @ (U2.T @ z))
    second = math.acos(min(1.0, abs(y2 @ z2)))
    return np.array(sorted([first, second]))


def test_principal_angles_trivial():
    U = random_subspace(5, 2, make_rng(0))
    np.testing.assert_allclose(principal_angles(U, U), [0, 0], atol=1e-7)
    e = np.eye(3)
    np.testing.assert_allclose(principal_angles(e[:, :1], e[:, 1:2]), [math.pi / 2])
    with pytest.raises(DimensionMismatch):
        principal_angles(np.eye(3)[:, :1], np.eye(4)[:, :1])


@pytest.mark.parametrize("seed", range(5))
def test_principal_angles_grid_oracle(seed):
    rng = make_rng(seed)
    U1, U2 = random_subspace(4, 2, rng), random_subspace(4, 2, rng)
    oracle = grid_angle_oracle(U1, U2)
    ang = principal_angles(U1, U2)
    np.testing.assert_allclose(ang, oracle, atol=1e-3)
    assert geodesic_distance(U1, U2) == pytest.approx(np.linalg.norm(oracle), abs=1e-3)
    assert np.all(np.diff(ang) >= 0)


def test_affinity_shared_intersection():
    e = np.eye(8)
    for s in range(4):
        U1 = e[:, :3]
        U2 = np.concatenate([e[:, :s], e[:, 3:3 + 3 - s]], axis=1)
        assert affinity(U1, U2) == pytest.approx(math.sqrt(s), abs=1e-12)
    assert affinity(e[:, :3], e[:, :3]) == pytest.approx(math.sqrt(3))
    assert affinity(e[:, :3], e[:, 3:6]) == 0.0
    assert geodesic_distance(e[:, :1], e[:, 1:2]) == pytest.approx(math.pi / 2)


def qhull_inradius(A):
    """Smallest facet distance of conv(+-a_j) from qhull."""
    hull = ConvexHull(np.concatenate([A, -A], axis=1).T)
    return float(np.min(-hull.equations[:, -1]))


def qhull_polar_circumradius(A):
    d = A.shape[0]
    halfspaces = np.concatenate([np.hstack([A.T, -np.ones((A.shape[1], 1))]),
                                 np.hstack([-A.T, -np.ones((A.shape[1], 1))])])
    hs = HalfspaceIntersection(halfspaces, np.zeros(d))
    return float(np.max(np.linalg.norm(hs.intersections, axis=1)))


@pytest.mark.parametrize("d", [1, 2, 3])
def test_cross_polytope(d):
    A = np.eye(d)
    assert inradius(A, mode="exact") == pytest.approx(1 / math.sqrt(d), abs=1e-12)
    assert circumradius_polar(A) == pytest.approx(math.sqrt(d), abs=1e-12)


def test_cross_polytope_sampled():
    # every vertex of the polar cube is a corner of norm sqrt(d)
    assert circumradius_polar(np.eye(5), n_samples=5) == pytest.approx(math.sqrt(5), abs=1e-9)


def test_square_and_hexagon():
    assert inradius(np.eye(2)) == pytest.approx(1 / math.sqrt(2), abs=1e-12)
    ang = np.array([0, np.pi / 3, 2 * np.pi / 3])
    H = np.stack([np.cos(ang), np.sin(ang)])
    assert circumradius_polar(H) == pytest.approx(2 / math.sqrt(3), abs=1e-12)
    assert qhull_polar_circumradius(H) == pytest.approx(2 / math.sqrt(3), abs=1e-12)


@pytest.mark.parametrize("d", [2, 3])
@pytest.mark.parametrize("seed", range(5))
def test_inradius_matches_qhull(d, seed):
    rng = make_rng(seed, d)
    A = rng.standard_normal((d, 7))
    A /= np.linalg.norm(A, axis=0)
    r = inradius(A, mode="exact")
    assert r == pytest.approx(qhull_inradius(A), abs=1e-10)
    assert circumradius_polar(A) == pytest.approx(qhull_polar_circumradius(A), abs=1e-10)
    assert r * circumradius_polar(A) == pytest.approx(1.0, abs=1e-12)


def test_duplicate_columns_do_not_change_radius():
    rng = make_rng(3)
    A = rng.standard_normal((3, 6))
    R = circumradius_polar(A)
    assert circumradius_polar(np.concatenate([A, A[:, :2], -A[:, 3:4]], axis=1)) == pytest.approx(R)


def test_sampled_mode_is_lower_bound():
    rng = make_rng(4)
    A = rng.standard_normal((3, 8))
    A /= np.linalg.norm(A, axis=0)
    exact = circumradius_polar(A, mode="exact")
    sampled = circumradius_polar(A, mode="sampled", n_samples=100, rng=make_rng(5))
    assert sampled <= exact + 1e-8
    assert sampled >= 0.8 * exact


def test_unbounded_polar():
    with pytest.raises(UnboundedPolar):
        circumradius_polar(np.array([[1.0, 2.0], [0.0, 0.0]]))


def test_polar_vertices_satisfy_constraints():
    A = make_rng(6).standard_normal((3, 5))
    V = polar_vertices(A)
    assert np.max(np.abs(V @ A)) <= 1 + 1e-9


def test_dual_directions_one_dimensional():
    u = np.array([[0.0], [1.0], [0.0]])
    X = np.concatenate([u, -u, u], axis=1)
    dirs = dual_directions(X, u)
    np.testing.assert_allclose(np.abs(dirs.V), np.abs(np.repeat(u, 3, axis=1)), atol=1e-12)


def test_dual_direction_matches_solver_oracle():
    U = np.eye(4)[:, :2]
    pts = np.array([[1.0, 0.0], [0.0, 1.0], [1 / math.sqrt(2), 1 / math.sqrt(2)]]).T
    X = U @ pts
    dirs = dual_directions(X, U)
    lam = min_norm_dual_point(pts[:, 0], pts[:, 1:]).lambda_
    np.testing.assert_allclose(dirs.V[:, 0], U @ lam / np.linalg.norm(lam), atol=1e-10)


def test_dual_directions_rotation_equivariant():
    rng = make_rng(8)
    U = random_subspace(5, 3, rng)
    X = U @ rng.standard_normal((3, 7))
    X /= np.linalg.norm(X, axis=0)
    Q = np.linalg.qr(rng.standard_normal((5, 5)))[0]
    v1 = dual_directions(X, U).V
    v2 = dual_directions(Q @ X, Q @ U).V
    np.testing.assert_allclose(Q @ v1, v2, atol=1e-6)


def test_dual_directions_errors():
    U = np.eye(3)[:, :2]
    with pytest.raises(TooFewPoints):
        dual_directions(U[:, :1], U)
    with pytest.raises(ValueError):
        dual_directions(np.eye(3)[:, 1:], U)


def test_incoherence():
    U = np.eye(4)[:, :2]
    X = U @ np.array([[1.0, 0.0, 0.6], [0.0, 1.0, 0.8]])
    dirs = dual_directions(X, U)
    assert subspace_incoherence(dirs, np.eye(4)[:, 2:]) == 0.0
    assert subspace_incoherence(dirs, dirs.V[:, :1]) == pytest.approx(1.0)
    with pytest.raises(EmptyExternalSet):
        subspace_incoherence(dirs, np.zeros((4, 0)))


def test_incoherence_recomputation():
    rng = make_rng(9)
    bases = [random_subspace(6, 2, r) for r in rng.spawn(2)]
    ds = gen_semi_random(bases, [6, 6], rng)
    dirs = dual_directions(ds.X[:, ds.labels == 1], bases[0])
    ext = ds.X[:, ds.labels == 2]
    direct = max(abs(float(v @ x)) for v in dirs.V.T for x in ext.T)
    assert subspace_incoherence(dirs, ext) == pytest.approx(direct, abs=1e-15)


def test_condition_orthogonal_lines():
    e = np.eye(3)
    X = np.column_stack([e[:, 0], -e[:, 0], e[:, 0], e[:, 1], -e[:, 1], e[:, 1]])
    labels = np.array([1, 1, 1, 2, 2, 2])
    certs = check_geometric_condition(X, labels, [e[:, :1], e[:, 1:2]])
    for c in certs:
        assert c.mu == 0.0
        assert c.min_inradius == pytest.approx(1.0)
        assert c.verdict == "HOLDS"


def test_condition_duplicated_subspace_fails():
    rng = make_rng(10)
    U = random_subspace(5, 2, rng)
    ds = gen_semi_random([U, U], [6, 6], rng)
    certs = check_geometric_condition(ds.X, ds.labels, [U, U])
    assert all(c.verdict == "FAILS" for c in certs)
    assert max(c.mu for c in certs) > 0.9


def test_condition_high_dimension_is_maybe_or_fails():
    rng = make_rng(11)
    bases = [random_subspace(12, 4, r) for r in rng.spawn(2)]
    ds = gen_semi_random(bases, [12, 12], rng)
    certs = check_geometric_condition(ds.X, ds.labels, bases, n_samples=30)
    assert all(c.verdict in ("MAYBE", "FAILS") and not c.exact for c in certs)
