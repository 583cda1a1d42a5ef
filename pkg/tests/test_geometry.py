"""Geometry: membership, certified distances, sampling, exhaustion, geodesics."""

import heapq
import math

import numpy as np
import pytest

from bbmlab import (
    Ball,
    Box,
    Cusp,
    ExhaustionLevel,
    GeometryError,
    Interval,
    Polygon,
    RandomStream,
    domain_from_spec,
    exhaustion_subdomain,
    geodesic_distance,
)
from bbmlab.geometry import (
    DegenerateDomainError,
    DimensionMismatchError,
    EmptySubdomainError,
    GeodesicUnsupportedError,
    OutsideDomainError,
)

DISK = Ball((0.0, 0.0), 1.0)
SQUARE = Box((0.0, 0.0), (1.0, 1.0))
TRIANGLE = Polygon([(0, 0), (1, 0), (0, 1)])
LSHAPE = Polygon([(0, 0), (1, 0), (1, 0.5), (0.5, 0.5), (0.5, 1), (0, 1)])
CUSP = Cusp(2.0)
ALL_SHAPES = [DISK, SQUARE, TRIANGLE, LSHAPE, CUSP, Interval(0.0, 1.0),
              Ball((0.5, -1.0, 2.0), 0.75), Box((0, 0, 0), (1, 2, 0.5))]


def boundary_cloud(dom, count=200_000):
    """Dense boundary sampling oracle for distances."""
    rng = np.random.default_rng(123)
    if isinstance(dom, Polygon):
        verts = dom.vertices
        nxt = np.roll(verts, -1, axis=0)
        lengths = np.linalg.norm(nxt - verts, axis=1)
        weights = lengths / lengths.sum()
        edge = rng.choice(len(verts), size=count, p=weights)
        t = rng.random(count)[:, None]
        return verts[edge] + t * (nxt[edge] - verts[edge])
    if isinstance(dom, Cusp):
        t = rng.random(count // 2) ** 2  # denser near the tip
        sign = rng.choice([-1.0, 1.0], size=count // 2)
        curve = np.stack([t, sign * t**dom.gamma], axis=1)
        y = rng.uniform(-1, 1, count - count // 2)
        wall = np.stack([np.ones_like(y), y], axis=1)
        return np.concatenate([curve, wall])
    raise NotImplementedError


class TestContains:
    def test_ball_center_and_boundary(self):
        assert DISK.contains(np.array([0.0, 0.0]))
        assert not DISK.contains(np.array([1.0, 0.0]))  # open set

    def test_cusp_interior_point(self):
        assert CUSP.contains(np.array([0.5, 0.2]))  # 0.2 < 0.5**2 == 0.25
        assert not CUSP.contains(np.array([0.5, 0.25]))
        assert not CUSP.contains(np.array([0.0, 0.0]))

    def test_square_open(self):
        assert SQUARE.contains(np.array([0.5, 0.5]))
        assert not SQUARE.contains(np.array([0.0, 0.5]))

    def test_polygon_boundary_points_excluded(self):
        assert not TRIANGLE.contains(np.array([0.0, 0.0]))  # vertex
        assert not TRIANGLE.contains(np.array([0.5, 0.0]))  # edge midpoint
        assert TRIANGLE.contains(np.array([0.2, 0.2]))

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            DISK.contains(np.array([0.1, 0.1, 0.1]))


class TestBoundaryDistance:
    def test_disk_center(self):
        assert DISK.boundary_distance(np.array([0.0, 0.0])) == pytest.approx(1.0)

    def test_square_point(self):
        d = SQUARE.boundary_distance(np.array([0.3, 0.5]))
        assert d == pytest.approx(0.3, abs=1e-15)

    def test_triangle_point_vs_boundary_oracle(self):
        # Nearest boundary of this triangle at (0.25, 0.25) is the bottom or
        # left edge at 0.25 (the hypotenuse sits farther, at 0.5/sqrt(2)).
        x = np.array([0.25, 0.25])
        d = TRIANGLE.boundary_distance(x)
        cloud = boundary_cloud(TRIANGLE)
        oracle = np.linalg.norm(cloud - x, axis=1).min()
        assert d == pytest.approx(0.25, abs=1e-12)
        assert d <= oracle + 1e-12
        assert d == pytest.approx(oracle, abs=2e-3)
        hyp = abs(x[0] + x[1] - 1) / math.sqrt(2)
        assert hyp == pytest.approx(0.5 / math.sqrt(2))
        assert d < hyp

    def test_cusp_distance_vs_boundary_oracle(self):
        pts = CUSP.sample(64, RandomStream(5))
        d = CUSP.boundary_distance(pts)
        cloud = boundary_cloud(CUSP, 400_000)
        for k in range(len(pts)):
            oracle = np.linalg.norm(cloud - pts[k], axis=1).min()
            assert d[k] <= oracle + 1e-9  # certified: never above the true value
            assert d[k] == pytest.approx(oracle, rel=0.02, abs=2e-4)

    def test_rejects_exterior_points(self):
        with pytest.raises(OutsideDomainError):
            DISK.boundary_distance(np.array([2.0, 0.0]))

    @pytest.mark.parametrize("dom", ALL_SHAPES, ids=lambda d: d.kind + str(d.dim))
    def test_lipschitz_property(self, dom):
        xs = dom.sample(20_000, RandomStream(17))
        ys = dom.sample(20_000, RandomStream(18))
        dx = dom.boundary_distance(xs)
        dy = dom.boundary_distance(ys)
        gap = np.abs(dx - dy) - np.linalg.norm(xs - ys, axis=1)
        assert np.max(gap) <= 1e-9

    @pytest.mark.parametrize("dom", ALL_SHAPES, ids=lambda d: d.kind + str(d.dim))
    @pytest.mark.parametrize("tau", [0.5, 0.9])
    def test_interior_ball_property(self, dom, tau):
        g = RandomStream(29).generator()
        xs = dom.sample(2000, g)
        radii = tau * dom.boundary_distance(xs)
        sigma = g.standard_normal((2000, 8, dom.dim))
        sigma /= np.linalg.norm(sigma, axis=2, keepdims=True)
        r = radii[:, None] * g.random((2000, 8)) ** (1.0 / dom.dim)
        pts = xs[:, None, :] + r[..., None] * sigma
        assert np.all(dom.contains(pts.reshape(-1, dom.dim)))


class TestSampling:
    def test_containment(self):
        pts = SQUARE.sample(5000, RandomStream(1))
        assert np.all(SQUARE.contains(pts))

    def test_disk_mean_within_3_sigma(self):
        # per-coordinate variance of the uniform disk is 1/4
        pts = DISK.sample(10**6, RandomStream(2))
        assert np.all(np.abs(pts.mean(axis=0)) <= 3 * 0.5 / 1000.0)

    def test_determinism(self):
        a = DISK.sample(4096, RandomStream(77))
        b = DISK.sample(4096, RandomStream(77))
        assert np.array_equal(a, b)

    def test_degenerate_domain_error(self):
        with pytest.raises(DegenerateDomainError):
            Cusp(1e5).sample(16, RandomStream(3))


class TestExhaustion:
    def test_disk_level_set(self):
        view = exhaustion_subdomain(DISK, ExhaustionLevel(1, 0.5))
        assert view.measure == pytest.approx(math.pi * 0.25)
        inner = Ball((0.0, 0.0), 0.5)
        pts = DISK.sample(20_000, RandomStream(4))
        assert np.array_equal(view.contains(pts), inner.contains(pts))

    def test_square_inset(self):
        view = exhaustion_subdomain(SQUARE, ExhaustionLevel(2, 0.25))
        assert view.measure == pytest.approx(0.25)
        assert view.contains(np.array([0.5, 0.5]))
        assert not view.contains(np.array([0.2, 0.5]))

    def test_view_reports_parent_distance(self):
        view = exhaustion_subdomain(DISK, ExhaustionLevel(1, 0.5))
        assert view.boundary_distance(np.array([0.0, 0.0])) == pytest.approx(1.0)

    def test_empty_subdomain(self):
        with pytest.raises(EmptySubdomainError):
            exhaustion_subdomain(TRIANGLE, ExhaustionLevel(1, 0.9))

    def test_monotone_nesting(self):
        inner = exhaustion_subdomain(SQUARE, ExhaustionLevel(1, 0.3))
        outer = exhaustion_subdomain(SQUARE, ExhaustionLevel(2, 0.1))
        pts = SQUARE.sample(20_000, RandomStream(6))
        inside_inner = inner.contains(pts)
        assert np.all(outer.contains(pts)[inside_inner])

    def test_polygon_view_measure_certified(self):
        view = exhaustion_subdomain(TRIANGLE, ExhaustionLevel(1, 0.1))
        # inset of a triangle is a similar triangle: scale = 1 - alpha/r
        r = (2 - math.sqrt(2)) / 2
        expect = 0.5 * (1 - 0.1 / r) ** 2
        assert view.measure_stderr > 0
        assert view.measure == pytest.approx(expect, abs=5 * view.measure_stderr + 1e-3)

    def test_level_validation(self):
        with pytest.raises(GeometryError):
            ExhaustionLevel(0, 0.1)
        with pytest.raises(GeometryError):
            ExhaustionLevel(1, -0.5)


def grid_dijkstra(dom, start, goal, n=241):
    """Dense-grid shortest path oracle (8-neighbour graph)."""
    lo, hi = dom.bounding_box
    axes = [np.linspace(lo[k], hi[k], n) for k in range(2)]
    xs, ys = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([xs.ravel(), ys.ravel()], axis=1)
    inside = dom.contains(pts).reshape(n, n)
    h = (hi - lo) / (n - 1)

    def node(p):
        idx = np.round((p - lo) / h).astype(int)
        return int(idx[0]), int(idx[1])

    s, t = node(np.asarray(start)), node(np.asarray(goal))
    dist = {s: 0.0}
    heap = [(0.0, s)]
    moves = [(i, j) for i in (-1, 0, 1) for j in (-1, 0, 1) if (i, j) != (0, 0)]
    while heap:
        d, u = heapq.heappop(heap)
        if u == t:
            return d
        if d > dist.get(u, math.inf):
            continue
        for di, dj in moves:
            v = (u[0] + di, u[1] + dj)
            if not (0 <= v[0] < n and 0 <= v[1] < n) or not inside[v]:
                continue
            nd = d + math.hypot(di * h[0], dj * h[1])
            if nd < dist.get(v, math.inf):
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return math.inf


class TestGeodesics:
    def test_disk_is_euclidean(self):
        d = geodesic_distance(DISK, np.array([-0.5, 0.0]), np.array([0.5, 0.0]))
        assert d == pytest.approx(1.0, abs=1e-15)

    def test_lshape_visible_pair(self):
        d = geodesic_distance(LSHAPE, np.array([0.9, 0.25]), np.array([0.9, 0.45]))
        assert d == pytest.approx(0.2, abs=1e-15)

    def test_lshape_corner_pair(self):
        # the segment grazes the reflex corner: path length equals
        # |x-c| + |c-y| with c = (0.5, 0.5)
        d = geodesic_distance(LSHAPE, np.array([0.75, 0.25]), np.array([0.25, 0.75]))
        assert d == pytest.approx(2 * math.sqrt(0.125), abs=1e-12)

    def test_lshape_detour_vs_grid_oracle(self):
        x, y = np.array([0.9, 0.3]), np.array([0.3, 0.9])
        d = geodesic_distance(LSHAPE, x, y)
        expect = math.hypot(0.4, 0.2) + math.hypot(0.2, 0.4)
        assert d == pytest.approx(expect, abs=1e-12)
        oracle = grid_dijkstra(LSHAPE, x, y)
        # the 8-neighbour grid overestimates by up to ~8 percent
        assert d <= oracle + 1e-9
        assert d == pytest.approx(oracle, rel=0.09)

    def test_geodesic_euclidean_identity_in_cone(self):
        # pairs with |x - y| < tau d(x) are always connected by a segment
        g = RandomStream(31).generator()
        for dom in (DISK, LSHAPE, SQUARE):
            xs = dom.sample(2000, g)
            radii = 0.7 * dom.boundary_distance(xs)
            sigma = g.standard_normal((2000, 2))
            sigma /= np.linalg.norm(sigma, axis=1, keepdims=True)
            ys = xs + radii[:, None] * g.random((2000, 1)) * sigma
            d = dom.geodesic_distances(xs, ys)
            assert np.max(np.abs(d - np.linalg.norm(xs - ys, axis=1))) <= 1e-12

    def test_geodesic_dominates_euclidean(self):
        xs = LSHAPE.sample(3000, RandomStream(8))
        ys = LSHAPE.sample(3000, RandomStream(9))
        d = LSHAPE.geodesic_distances(xs, ys)
        assert np.all(d >= np.linalg.norm(xs - ys, axis=1) - 1e-12)

    def test_convex_equality(self):
        xs = SQUARE.sample(1000, RandomStream(10))
        ys = SQUARE.sample(1000, RandomStream(11))
        assert np.array_equal(
            SQUARE.geodesic_distances(xs, ys), np.linalg.norm(xs - ys, axis=1)
        )

    def test_cusp_unsupported(self):
        with pytest.raises(GeodesicUnsupportedError):
            geodesic_distance(CUSP, np.array([0.5, 0.0]), np.array([0.7, 0.0]))


class TestPolygonValidation:
    def test_clockwise_rejected(self):
        with pytest.raises(GeometryError):
            Polygon([(0, 0), (0, 1), (1, 0)])

    def test_self_intersection_rejected(self):
        with pytest.raises(GeometryError):
            Polygon([(0, 0), (1, 1), (1, 0), (0, 1)])

    def test_repeated_vertices_rejected(self):
        with pytest.raises(GeometryError):
            Polygon([(0, 0), (0, 0), (1, 0), (0, 1)])

    def test_zero_area_rejected(self):
        with pytest.raises(GeometryError):
            Polygon([(0, 0), (0.5, 0.5), (1, 1)])


class TestDomainSpecs:
    def test_round_trip_kinds(self):
        specs = [
            {"kind": "interval", "corners": [0.0, 2.0]},
            {"kind": "box", "corners": [[0, 0], [1, 2]]},
            {"kind": "ball", "center": [0, 0, 0], "radius": 1.5},
            {"kind": "polygon", "vertices": [[0, 0], [1, 0], [0, 1]]},
            {"kind": "cusp", "gamma": 3.0},
        ]
        for spec in specs:
            dom = domain_from_spec(spec)
            assert dom.kind == spec["kind"]
            assert dom.measure > 0

    def test_unknown_field_rejected(self):
        with pytest.raises(GeometryError):
            domain_from_spec({"kind": "ball", "radius": 1.0, "colour": "red"})

    def test_unknown_kind_rejected(self):
        with pytest.raises(GeometryError):
            domain_from_spec({"kind": "torus"})

    def test_cusp_measure_closed_form(self):
        assert Cusp(3.0).measure == pytest.approx(0.5)
        assert Cusp(2.0).measure == pytest.approx(2.0 / 3.0)
