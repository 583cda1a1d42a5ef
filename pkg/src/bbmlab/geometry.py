"""Bounded domains with certified boundary distance, sampling and geodesics.

Supported shapes: interval (n=1), axis-aligned box and ball (n up to 3),
simple polygon (n=2) and the power-cusp region
``{0 < x1 < 1, |x2| < x1**gamma}`` with gamma > 1 (n=2).

All domains are open sets: ``contains`` is strict, boundary points belong to
neither the domain nor the complement's interior, and ``boundary_distance``
is only defined for interior points.  Instances are immutable after
construction and safe for concurrent reads.

Point values are plain numpy arrays.  Every operation accepts a single
point of shape ``(n,)`` or a batch of shape ``(m, n)`` and returns a scalar
or an ``(m,)`` array accordingly.
"""

from __future__ import annotations

import heapq
import math

import numpy as np

from .rng import as_generator

__all__ = [
    "GeometryError",
    "DimensionMismatchError",
    "OutsideDomainError",
    "EmptySubdomainError",
    "DegenerateDomainError",
    "GeodesicUnsupportedError",
    "Domain",
    "Interval",
    "Box",
    "Ball",
    "Polygon",
    "Cusp",
    "ExhaustionLevel",
    "ExhaustionView",
    "exhaustion_subdomain",
    "geodesic_distance",
    "domain_from_spec",
]

# Collinearity / on-boundary tolerance, in length units.  Catalog domains
# are unit scale, so an absolute tolerance is appropriate.
EDGE_TOL = 1e-12

# Rejection sampling gives up when fewer than this fraction of proposals
# land inside after a minimum number of draws.
ACCEPT_FLOOR = 1e-4
MIN_PROPOSALS = 1 << 20


class GeometryError(ValueError):
    """Invalid geometric input or construction."""


class DimensionMismatchError(GeometryError):
    pass


class OutsideDomainError(GeometryError):
    """An interior-only operation was asked about an exterior point."""


class EmptySubdomainError(GeometryError):
    pass


class DegenerateDomainError(GeometryError):
    """Rejection sampling acceptance rate collapsed below the floor."""


class GeodesicUnsupportedError(GeometryError):
    pass


def _as_batch(x, dim: int) -> tuple[np.ndarray, bool]:
    """Normalize a point or point batch to shape (m, dim)."""
    a = np.asarray(x, dtype=float)
    if a.ndim == 0 and dim == 1:
        a = a.reshape(1, 1)
        single = True
    elif a.shape == (dim,):
        a = a.reshape(1, dim)
        single = True
    elif a.ndim == 2 and a.shape[1] == dim:
        single = False
    else:
        raise DimensionMismatchError(
            f"expected point(s) of dimension {dim}, got array of shape {a.shape}"
        )
    if not np.all(np.isfinite(a)):
        raise GeometryError("point coordinates must be finite")
    return a, single


def _unbatch(values: np.ndarray, single: bool):
    return values[0] if single else values


class Domain:
    """Common interface for bounded open domains."""

    kind: str = "domain"
    dim: int
    measure: float
    measure_stderr: float = 0.0
    bounding_box: tuple[np.ndarray, np.ndarray]
    is_convex: bool = False

    # -- membership and distance ------------------------------------------

    def contains(self, x):
        pts, single = _as_batch(x, self.dim)
        return _unbatch(self._contains(pts), single)

    def boundary_distance(self, x):
        """Distance to the boundary; rejects exterior points."""
        pts, single = _as_batch(x, self.dim)
        inside = self._contains(pts)
        if not np.all(inside):
            bad = pts[~inside][0]
            raise OutsideDomainError(f"point {bad} is not interior to {self.kind}")
        return _unbatch(self._distance(pts), single)

    def _contains(self, pts: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _distance(self, pts: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    # -- sampling -----------------------------------------------------------

    def sample(self, count: int, stream) -> np.ndarray:
        """Draw `count` independent uniform points by bounding-box rejection."""
        g = as_generator(stream)
        lo, hi = self.bounding_box
        out = np.empty((count, self.dim))
        filled = 0
        proposed = 0
        accepted = 0
        chunk = int(max(1024, min(1 << 16, 4 * count)))
        while filled < count:
            pts = g.uniform(lo, hi, size=(chunk, self.dim))
            keep = pts[self._contains(pts)]
            proposed += chunk
            accepted += len(keep)
            take = min(count - filled, len(keep))
            out[filled : filled + take] = keep[:take]
            filled += take
            if proposed >= MIN_PROPOSALS and accepted < ACCEPT_FLOOR * proposed:
                raise DegenerateDomainError(
                    f"acceptance rate {accepted / proposed:.2e} below "
                    f"{ACCEPT_FLOOR:g} after {proposed} proposals"
                )
        return out

    # -- geometry summaries ---------------------------------------------------

    def diameter_bound(self) -> float:
        lo, hi = self.bounding_box
        return float(np.linalg.norm(hi - lo))

    def inradius(self) -> float:
        raise NotImplementedError

    # -- geodesics ---------------------------------------------------------

    def geodesic_distance(self, x, y) -> float:
        """Length of the shortest path inside the closure; convex default."""
        xa, _ = _as_batch(x, self.dim)
        ya, _ = _as_batch(y, self.dim)
        if not (self._contains(xa)[0] and self._contains(ya)[0]):
            raise OutsideDomainError("geodesic endpoints must be interior")
        if self.is_convex:
            return float(np.linalg.norm(xa[0] - ya[0]))
        raise GeodesicUnsupportedError(
            f"geodesic distance not supported on {self.kind} domains"
        )

    def geodesic_distances(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        if self.is_convex:
            return np.linalg.norm(xs - ys, axis=1)
        raise GeodesicUnsupportedError(
            f"geodesic distance not supported on {self.kind} domains"
        )


class Interval(Domain):
    kind = "interval"
    dim = 1
    is_convex = True

    def __init__(self, lo: float, hi: float):
        lo, hi = float(lo), float(hi)
        if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
            raise GeometryError(f"invalid interval ({lo}, {hi})")
        self.lo = lo
        self.hi = hi
        self.measure = hi - lo
        self.bounding_box = (np.array([lo]), np.array([hi]))

    def _contains(self, pts):
        x = pts[:, 0]
        return (x > self.lo) & (x < self.hi)

    def _distance(self, pts):
        x = pts[:, 0]
        return np.minimum(x - self.lo, self.hi - x)

    def inradius(self):
        return 0.5 * (self.hi - self.lo)


class Box(Domain):
    kind = "box"
    is_convex = True

    def __init__(self, lo, hi):
        lo = np.asarray(lo, dtype=float).reshape(-1)
        hi = np.asarray(hi, dtype=float).reshape(-1)
        if lo.shape != hi.shape or not 1 <= lo.size <= 3:
            raise GeometryError("box corners must share a dimension in 1..3")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi)) and np.all(lo < hi)):
            raise GeometryError("box corners must be finite with lo < hi")
        self.lo = lo
        self.hi = hi
        self.dim = lo.size
        self.measure = float(np.prod(hi - lo))
        self.bounding_box = (lo.copy(), hi.copy())

    def _contains(self, pts):
        return np.all((pts > self.lo) & (pts < self.hi), axis=1)

    def _distance(self, pts):
        return np.minimum(pts - self.lo, self.hi - pts).min(axis=1)

    def inradius(self):
        return float(0.5 * np.min(self.hi - self.lo))


class Ball(Domain):
    kind = "ball"
    is_convex = True

    def __init__(self, center, radius: float):
        center = np.asarray(center, dtype=float).reshape(-1)
        if not 1 <= center.size <= 3:
            raise GeometryError("ball center must have dimension 1..3")
        radius = float(radius)
        if not (math.isfinite(radius) and radius > 0 and np.all(np.isfinite(center))):
            raise GeometryError("ball needs finite center and radius > 0")
        self.center = center
        self.radius = radius
        self.dim = center.size
        n = self.dim
        self.measure = float(math.pi ** (n / 2) / math.gamma(n / 2 + 1) * radius**n)
        self.bounding_box = (center - radius, center + radius)

    def _contains(self, pts):
        return np.linalg.norm(pts - self.center, axis=1) < self.radius

    def _distance(self, pts):
        return self.radius - np.linalg.norm(pts - self.center, axis=1)

    def inradius(self):
        return self.radius


def _cross2(a, b):
    """Scalar cross product of planar vectors, broadcasting elementwise."""
    a = np.asarray(a)
    b = np.asarray(b)
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def _segment_distances(pts: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Distance from each point (m,2) to each segment a[k]->b[k]; shape (m,k)."""
    ab = b - a  # (k,2)
    ab_sq = np.einsum("kj,kj->k", ab, ab)
    ap = pts[:, None, :] - a[None, :, :]  # (m,k,2)
    t = np.einsum("mkj,kj->mk", ap, ab) / ab_sq
    t = np.clip(t, 0.0, 1.0)
    proj = a[None, :, :] + t[:, :, None] * ab[None, :, :]
    return np.linalg.norm(pts[:, None, :] - proj, axis=2)


class Polygon(Domain):
    """Simple counterclockwise polygon; geodesics via reflex-vertex graph."""

    kind = "polygon"
    dim = 2

    def __init__(self, vertices):
        v = np.asarray(vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
            raise GeometryError("polygon needs at least 3 vertices of shape (m, 2)")
        if not np.all(np.isfinite(v)):
            raise GeometryError("polygon vertices must be finite")
        if np.allclose(v[0], v[-1]):
            v = v[:-1]  # accept explicitly closed rings
        m = len(v)
        if m < 3:
            raise GeometryError("polygon needs at least 3 distinct vertices")
        nxt = np.roll(v, -1, axis=0)
        if np.any(np.linalg.norm(nxt - v, axis=1) <= EDGE_TOL):
            raise GeometryError("polygon has repeated consecutive vertices")
        area2 = float(np.sum(v[:, 0] * nxt[:, 1] - nxt[:, 0] * v[:, 1]))
        if abs(area2) <= EDGE_TOL:
            raise GeometryError("polygon has zero area")
        if area2 < 0:
            raise GeometryError("polygon vertices must be counterclockwise")
        self.vertices = v
        self._edge_a = v
        self._edge_b = nxt
        self.measure = 0.5 * area2
        self.bounding_box = (v.min(axis=0), v.max(axis=0))
        if self._has_self_intersection():
            raise GeometryError("polygon is not simple (self-intersecting)")
        prv = np.roll(v, 1, axis=0)
        turn = _cross2(v - prv, nxt - v)
        self._reflex = v[turn < -EDGE_TOL]
        self.is_convex = len(self._reflex) == 0
        self._reflex_graph = None
        self._inradius = None

    def _has_self_intersection(self) -> bool:
        a, b = self._edge_a, self._edge_b
        m = len(a)
        for i in range(m):
            for j in range(i + 1, m):
                if j == i or (i + 1) % m == j or (j + 1) % m == i:
                    continue  # shared-endpoint neighbours
                if _segments_cross(a[i], b[i], a[j], b[j]):
                    return True
        return False

    def _contains(self, pts):
        # Crossing-number parity, then knock out near-boundary points so the
        # set is genuinely open.
        x, y = pts[:, 0], pts[:, 1]
        x1, y1 = self._edge_a[:, 0], self._edge_a[:, 1]
        x2, y2 = self._edge_b[:, 0], self._edge_b[:, 1]
        cond = (y1[None, :] > y[:, None]) != (y2[None, :] > y[:, None])
        with np.errstate(divide="ignore", invalid="ignore"):
            xint = x1 + (y[:, None] - y1) * (x2 - x1) / (y2 - y1)
        crossing = cond & (x[:, None] < xint)
        inside = (crossing.sum(axis=1) % 2).astype(bool)
        if np.any(inside):
            d = _segment_distances(pts[inside], self._edge_a, self._edge_b).min(axis=1)
            sub = inside[inside].copy()
            sub[d <= EDGE_TOL] = False
            inside[np.flatnonzero(inside)] = sub
        return inside

    def _distance(self, pts):
        return _segment_distances(pts, self._edge_a, self._edge_b).min(axis=1)

    def inradius(self):
        if self._inradius is None:
            self._inradius = _grid_inradius(self)
        return self._inradius

    # -- geodesics --------------------------------------------------------

    def segment_free(self, a, b, samples: int = 9) -> bool:
        """True when the segment a-b stays inside the closed polygon."""
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        for ea, eb in zip(self._edge_a, self._edge_b):
            if _segments_cross(a, b, ea, eb):
                return False
        frac = (np.arange(samples) + 0.5) / samples
        probe = a[None, :] + frac[:, None] * (b - a)[None, :]
        inside = self._contains(probe)
        if np.all(inside):
            return True
        d = _segment_distances(probe[~inside], self._edge_a, self._edge_b).min(axis=1)
        return bool(np.all(d <= 1e-9))

    def _reflex_adjacency(self):
        if self._reflex_graph is None:
            k = len(self._reflex)
            adj = [[] for _ in range(k)]
            for i in range(k):
                for j in range(i + 1, k):
                    if self.segment_free(self._reflex[i], self._reflex[j]):
                        w = float(np.linalg.norm(self._reflex[i] - self._reflex[j]))
                        adj[i].append((j, w))
                        adj[j].append((i, w))
            self._reflex_graph = adj
        return self._reflex_graph

    def geodesic_distance(self, x, y) -> float:
        xa, _ = _as_batch(x, 2)
        ya, _ = _as_batch(y, 2)
        if not (self._contains(xa)[0] and self._contains(ya)[0]):
            raise OutsideDomainError("geodesic endpoints must be interior")
        return self._geodesic_one(xa[0], ya[0])

    def _geodesic_one(self, x: np.ndarray, y: np.ndarray) -> float:
        if self.segment_free(x, y):
            return float(np.linalg.norm(x - y))
        reflex = self._reflex
        k = len(reflex)
        if k == 0:
            return math.inf
        adj = self._reflex_adjacency()
        # Nodes: 0 = source, 1 = goal, 2 + i = reflex vertex i.
        src_edges = []
        goal_edges = [[] for _ in range(k)]
        for i in range(k):
            if self.segment_free(x, reflex[i]):
                src_edges.append((2 + i, float(np.linalg.norm(x - reflex[i]))))
            if self.segment_free(y, reflex[i]):
                goal_edges[i].append(float(np.linalg.norm(y - reflex[i])))
        dist = {0: 0.0}
        heap = [(0.0, 0)]
        while heap:
            d, node = heapq.heappop(heap)
            if d > dist.get(node, math.inf):
                continue
            if node == 1:
                return d
            if node == 0:
                neighbours = src_edges
            else:
                i = node - 2
                neighbours = [(2 + j, w) for j, w in adj[i]]
                neighbours += [(1, w) for w in goal_edges[i]]
            for nxt, w in neighbours:
                nd = d + w
                if nd < dist.get(nxt, math.inf):
                    dist[nxt] = nd
                    heapq.heappush(heap, (nd, nxt))
        return math.inf

    def geodesic_distances(self, xs, ys):
        r = np.linalg.norm(xs - ys, axis=1)
        if self.is_convex:
            return r
        free = self._segments_free_batch(xs, ys)
        out = np.empty(len(xs))
        out[free] = r[free]
        for idx in np.flatnonzero(~free):
            out[idx] = self._geodesic_one(xs[idx], ys[idx])
        return out

    def _segments_free_batch(self, xs, ys):
        """Vectorized visibility for strictly interior endpoint pairs."""
        ok = np.ones(len(xs), dtype=bool)
        for ea, eb in zip(self._edge_a, self._edge_b):
            d1 = _cross2(ys - xs, ea - xs)
            d2 = _cross2(ys - xs, eb - xs)
            d3 = _cross2(eb - ea, xs - ea)
            d4 = _cross2(eb - ea, ys - ea)
            crosses = (
                (np.minimum(d1, d2) < -EDGE_TOL)
                & (np.maximum(d1, d2) > EDGE_TOL)
                & (np.minimum(d3, d4) < -EDGE_TOL)
                & (np.maximum(d3, d4) > EDGE_TOL)
            )
            ok &= ~crosses
        mids = 0.5 * (xs + ys)
        ok[ok] &= self._contains(mids[ok])
        return ok


def _segments_cross(p1, p2, p3, p4) -> bool:
    """Proper (transversal) intersection test with EDGE_TOL slack."""
    d1 = float(_cross2(p2 - p1, p3 - p1))
    d2 = float(_cross2(p2 - p1, p4 - p1))
    d3 = float(_cross2(p4 - p3, p1 - p3))
    d4 = float(_cross2(p4 - p3, p2 - p3))
    return (
        min(d1, d2) < -EDGE_TOL
        and max(d1, d2) > EDGE_TOL
        and min(d3, d4) < -EDGE_TOL
        and max(d3, d4) > EDGE_TOL
    )


class Cusp(Domain):
    """Power-cusp region {0 < x1 < 1, |x2| < x1**gamma}, gamma > 1.

    The distance to the curved wall has no elementary closed form; it is
    computed by bracketing on a fixed t-grid followed by vectorized ternary
    refinement, which converges to machine precision and never overestimates
    by more than ~1e-14 of the domain scale.
    """

    kind = "cusp"
    dim = 2

    _T_GRID = np.unique(
        np.concatenate(
            [[0.0], np.geomspace(1e-9, 0.2, 48), np.linspace(0.0, 1.0, 97)]
        )
    )

    def __init__(self, gamma: float):
        gamma = float(gamma)
        if not (math.isfinite(gamma) and gamma > 1.0):
            raise GeometryError("cusp exponent gamma must be finite and > 1")
        self.gamma = gamma
        self.measure = 2.0 / (gamma + 1.0)
        self.bounding_box = (np.array([0.0, -1.0]), np.array([1.0, 1.0]))
        self._inradius = None

    def _contains(self, pts):
        x1, x2 = pts[:, 0], pts[:, 1]
        ok = (x1 > 0.0) & (x1 < 1.0)
        wall = np.where(ok, x1, 0.0) ** self.gamma
        return ok & (np.abs(x2) < wall)

    def _curve_distance(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """min_t distance from (a, b) with b >= 0 to the arc (t, t**gamma)."""
        g = self.gamma

        def sq(t):
            return (t - a) ** 2 + (t**g - b) ** 2

        vals = sq(self._T_GRID[:, None])  # (grid, m)
        idx = np.argmin(vals, axis=0)
        lo = self._T_GRID[np.maximum(idx - 1, 0)]
        hi = self._T_GRID[np.minimum(idx + 1, len(self._T_GRID) - 1)]
        for _ in range(96):
            m1 = lo + (hi - lo) / 3.0
            m2 = hi - (hi - lo) / 3.0
            keep_lo = sq(m1) < sq(m2)
            hi = np.where(keep_lo, m2, hi)
            lo = np.where(keep_lo, lo, m1)
        return np.sqrt(sq(0.5 * (lo + hi)))

    def _distance(self, pts):
        a = pts[:, 0]
        b = np.abs(pts[:, 1])
        return np.minimum(1.0 - a, self._curve_distance(a, b))

    def inradius(self):
        if self._inradius is None:
            t = np.linspace(1e-6, 1.0 - 1e-6, 8193)
            axis = np.stack([t, np.zeros_like(t)], axis=1)
            self._inradius = float(self._distance(axis).max())
        return self._inradius


def _grid_inradius(dom: Domain, base: int = 192, zooms: int = 3) -> float:
    """Max of the distance field by iterative grid zoom (d is 1-Lipschitz)."""
    lo, hi = dom.bounding_box
    best = 0.0
    center = 0.5 * (lo + hi)
    span = hi - lo
    for _ in range(zooms):
        axes = [np.linspace(center[k] - span[k] / 2, center[k] + span[k] / 2, base)
                for k in range(dom.dim)]
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=1)
        inside = dom._contains(pts)
        if not np.any(inside):
            break
        d = dom._distance(pts[inside])
        k = int(np.argmax(d))
        if d[k] > best:
            best = float(d[k])
            center = pts[inside][k]
        span = span / (base / 8)
    return best


# ---------------------------------------------------------------------------
# Exhaustion subdomains


class ExhaustionLevel:
    """One level of an interior exhaustion: index j and margin alpha_j."""

    def __init__(self, index: int, alpha: float):
        index = int(index)
        alpha = float(alpha)
        if index < 1:
            raise GeometryError("exhaustion index must be >= 1")
        if not (math.isfinite(alpha) and alpha > 0):
            raise GeometryError("exhaustion margin alpha must be > 0")
        self.index = index
        self.alpha = alpha

    def __repr__(self):
        return f"ExhaustionLevel(index={self.index}, alpha={self.alpha})"


class ExhaustionView(Domain):
    """The inner region {x in parent : d(x) > alpha}.

    ``boundary_distance`` deliberately keeps reporting the parent's distance
    field: the view restricts membership only, so cones and bounds keyed to
    the original boundary stay valid on the subdomain.
    """

    kind = "exhaustion-view"

    def __init__(self, parent: Domain, alpha: float):
        alpha = float(alpha)
        if alpha <= 0:
            raise GeometryError("exhaustion margin alpha must be > 0")
        if alpha >= parent.inradius():
            raise EmptySubdomainError(
                f"alpha={alpha:g} >= inradius~{parent.inradius():g}: empty subdomain"
            )
        self.parent = parent
        self.alpha = alpha
        self.dim = parent.dim
        lo, hi = parent.bounding_box
        lo2, hi2 = lo + alpha, hi - alpha
        if np.any(lo2 >= hi2):
            raise EmptySubdomainError("margin exceeds the bounding box")
        self.bounding_box = (lo2, hi2)
        self.is_convex = parent.is_convex
        self.measure, self.measure_stderr = self._compute_measure()

    def _compute_measure(self) -> tuple[float, float]:
        p, a = self.parent, self.alpha
        if isinstance(p, Ball):
            r = p.radius - a
            n = p.dim
            return float(math.pi ** (n / 2) / math.gamma(n / 2 + 1) * r**n), 0.0
        if isinstance(p, Box):
            return float(np.prod(p.hi - p.lo - 2 * a)), 0.0
        if isinstance(p, Interval):
            return float(p.hi - p.lo - 2 * a), 0.0
        # Certified Monte Carlo for polygon/cusp/nested views; the fixed
        # internal seed keeps the measure reproducible across runs.
        g = np.random.Generator(np.random.PCG64(np.random.SeedSequence(0xB0D7)))
        lo, hi = self.bounding_box
        n_total = 1 << 21
        hits = 0
        for _ in range(8):
            pts = g.uniform(lo, hi, size=(n_total // 8, self.dim))
            hits += int(self._contains(pts).sum())
        frac = hits / n_total
        vol = float(np.prod(hi - lo))
        stderr = vol * math.sqrt(max(frac * (1 - frac), 1e-12) / n_total)
        return vol * frac, stderr

    def _contains(self, pts):
        inside = self.parent._contains(pts)
        out = np.zeros(len(pts), dtype=bool)
        if np.any(inside):
            out[inside] = self.parent._distance(pts[inside]) > self.alpha
        return out

    def _distance(self, pts):
        return self.parent._distance(pts)

    def inradius(self):
        return self.parent.inradius() - self.alpha

    def geodesic_distance(self, x, y):
        if self.is_convex:
            return super().geodesic_distance(x, y)
        raise GeodesicUnsupportedError("geodesics on non-convex views unsupported")


def exhaustion_subdomain(dom: Domain, level: ExhaustionLevel) -> ExhaustionView:
    return ExhaustionView(dom, level.alpha)


def geodesic_distance(dom: Domain, x, y) -> float:
    return dom.geodesic_distance(x, y)


# ---------------------------------------------------------------------------
# JSON shape specs


def domain_from_spec(spec: dict) -> Domain:
    """Build a domain from its JSON description; unknown fields rejected."""
    if not isinstance(spec, dict):
        raise GeometryError("domain spec must be a JSON object")
    spec = dict(spec)
    kind = spec.pop("kind", None)
    if kind == "interval":
        corners = spec.pop("corners", None)
        _reject_unknown(spec, "interval")
        if corners is None or len(corners) != 2:
            raise GeometryError("interval needs corners: [lo, hi]")
        return Interval(corners[0], corners[1])
    if kind == "box":
        corners = spec.pop("corners", None)
        _reject_unknown(spec, "box")
        if corners is None or len(corners) != 2:
            raise GeometryError("box needs corners: [[lo...], [hi...]]")
        return Box(corners[0], corners[1])
    if kind == "ball":
        radius = spec.pop("radius", None)
        center = spec.pop("center", (0.0, 0.0))
        _reject_unknown(spec, "ball")
        if radius is None:
            raise GeometryError("ball needs a radius")
        return Ball(center, radius)
    if kind == "polygon":
        vertices = spec.pop("vertices", None)
        _reject_unknown(spec, "polygon")
        if vertices is None:
            raise GeometryError("polygon needs a vertices list")
        return Polygon(vertices)
    if kind == "cusp":
        gamma = spec.pop("gamma", None)
        _reject_unknown(spec, "cusp")
        if gamma is None:
            raise GeometryError("cusp needs a gamma exponent")
        return Cusp(gamma)
    raise GeometryError(f"unknown domain kind: {kind!r}")


def _reject_unknown(rest: dict, kind: str):
    if rest:
        raise GeometryError(f"unknown fields for {kind} spec: {sorted(rest)}")
