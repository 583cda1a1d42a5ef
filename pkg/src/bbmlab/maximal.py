"""Directional and spherical maximal averages of nonnegative fields.

The directional maximal value at x along a unit vector is the largest
average of the field over the ray segments [x, x + t*nu], maximized over a
geometric t-grid; line averages use a composite midpoint rule.  Fields are
total functions on R^n: a field backed by a domain is extended by zero
outside it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .functions import TestFunction
from .geometry import Domain
from .rng import RandomStream
from .seminorm import sphere_area

__all__ = [
    "TGrid",
    "default_t_grid",
    "ScalarField",
    "constant_field",
    "indicator_field",
    "gradient_magnitude_field",
    "direction_grid",
    "directional_maximal",
    "spherical_maximal",
    "spherical_maximal_batch",
    "MaximalEstimate",
    "BoundReport",
    "verify_pointwise_bound",
    "verify_lp_bound",
]

MIN_LINE_NODES = 64


@dataclass(frozen=True)
class TGrid:
    """Geometric grid of ray lengths."""

    t_min: float
    t_max: float
    ratio: float = 2.0 ** 0.25

    def __post_init__(self):
        if not (0 < self.t_min < self.t_max) or self.ratio <= 1.0:
            raise ValueError("need 0 < t_min < t_max and ratio > 1")

    def values(self) -> np.ndarray:
        count = int(math.ceil(math.log(self.t_max / self.t_min) / math.log(self.ratio)))
        return self.t_min * self.ratio ** np.arange(count + 1)


def default_t_grid(dom: Domain) -> TGrid:
    diam = dom.diameter_bound()
    return TGrid(t_min=1e-3 * diam, t_max=2.0 * diam)


class ScalarField:
    """Nonnegative scalar field on R^n, zero outside its support domain."""

    def __init__(self, fn, dim: int, support: Domain | None = None, label: str = "field"):
        self._fn = fn
        self.dim = dim
        self.support = support
        self.label = label

    def evaluate(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        flat = pts.reshape(-1, pts.shape[-1])
        if self.support is None:
            vals = np.asarray(self._fn(flat), dtype=float)
        else:
            inside = self.support.contains(flat)
            vals = np.zeros(len(flat))
            if np.any(inside):
                vals[inside] = self._fn(flat[inside])
        return vals.reshape(pts.shape[:-1])

    __call__ = evaluate


def constant_field(value: float, dim: int, support: Domain | None = None) -> ScalarField:
    if value < 0:
        raise ValueError("fields must be nonnegative")
    return ScalarField(
        lambda pts: np.full(len(pts), float(value)), dim, support,
        label=f"constant[{value:g}]",
    )


def indicator_field(region: Domain) -> ScalarField:
    return ScalarField(
        lambda pts: region.contains(pts).astype(float), region.dim, None,
        label=f"indicator[{region.kind}]",
    )


def gradient_magnitude_field(f: TestFunction, dom: Domain) -> ScalarField:
    return ScalarField(
        lambda pts: np.linalg.norm(f.gradient(pts), axis=-1), dom.dim, dom,
        label=f"|grad {f.kind}|",
    )


def direction_grid(dim: int, count: int) -> np.ndarray:
    """Deterministic unit-vector grid: signs, equispaced angles, or a
    Fibonacci sphere depending on the dimension."""
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if dim == 2:
        count = max(count, 256)
        ang = 2.0 * math.pi * (np.arange(count) + 0.5) / count
        return np.stack([np.cos(ang), np.sin(ang)], axis=1)
    if dim == 3:
        count = max(count, 1024)
        k = np.arange(count) + 0.5
        phi = math.pi * (1.0 + math.sqrt(5.0)) * k
        z = 1.0 - 2.0 * k / count
        rho = np.sqrt(np.maximum(1.0 - z * z, 0.0))
        return np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=1)
    raise ValueError("direction grids exist for dimensions 1..3 only")


def _ray_max_averages(h: ScalarField, xs: np.ndarray, dirs: np.ndarray,
                      t_grid: TGrid, nodes: int = MIN_LINE_NODES) -> np.ndarray:
    """max over the t-grid of ray averages; shape (len(xs), len(dirs))."""
    nodes = max(nodes, MIN_LINE_NODES)
    offsets = (np.arange(nodes) + 0.5) / nodes
    best = np.zeros((len(xs), len(dirs)))
    for t in t_grid.values():
        # midpoint rule: (1/t) * int_0^t h = mean over midpoint nodes
        steps = t * offsets  # (nodes,)
        pts = xs[:, None, None, :] + dirs[None, :, None, :] * steps[None, None, :, None]
        avg = h.evaluate(pts).mean(axis=2)
        np.maximum(best, avg, out=best)
    return best


def directional_maximal(h: ScalarField, x, direction, t_grid: TGrid,
                        nodes: int = MIN_LINE_NODES) -> float:
    """Grid maximum of ray averages from x along one direction.

    A lower bound for the true supremum: refining the grid never decreases
    the result.
    """
    xs = np.asarray(x, dtype=float).reshape(1, -1)
    d = np.asarray(direction, dtype=float).reshape(1, -1)
    norm = np.linalg.norm(d)
    if not np.isclose(norm, 1.0, atol=1e-9):
        raise ValueError("direction must be a unit vector")
    return float(_ray_max_averages(h, xs, d, t_grid, nodes)[0, 0])


@dataclass(frozen=True)
class MaximalEstimate:
    anchor: np.ndarray
    value: float
    n_directions: int
    t_grid: TGrid


def spherical_maximal(h: ScalarField, x, p: float, n_directions: int,
                      t_grid: TGrid, nodes: int = MIN_LINE_NODES) -> MaximalEstimate:
    """L^p average over directions of the directional maximal value."""
    xs = np.asarray(x, dtype=float).reshape(1, -1)
    value = spherical_maximal_batch(h, xs, p, n_directions, t_grid, nodes)[0]
    dirs = direction_grid(h.dim, n_directions)
    return MaximalEstimate(anchor=xs[0].copy(), value=float(value),
                           n_directions=len(dirs), t_grid=t_grid)


def spherical_maximal_batch(h: ScalarField, xs: np.ndarray, p: float,
                            n_directions: int, t_grid: TGrid,
                            nodes: int = MIN_LINE_NODES,
                            chunk: int = 64) -> np.ndarray:
    dirs = direction_grid(h.dim, n_directions)
    out = np.empty(len(xs))
    area = sphere_area(h.dim)
    for lo in range(0, len(xs), chunk):
        part = xs[lo : lo + chunk]
        h1 = _ray_max_averages(h, part, dirs, t_grid, nodes)
        out[lo : lo + chunk] = (area * (h1**p).mean(axis=1)) ** (1.0 / p)
    return out


# ---------------------------------------------------------------------------
# Bound verification reports


@dataclass
class BoundReport:
    claim: str
    passed: bool
    lhs: float
    rhs: float
    tolerance: float
    notes: str = ""

    def as_dict(self) -> dict:
        return {
            "claim": self.claim,
            "status": "pass" if self.passed else "fail",
            "lhs": self.lhs,
            "rhs": self.rhs,
            "tolerance": self.tolerance,
            "notes": self.notes,
        }


def verify_pointwise_bound(f: TestFunction, dom: Domain, params, x,
                           inner_budget: int, stream: RandomStream,
                           n_directions: int = 256, t_grid: TGrid | None = None,
                           eps: float = 1e-2,
                           maximal_value: float | None = None) -> BoundReport:
    """Check the local-energy bound against the spherical maximal field.

    Compares (1-s) times the cone energy at x with
    (tau d(x))**(p(1-s)) / p times the p-th power of the spherical maximal
    value of |grad f| at x.  eps absorbs the t-grid under-approximation of
    the supremum; the Monte Carlo left side gets a 3-sigma allowance.
    """
    from .seminorm import local_energy  # local import to avoid cycles

    s, p, tau = params.s, params.p, params.tau
    if t_grid is None:
        t_grid = default_t_grid(dom)
    est = local_energy(f, dom, x, params, inner_budget, stream)
    lhs = (1.0 - s) * est.value
    lhs_sigma = (1.0 - s) * est.stderr
    if maximal_value is None:
        grad = gradient_magnitude_field(f, dom)
        maximal_value = spherical_maximal(grad, x, p, n_directions, t_grid).value
    d = float(dom.boundary_distance(np.asarray(x, dtype=float)))
    rhs = (tau * d) ** (p * (1.0 - s)) / p * maximal_value**p
    passed = lhs <= rhs * (1.0 + eps) + 3.0 * lhs_sigma
    return BoundReport(
        claim="pointwise-maximal-bound",
        passed=bool(passed),
        lhs=lhs,
        rhs=rhs,
        tolerance=eps,
        notes=f"s={s:g} p={p:g} tau={tau:g} anchor={np.asarray(x).tolist()}",
    )


def lp_bound_constant(n: int, p: float) -> float:
    """Validated comparison constant (p/(p-1)) |S^{n-1}|^{1/p}.

    Derivation: each directional maximal is a 1-D one-sided maximal along a
    line, whose L^p norm is bounded by p/(p-1) (rising-sun weak bound plus
    the layer-cake argument); integrating the p-th power over lines and
    directions multiplies by the sphere measure.
    """
    if p <= 1.0:
        raise ValueError("the comparison constant blows up as p -> 1")
    return (p / (p - 1.0)) * sphere_area(n) ** (1.0 / p)


def verify_lp_bound(h: ScalarField, dom: Domain, p: float, point_budget: int,
                    stream: RandomStream, n_directions: int = 256,
                    t_grid: TGrid | None = None,
                    nodes: int = MIN_LINE_NODES) -> BoundReport:
    """Monte Carlo check that the spherical maximal field stays p-integrable.

    Estimates both p-norms over dom and tests the ratio against the
    analytic constant with a 3-sigma allowance.
    """
    if t_grid is None:
        t_grid = default_t_grid(dom)
    g_points = stream.child(0).generator()
    xs = dom.sample(point_budget, g_points)
    star_p = spherical_maximal_batch(h, xs, p, n_directions, t_grid, nodes) ** p
    star_mean = star_p.mean()
    star_se = star_p.std(ddof=1) / math.sqrt(len(star_p))

    g_base = stream.child(1).generator()
    ys = dom.sample(4 * point_budget, g_base)
    base_p = h.evaluate(ys) ** p
    base_mean = base_p.mean()
    base_se = base_p.std(ddof=1) / math.sqrt(len(base_p))

    lhs = (dom.measure * star_mean) ** (1.0 / p)
    rhs_norm = (dom.measure * base_mean) ** (1.0 / p)
    c = lp_bound_constant(dom.dim, p)
    # relative sigma of a p-norm is 1/p times that of the p-th moment
    rel_sigma = math.hypot(
        star_se / max(star_mean, 1e-300), base_se / max(base_mean, 1e-300)
    ) / p
    rhs = c * rhs_norm
    passed = lhs <= rhs * (1.0 + 3.0 * rel_sigma)
    return BoundReport(
        claim="maximal-lp-bound",
        passed=bool(passed),
        lhs=lhs,
        rhs=rhs,
        tolerance=3.0 * rel_sigma,
        notes=f"field={h.label} p={p:g} constant={c:.6g}",
    )
