"""Closed-form scalar test functions with analytic gradients.

Catalog: linear fields a.x + b, the quadratic |x|^2 / 2, the planar trig
field sin(pi x1) cos(pi x2), and the power family x1**(-beta) whose
singular set is the axis {x1 = 0}.  Every member evaluates vectorized over
batches of points; gradients are analytic, never differenced.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import Cusp, Domain
from .rng import RandomStream, block_ranges, map_blocks

__all__ = [
    "FunctionError",
    "SingularEvaluationError",
    "TestFunction",
    "Linear",
    "Quadratic",
    "SmoothTrig",
    "Power",
    "constant",
    "function_from_spec",
    "w1p_membership",
    "GradientPNorm",
    "gradient_p_norm",
    "function_p_norm",
]

SKIP_FRACTION_LIMIT = 1e-3  # abort when more samples than this hit a singular set


class FunctionError(ValueError):
    pass


class SingularEvaluationError(FunctionError):
    """Evaluation requested exactly on the declared singular set."""


class TestFunction:
    """Base class; subclasses fill in vectorized evaluate/gradient."""

    kind: str = "abstract"
    dim: int | None = None  # None: any ambient dimension
    is_c2: bool = True
    singular_axis: bool = False  # True when {x1 = 0} must be avoided

    def evaluate(self, pts):
        raise NotImplementedError

    def gradient(self, pts):
        raise NotImplementedError

    def increment(self, pts, offsets):
        """f(x + h) - f(x), elementwise over matching batches.

        Catalog members override this with cancellation-free expressions:
        the cone sampler evaluates increments at radii many orders of
        magnitude below the domain scale, where naive subtraction loses
        every significant digit.
        """
        return self.evaluate(np.asarray(pts) + np.asarray(offsets)) - self.evaluate(pts)

    def __call__(self, pts):
        return self.evaluate(pts)

    def _check(self, pts) -> np.ndarray:
        a = np.asarray(pts, dtype=float)
        if a.ndim == 1:
            a = a[None, :]
        if self.dim is not None and a.shape[-1] != self.dim:
            raise FunctionError(
                f"{self.kind} expects points of dimension {self.dim}, "
                f"got {a.shape[-1]}"
            )
        return a


class Linear(TestFunction):
    kind = "linear"

    def __init__(self, coefficients, offset: float = 0.0):
        a = np.asarray(coefficients, dtype=float).reshape(-1)
        if a.size < 1 or not np.all(np.isfinite(a)):
            raise FunctionError("linear coefficients must be a finite vector")
        self.coefficients = a
        self.offset = float(offset)
        self.dim = a.size

    def evaluate(self, pts):
        a = self._check(pts)
        out = (a * self.coefficients).sum(axis=-1) + self.offset
        return out if np.asarray(pts).ndim > 1 else float(out[0])

    def gradient(self, pts):
        a = self._check(pts)
        return np.broadcast_to(self.coefficients, a.shape).copy()

    def increment(self, pts, offsets):
        h = self._check(offsets)
        out = (h * self.coefficients).sum(axis=-1)
        return out if np.asarray(offsets).ndim > 1 else float(out[0])


def constant(value: float, dim: int = 2) -> Linear:
    return Linear(np.zeros(dim), value)


class Quadratic(TestFunction):
    """f(x) = |x|^2 / 2, gradient x; works in any dimension."""

    kind = "quadratic"

    def evaluate(self, pts):
        a = self._check(pts)
        out = 0.5 * (a * a).sum(axis=-1)
        return out if np.asarray(pts).ndim > 1 else float(out[0])

    def gradient(self, pts):
        return self._check(pts).copy()

    def increment(self, pts, offsets):
        a = self._check(pts)
        h = self._check(offsets)
        out = (a * h).sum(axis=-1) + 0.5 * (h * h).sum(axis=-1)
        return out if np.asarray(offsets).ndim > 1 else float(out[0])


class SmoothTrig(TestFunction):
    """f(x) = sin(pi x1) cos(pi x2) on the plane."""

    kind = "trig"
    dim = 2

    def evaluate(self, pts):
        a = self._check(pts)
        out = np.sin(np.pi * a[..., 0]) * np.cos(np.pi * a[..., 1])
        return out if np.asarray(pts).ndim > 1 else float(out[0])

    def gradient(self, pts):
        a = self._check(pts)
        g = np.empty_like(a)
        g[..., 0] = np.pi * np.cos(np.pi * a[..., 0]) * np.cos(np.pi * a[..., 1])
        g[..., 1] = -np.pi * np.sin(np.pi * a[..., 0]) * np.sin(np.pi * a[..., 1])
        return g

    def increment(self, pts, offsets):
        # product-to-sum split: the increment is a sum of sin(small) terms,
        # so digits survive offsets far below machine epsilon of the base.
        a = self._check(pts)
        h = self._check(offsets)
        plus = np.pi * (a[..., 0] + a[..., 1])
        minus = np.pi * (a[..., 0] - a[..., 1])
        dplus = 0.5 * np.pi * (h[..., 0] + h[..., 1])
        dminus = 0.5 * np.pi * (h[..., 0] - h[..., 1])
        out = np.cos(plus + dplus) * np.sin(dplus) + np.cos(minus + dminus) * np.sin(dminus)
        return out if np.asarray(offsets).ndim > 1 else float(out[0])


class Power(TestFunction):
    """f(x) = x1**(-beta), beta > 0, defined for x1 > 0.

    Meant to be paired with cusp domains whose closure touches the singular
    axis at the tip only.  Evaluation at x1 <= 0 raises.
    """

    kind = "power"
    dim = 2
    singular_axis = True

    def __init__(self, beta: float):
        beta = float(beta)
        if not (math.isfinite(beta) and beta > 0):
            raise FunctionError("power exponent beta must be > 0")
        self.beta = beta

    def evaluate(self, pts):
        a = self._check(pts)
        x1 = a[..., 0]
        if np.any(x1 <= 0.0):
            raise SingularEvaluationError("power function evaluated at x1 <= 0")
        out = x1 ** (-self.beta)
        return out if np.asarray(pts).ndim > 1 else float(out[0])

    def gradient(self, pts):
        a = self._check(pts)
        x1 = a[..., 0]
        if np.any(x1 <= 0.0):
            raise SingularEvaluationError("power gradient evaluated at x1 <= 0")
        g = np.zeros_like(a)
        g[..., 0] = -self.beta * x1 ** (-self.beta - 1.0)
        return g

    def increment(self, pts, offsets):
        a = self._check(pts)
        h = self._check(offsets)
        x1 = a[..., 0]
        if np.any(x1 <= 0.0) or np.any(x1 + h[..., 0] <= 0.0):
            raise SingularEvaluationError("power increment crosses x1 <= 0")
        out = x1 ** (-self.beta) * np.expm1(-self.beta * np.log1p(h[..., 0] / x1))
        return out if np.asarray(offsets).ndim > 1 else float(out[0])


def function_from_spec(spec: dict, dim: int) -> TestFunction:
    """Build a test function from its JSON description for a dim-d domain."""
    if not isinstance(spec, dict):
        raise FunctionError("function spec must be a JSON object")
    spec = dict(spec)
    kind = spec.pop("kind", None)
    if kind == "linear":
        coeffs = spec.pop("coefficients", None)
        offset = spec.pop("offset", 0.0)
        _reject_unknown(spec, "linear")
        if coeffs is None:
            raise FunctionError("linear needs a coefficients vector")
        f = Linear(coeffs, offset)
    elif kind == "constant":
        value = spec.pop("value", None)
        _reject_unknown(spec, "constant")
        if value is None:
            raise FunctionError("constant needs a value")
        f = constant(value, dim)
    elif kind == "quadratic":
        _reject_unknown(spec, "quadratic")
        f = Quadratic()
    elif kind == "trig":
        _reject_unknown(spec, "trig")
        f = SmoothTrig()
    elif kind == "power":
        beta = spec.pop("exponent", None)
        _reject_unknown(spec, "power")
        if beta is None:
            raise FunctionError("power needs an exponent")
        f = Power(beta)
    else:
        raise FunctionError(f"unknown function kind: {kind!r}")
    if f.dim is not None and f.dim != dim:
        raise FunctionError(
            f"function {kind!r} has dimension {f.dim} but the domain is {dim}-d"
        )
    return f


def _reject_unknown(rest: dict, kind: str):
    if rest:
        raise FunctionError(f"unknown fields for {kind} spec: {sorted(rest)}")


def w1p_membership(f: TestFunction, dom: Domain, p: float) -> bool:
    """Whether the gradient p-energy of f over dom is finite.

    Polynomial/trig members are smooth up to the boundary, so always yes.
    The power family on a cusp with exponent gamma is decided by the 1-D
    moment criterion (beta + 1) * p - gamma < 1; on domains bounded away
    from the singular axis it is trivially smooth.
    """
    if not isinstance(f, Power):
        return True
    if isinstance(dom, Cusp):
        return (f.beta + 1.0) * p - dom.gamma < 1.0
    lo, _ = dom.bounding_box
    if lo[0] > 0.0:
        return True
    raise FunctionError(
        "power functions may only be paired with cusp domains or domains "
        "bounded away from the axis {x1 = 0}"
    )


@dataclass(frozen=True)
class GradientPNorm:
    """Monte Carlo estimate of the gradient p-energy (or an infinity flag)."""

    value: float
    stderr: float
    samples: int
    infinite: bool = False

    def __post_init__(self):
        if not self.infinite and self.stderr < 0:
            raise FunctionError("standard error must be nonnegative")


_CHUNK = 1 << 16


def _mc_p_moment(field, dom: Domain, budget: int, stream: RandomStream,
                 threads: int = 1) -> tuple[float, float, int, int]:
    """|dom| * mean(field(X)) with CLT stderr, skipping singular hits."""

    def work(block):
        b0, b1 = ranges[block]
        g = stream.child(block).generator()
        pts = dom.sample(b1 - b0, g)
        vals = field(pts)
        good = np.isfinite(vals)
        vals = vals[good]
        return vals.sum(), (vals * vals).sum(), len(vals), int((~good).sum())

    ranges = block_ranges(budget, _CHUNK)
    parts = map_blocks(len(ranges), work, threads)
    s1 = sum(p[0] for p in parts)
    s2 = sum(p[1] for p in parts)
    n = sum(p[2] for p in parts)
    skipped = sum(p[3] for p in parts)
    if skipped > SKIP_FRACTION_LIMIT * budget:
        raise SingularEvaluationError(
            f"{skipped}/{budget} samples hit the singular set"
        )
    mean = s1 / n
    var = max(s2 / n - mean * mean, 0.0) * n / max(n - 1, 1)
    scale = dom.measure
    value = scale * mean
    stderr = scale * math.sqrt(var / n)
    if dom.measure_stderr:
        stderr = math.hypot(stderr, value * dom.measure_stderr / dom.measure)
    return value, stderr, n, skipped


def gradient_p_norm(f: TestFunction, dom: Domain, p: float, budget: int,
                    stream: RandomStream, threads: int = 1) -> GradientPNorm:
    """Estimate the integral of |grad f|**p over dom.

    Returns the infinity flag without sampling when the membership
    criterion says the energy diverges.
    """
    if p <= 1.0:
        raise FunctionError("gradient p-norms require p > 1")
    if not w1p_membership(f, dom, p):
        return GradientPNorm(value=math.inf, stderr=0.0, samples=0, infinite=True)

    def field(pts):
        g = f.gradient(pts)
        return np.linalg.norm(g, axis=-1) ** p

    value, stderr, n, _ = _mc_p_moment(field, dom, budget, stream, threads)
    return GradientPNorm(value=value, stderr=stderr, samples=n)


def function_p_norm(f: TestFunction, dom: Domain, p: float, budget: int,
                    stream: RandomStream, threads: int = 1) -> GradientPNorm:
    """Estimate the integral of |f|**p over dom (same estimator shape)."""

    def field(pts):
        return np.abs(f.evaluate(pts)) ** p

    value, stderr, n, _ = _mc_p_moment(field, dom, budget, stream, threads)
    return GradientPNorm(value=value, stderr=stderr, samples=n)
