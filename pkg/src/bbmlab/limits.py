"""Sweeps over s, affine extrapolation of (1-s)-scaled energies, verdicts.

The sweep computes each requested energy kind on an increasing s-grid with
independent derived streams, assembles the curves y(s) = (1-s) * E(s),
fits the tail with an affine model in (1-s), and reports the intercept as
the extrapolated limit together with the analytic target
K(n, p) * grad-p-energy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .functions import (
    GradientPNorm,
    Power,
    TestFunction,
    function_p_norm,
    gradient_p_norm,
    w1p_membership,
)
from .geometry import Cusp, Domain, ExhaustionLevel, exhaustion_subdomain
from .rng import RandomStream
from .seminorm import (
    Budgets,
    EnergyEstimate,
    SeminormParams,
    classical_energy,
    far_part_energy,
    geodesic_energy,
    k_constant,
    truncated_energy,
)

__all__ = [
    "KINDS",
    "FitInfo",
    "SweepResult",
    "SweepAborted",
    "Verdict",
    "sweep",
    "extrapolate",
    "theorem_verdict",
    "divergence_verdict",
    "farpart_decay_verdict",
    "Step5Row",
    "Step5Report",
    "step5_decomposition",
    "RegimeCandidate",
    "regime_sweep",
]

KINDS = ("truncated", "classical", "geodesic", "far-part")
_KIND_ID = {k: i for i, k in enumerate(KINDS)}
_TARGET_STREAM = 97
DEFAULT_S_GRID = (0.90, 0.92, 0.94, 0.96, 0.98, 0.99)
TAIL_POINTS = 4


class SweepAborted(RuntimeError):
    """A grid point failed; carries whatever was computed before the failure."""

    def __init__(self, message: str, partial: "SweepResult | None" = None):
        super().__init__(message)
        self.partial = partial


@dataclass(frozen=True)
class FitInfo:
    tail_points: int
    intercept: float
    slope: float
    intercept_stderr: float
    residual_rms: float
    noisy: bool  # residuals exceed three times the propagated MC error


@dataclass
class SweepResult:
    s_grid: tuple[float, ...]
    kinds: tuple[str, ...]
    p: float
    tau: float
    estimates: dict[str, list[EnergyEstimate]]
    kconst: float
    gradient_norm: GradientPNorm
    target: float  # K(n,p) * gradient energy (inf when the norm diverges)
    target_stderr: float
    limits: dict[str, tuple[float, float, FitInfo]] = field(default_factory=dict)

    def scaled_curve(self, kind: str) -> tuple[np.ndarray, np.ndarray]:
        """(1-s) * E(s) values and their standard errors for one kind."""
        ests = self.estimates[kind]
        s = np.asarray(self.s_grid)
        y = (1.0 - s) * np.array([e.value for e in ests])
        sig = (1.0 - s) * np.array([e.stderr for e in ests])
        return y, sig

    @property
    def primary_kind(self) -> str:
        return "truncated" if "truncated" in self.kinds else self.kinds[0]

    @property
    def limit(self) -> tuple[float, float, FitInfo]:
        return self.limits[self.primary_kind]

    def tail_min(self, kind: str = "truncated") -> float:
        """Min of the scaled curve over the fit tail (a liminf stand-in)."""
        y, _ = self.scaled_curve(kind)
        k = min(TAIL_POINTS, len(y))
        return float(np.min(y[-k:]))


def extrapolate(s_values, y_values, y_stderr, tail: int = TAIL_POINTS):
    """Affine fit y = L + c*(1-s) on the last `tail` grid points.

    Returns (L, sigma_L, FitInfo).  sigma_L combines the residual-based
    least-squares variance with the Monte Carlo errors propagated through
    the fit weights.
    """
    s = np.asarray(s_values, dtype=float)
    y = np.asarray(y_values, dtype=float)
    sig = np.asarray(y_stderr, dtype=float)
    k = min(tail, len(s))
    if k < 3:
        raise ValueError("extrapolation needs at least 3 tail points")
    s, y, sig = s[-k:], y[-k:], sig[-k:]
    u = 1.0 - s
    x = np.stack([np.ones(k), u], axis=1)
    gram_inv = np.linalg.inv(x.T @ x)
    weights = gram_inv @ x.T  # (2, k); row 0 gives the intercept
    beta = weights @ y
    resid = y - x @ beta
    rss = float(resid @ resid)
    dof = k - 2
    var_res = (rss / dof) * gram_inv[0, 0] if dof > 0 else 0.0
    var_mc = float(np.sum(weights[0] ** 2 * sig**2))
    sigma_l = math.sqrt(var_res + var_mc)
    resid_rms = math.sqrt(rss / k)
    noisy = resid_rms > 3.0 * max(float(np.mean(sig)), 1e-300)
    info = FitInfo(
        tail_points=k,
        intercept=float(beta[0]),
        slope=float(beta[1]),
        intercept_stderr=sigma_l,
        residual_rms=resid_rms,
        noisy=noisy,
    )
    return float(beta[0]), sigma_l, info


def _estimate(kind: str, f, dom, params, budgets, stream, threads):
    if kind == "truncated":
        return truncated_energy(
            f, dom, params, budgets.outer, budgets.inner, stream, threads
        )
    if kind == "classical":
        return classical_energy(f, dom, params, budgets, stream, threads)
    if kind == "geodesic":
        return geodesic_energy(f, dom, params, budgets, stream, threads)
    if kind == "far-part":
        return far_part_energy(
            f, dom, params, budgets.pairs, stream, "geodesic", threads
        )
    raise ValueError(f"unknown energy kind {kind!r}")


def sweep(f: TestFunction, dom: Domain, p: float, tau: float, s_grid,
          kinds, budgets: Budgets, seed: int, threads: int = 1) -> SweepResult:
    """Compute every requested kind on the s-grid and extrapolate the tail."""
    s_grid = tuple(float(s) for s in s_grid)
    if not s_grid or any(not (0.0 < s <= 0.999) for s in s_grid):
        raise ValueError("s-grid must be nonempty within (0, 0.999]")
    if any(b <= a for a, b in zip(s_grid, s_grid[1:])):
        raise ValueError("s-grid must be strictly increasing")
    kinds = tuple(kinds)
    if not kinds:
        raise ValueError("at least one energy kind is required")
    for kind in kinds:
        if kind not in _KIND_ID:
            raise ValueError(f"unknown energy kind {kind!r}")

    root = RandomStream(int(seed))
    grad = gradient_p_norm(f, dom, p, budgets.gradient, root.child(_TARGET_STREAM),
                           threads)
    kc = k_constant(dom.dim, p).value
    target = math.inf if grad.infinite else kc * grad.value
    target_stderr = 0.0 if grad.infinite else kc * grad.stderr

    estimates: dict[str, list[EnergyEstimate]] = {k: [] for k in kinds}
    result = SweepResult(
        s_grid=s_grid, kinds=kinds, p=p, tau=tau, estimates=estimates,
        kconst=kc, gradient_norm=grad, target=target, target_stderr=target_stderr,
    )
    for i, s in enumerate(s_grid):
        params = SeminormParams(s=s, p=p, tau=tau)
        for kind in kinds:
            stream = root.child(_KIND_ID[kind], i)
            try:
                estimates[kind].append(
                    _estimate(kind, f, dom, params, budgets, stream, threads)
                )
            except Exception as exc:  # aborts carry the partial curves
                raise SweepAborted(
                    f"{kind} energy failed at s={s:g}: {exc}", partial=result
                ) from exc
    for kind in kinds:
        y, sig = result.scaled_curve(kind)
        result.limits[kind] = extrapolate(s_grid, y, sig)
    return result


# ---------------------------------------------------------------------------
# Verdicts


@dataclass
class Verdict:
    claim: str
    status: str  # pass | fail | inconclusive
    lhs: float
    rhs: float
    tolerance: float
    notes: str = ""

    def as_dict(self) -> dict:
        return {
            "claim": self.claim,
            "status": self.status,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "tolerance": self.tolerance,
            "notes": self.notes,
        }


def theorem_verdict(sw: SweepResult, tolerance: float,
                    target_scale: float = 1.0) -> Verdict:
    """Does the extrapolated truncated limit match K(n,p) * grad energy?"""
    if "truncated" not in sw.estimates:
        raise ValueError("theorem verdict needs the truncated kind in the sweep")
    if sw.gradient_norm.infinite:
        return Verdict(
            claim="limit-formula", status="inconclusive",
            lhs=math.nan, rhs=math.inf, tolerance=tolerance,
            notes="gradient energy diverges; see the divergence verdict",
        )
    limit, sigma_l, info = sw.limits["truncated"]
    target = sw.target * target_scale
    sigma = math.hypot(sigma_l, sw.target_stderr * target_scale)
    gap = abs(limit - target)
    allowed = tolerance * abs(target) + 3.0 * sigma
    notes = (
        f"limit={limit:.9g} sigma={sigma:.3g} tail={info.tail_points}"
        + (" noisy-fit" if info.noisy else "")
        + (f" corrupted-target x{target_scale:g}" if target_scale != 1.0 else "")
    )
    return Verdict(
        claim="limit-formula",
        status="pass" if gap <= allowed else "fail",
        lhs=limit,
        rhs=target,
        tolerance=tolerance,
        notes=notes,
    )


def farpart_decay_verdict(f: TestFunction, dom: Domain, p: float, tau: float,
                          s_grid, budgets: Budgets, seed: int,
                          threads: int = 1) -> Verdict:
    """(1-s) times the geodesic far part should fall along the tail."""
    try:
        dom.geodesic_distances(np.zeros((0, dom.dim)), np.zeros((0, dom.dim)))
    except Exception:
        return Verdict(
            claim="farpart-decay", status="inconclusive",
            lhs=math.nan, rhs=math.nan, tolerance=0.0,
            notes="domain is not geodesic-capable",
        )
    sw = sweep(f, dom, p, tau, s_grid, ("far-part",), budgets, seed, threads)
    y, sig = sw.scaled_curve("far-part")
    k = min(TAIL_POINTS, len(y))
    y, sig = y[-k:], sig[-k:]
    ok = True
    worst = 0.0
    for i in range(len(y) - 1):
        slack = math.hypot(sig[i], sig[i + 1])
        worst = max(worst, y[i + 1] - y[i] - slack)
        if y[i + 1] > y[i] + slack:
            ok = False
    return Verdict(
        claim="farpart-decay",
        status="pass" if ok else "fail",
        lhs=float(y[-1]),
        rhs=float(y[0]),
        tolerance=1.0,
        notes=f"tail={k} worst-step-excess={worst:.3g}",
    )


def divergence_verdict(f: TestFunction, dom: Domain, p: float, tau: float,
                       s_grid, budgets: Budgets, seed: int,
                       ratio_threshold: float = 10.0,
                       tolerance: float = 0.05,
                       threads: int = 1) -> Verdict:
    """Look for a classical curve that outruns the truncated target.

    Pass requires, on one shared run: the scaled classical curve increasing
    along the tail, a final value at least ratio_threshold times the
    truncated target, and the truncated limit still matching the target.
    Out-of-regime inputs come back inconclusive, never fail.
    """
    if not isinstance(dom, Cusp) or not isinstance(f, Power):
        return Verdict(
            claim="counterexample-divergence", status="inconclusive",
            lhs=math.nan, rhs=math.nan, tolerance=ratio_threshold,
            notes="divergence regime needs a cusp domain with a power function",
        )
    if not w1p_membership(f, dom, p):
        return Verdict(
            claim="counterexample-divergence", status="inconclusive",
            lhs=math.nan, rhs=math.nan, tolerance=ratio_threshold,
            notes=f"gradient energy diverges for beta={f.beta:g}, "
                  f"gamma={dom.gamma:g}, p={p:g}; target undefined",
        )
    sw = sweep(f, dom, p, tau, s_grid, ("truncated", "classical"),
               budgets, seed, threads)
    if sw.target <= 0:
        return Verdict(
            claim="counterexample-divergence", status="inconclusive",
            lhs=0.0, rhs=0.0, tolerance=ratio_threshold,
            notes="zero target: nothing can diverge relative to it",
        )
    y_cl, _ = sw.scaled_curve("classical")
    k = min(TAIL_POINTS, len(y_cl))
    tail = y_cl[-k:]
    increasing = bool(np.all(np.diff(tail) > 0))
    ratio = float(tail[-1] / sw.target)
    notes = f"tail-ratio={ratio:.4g} increasing={increasing}"
    if increasing and ratio >= ratio_threshold:
        tv = theorem_verdict(sw, tolerance)
        if tv.status == "pass":
            return Verdict(
                claim="counterexample-divergence", status="pass",
                lhs=ratio, rhs=ratio_threshold, tolerance=tolerance, notes=notes,
            )
        return Verdict(
            claim="counterexample-divergence", status="fail",
            lhs=ratio, rhs=ratio_threshold, tolerance=tolerance,
            notes=notes + "; truncated limit failed its own verdict",
        )
    return Verdict(
        claim="counterexample-divergence", status="inconclusive",
        lhs=ratio, rhs=ratio_threshold, tolerance=tolerance,
        notes=notes + "; no divergence detected within budget",
    )


@dataclass(frozen=True)
class RegimeCandidate:
    gamma: float
    beta: float
    p: float
    verdict: Verdict


def regime_sweep(gammas, betas, ps, tau: float, s_grid, budgets: Budgets,
                 seed: int, threads: int = 1) -> list[RegimeCandidate]:
    """Scan (gamma, beta, p) combinations for the divergence criterion.

    Only combinations with a finite gradient energy are measured; the rest
    are skipped outright.  Results arrive in scan order.
    """
    out = []
    for gamma in gammas:
        dom = Cusp(gamma)
        for p in ps:
            for beta in betas:
                f = Power(beta)
                if not w1p_membership(f, dom, p):
                    continue
                v = divergence_verdict(
                    f, dom, p, tau, s_grid, budgets, seed, threads=threads
                )
                out.append(RegimeCandidate(gamma=gamma, beta=beta, p=p, verdict=v))
    return out


# ---------------------------------------------------------------------------
# Exhaustion decomposition


@dataclass
class Step5Row:
    s: float
    near: EnergyEstimate
    far: EnergyEstimate
    far_bound: float
    near_reference: EnergyEstimate  # truncated energy over the full domain


@dataclass
class Step5Report:
    alpha: float
    p: float
    tau: float
    f_norm: GradientPNorm  # integral of |f|^p over the full domain
    rows: list[Step5Row]
    near_ok: bool
    far_ok: bool
    decay_ratio: float
    decay_ok: bool

    @property
    def passed(self) -> bool:
        return self.near_ok and self.far_ok and self.decay_ok


def step5_decomposition(f: TestFunction, dom: Domain, level: ExhaustionLevel,
                        p: float, tau: float, s_values, budgets: Budgets,
                        seed: int, threads: int = 1) -> Step5Report:
    """Split the energy on the inner region into cone and far parts.

    The cone radius keeps using the full-domain boundary distance, which is
    at least alpha on the inner region; the far part must then obey
    2**(p+1) |inner| |f|_p^p / (tau*alpha)**(n + s p), and its scaled value
    has to fade along the s-grid.
    """
    view = exhaustion_subdomain(dom, level)
    alpha = level.alpha
    root = RandomStream(int(seed)).child(level.index)
    fnorm = function_p_norm(f, dom, p, budgets.gradient, root.child(0), threads)

    rows: list[Step5Row] = []
    near_ok = far_ok = True
    for i, s in enumerate(sorted(float(s) for s in s_values)):
        params = SeminormParams(s=s, p=p, tau=tau)
        near = truncated_energy(
            f, view, params, budgets.outer, budgets.inner, root.child(1, i), threads
        )
        far = far_part_energy(
            f, view, params, budgets.pairs, root.child(2, i), "euclidean", threads
        )
        reference = truncated_energy(
            f, dom, params, budgets.outer, budgets.inner, root.child(3, i), threads
        )
        bound = (
            2.0 ** (p + 1.0)
            * view.measure
            * (fnorm.value + 3.0 * fnorm.stderr)
            / (tau * alpha) ** (dom.dim + s * p)
        )
        rows.append(Step5Row(s=s, near=near, far=far, far_bound=bound,
                             near_reference=reference))
        if near.value > reference.value + 3.0 * math.hypot(near.stderr,
                                                           reference.stderr):
            near_ok = False
        if far.value - 3.0 * far.stderr > bound:
            far_ok = False

    scaled = [(1.0 - row.s) * row.far.value for row in rows]
    first, last = scaled[0], scaled[-1]
    decay_ratio = first / last if last > 0 else math.inf
    monotone = all(b <= a + 1e-12 or
                   b <= a + math.hypot((1 - ra.s) * ra.far.stderr,
                                       (1 - rb.s) * rb.far.stderr)
                   for (a, b), (ra, rb) in zip(zip(scaled, scaled[1:]),
                                               zip(rows, rows[1:])))
    decay_ok = monotone and (last == 0.0 or decay_ratio >= 2.0)
    return Step5Report(
        alpha=alpha, p=p, tau=tau, f_norm=fnorm, rows=rows,
        near_ok=near_ok, far_ok=far_ok, decay_ratio=decay_ratio, decay_ok=decay_ok,
    )
