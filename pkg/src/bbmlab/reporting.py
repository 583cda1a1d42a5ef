"""Delimited outputs and figures for sweeps and verdicts.

CSV files are RFC-4180 friendly: comma separated numeric fields, LF line
endings, no quoting; comment and footer lines start with '#'.  Numbers are
printed with 9 significant digits; binary reproducibility comes from the
seed contract, not from printed precision.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

from .limits import SweepResult, Verdict

__all__ = [
    "fmt",
    "write_sweep_csv",
    "append_aborted",
    "write_verdicts_json",
    "write_counterexample_csv",
    "plot_sweep",
    "plot_counterexample",
]


def fmt(x: float) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(float(x), ".9g")


SWEEP_HEADER = "s,kind,energy,stderr,one_minus_s_energy,target,target_stderr,rel_gap"


def _sweep_rows(sw: SweepResult):
    for i, s in enumerate(sw.s_grid):
        for kind in sw.kinds:
            est = sw.estimates[kind][i]
            scaled = (1.0 - s) * est.value
            if sw.target > 0 and math.isfinite(sw.target):
                rel_gap = abs(scaled - sw.target) / sw.target
            else:
                rel_gap = abs(scaled)
            yield (s, kind, est.value, est.stderr, scaled,
                   sw.target, sw.target_stderr, rel_gap)


def write_sweep_csv(path, sw: SweepResult) -> None:
    lines = [SWEEP_HEADER]
    for row in _sweep_rows(sw):
        s, kind, *nums = row
        lines.append(",".join([fmt(s), kind] + [fmt(v) for v in nums]))
    for kind in sw.kinds:
        limit, sigma, _ = sw.limits[kind]
        lines.append(f"# limit,{fmt(limit)},{fmt(sigma)}")
    Path(path).write_text("\n".join(lines) + "\n", newline="\n")


def write_partial_sweep_csv(path, sw: SweepResult) -> None:
    """Partial CSV (whatever rows exist) terminated by an ABORTED trailer."""
    lines = [SWEEP_HEADER]
    done = min((len(v) for v in sw.estimates.values()), default=0)
    for i, s in enumerate(sw.s_grid[:done]):
        for kind in sw.kinds:
            if i >= len(sw.estimates[kind]):
                continue
            est = sw.estimates[kind][i]
            scaled = (1.0 - s) * est.value
            rel = abs(scaled - sw.target) / sw.target if sw.target > 0 and \
                math.isfinite(sw.target) else abs(scaled)
            lines.append(",".join(
                [fmt(s), kind, fmt(est.value), fmt(est.stderr), fmt(scaled),
                 fmt(sw.target), fmt(sw.target_stderr), fmt(rel)]
            ))
    lines.append("# ABORTED")
    Path(path).write_text("\n".join(lines) + "\n", newline="\n")


def append_aborted(path) -> None:
    p = Path(path)
    if p.exists():
        with p.open("a", newline="\n") as fh:
            fh.write("# ABORTED\n")
    else:
        p.write_text(SWEEP_HEADER + "\n# ABORTED\n", newline="\n")


def write_verdicts_json(path, verdicts: list[Verdict]) -> None:
    payload = [v.as_dict() for v in verdicts]
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


COUNTEREXAMPLE_HEADER = (
    "s,truncated,truncated_stderr,classical,classical_stderr,"
    "one_minus_s_truncated,one_minus_s_classical,ratio"
)


def write_counterexample_csv(path, sw: SweepResult, verdict: Verdict) -> None:
    lines = [COUNTEREXAMPLE_HEADER]
    for i, s in enumerate(sw.s_grid):
        tr = sw.estimates["truncated"][i]
        cl = sw.estimates["classical"][i]
        ratio = cl.value / tr.value if tr.value > 0 else math.inf
        lines.append(",".join(fmt(v) for v in (
            s, tr.value, tr.stderr, cl.value, cl.stderr,
            (1 - s) * tr.value, (1 - s) * cl.value, ratio,
        )))
    for kind in ("truncated", "classical"):
        limit, sigma, _ = sw.limits[kind]
        lines.append(f"# limit,{fmt(limit)},{fmt(sigma)}")
    lines.append(
        f"# divergence,{verdict.status},{fmt(verdict.lhs)},{fmt(verdict.rhs)}"
    )
    Path(path).write_text("\n".join(lines) + "\n", newline="\n")


# ---------------------------------------------------------------------------
# Figures


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    matplotlib.rcParams["svg.hashsalt"] = "bbmlab"
    import matplotlib.pyplot as plt

    return plt


def plot_sweep(path, sw: SweepResult) -> None:
    """Line plot of the scaled curves against s with the target level."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    s = list(sw.s_grid)
    for kind in sw.kinds:
        y, sig = sw.scaled_curve(kind)
        ax.errorbar(s, y, yerr=3 * sig, marker="o", ms=3, capsize=2, label=kind)
    if math.isfinite(sw.target):
        ax.axhline(sw.target, color="k", lw=1, ls="--", label="target")
    ax.set_xlabel("s")
    ax.set_ylabel("(1−s) × energy")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, metadata={"Date": None})
    plt.close(fig)


def plot_counterexample(path, sw: SweepResult) -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    s = list(sw.s_grid)
    for kind in ("truncated", "classical"):
        y, sig = sw.scaled_curve(kind)
        ax.errorbar(s, y, yerr=3 * sig, marker="o", ms=3, capsize=2, label=kind)
    if math.isfinite(sw.target):
        ax.axhline(sw.target, color="k", lw=1, ls="--", label="target")
    ax.set_xlabel("s")
    ax.set_ylabel("(1−s) × energy")
    ax.set_yscale("log")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, metadata={"Date": None})
    plt.close(fig)
