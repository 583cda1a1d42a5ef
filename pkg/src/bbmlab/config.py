"""Experiment configuration: strict JSON parsing and round-tripping."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .functions import FunctionError, TestFunction, function_from_spec
from .geometry import Domain, GeometryError, domain_from_spec
from .limits import DEFAULT_S_GRID, KINDS
from .seminorm import Budgets, S_UPPER_GUARD

__all__ = ["ConfigError", "ExperimentConfig"]

MAX_SEED = 2**64 - 1


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    """One experiment: a domain, a function, parameters, budgets, a seed."""

    domain: dict
    function: dict
    p: float = 2.0
    tau: float = 0.5
    s_grid: tuple[float, ...] = DEFAULT_S_GRID
    kinds: tuple[str, ...] = ("truncated",)
    budgets: Budgets = field(default_factory=Budgets)
    seed: int = 20240
    out_dir: str | None = None
    emit_plots: bool = False

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        raw = dict(raw)
        known = {
            "domain", "function", "p", "tau", "s_grid", "kinds",
            "budgets", "seed", "out_dir", "emit_plots",
        }
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        if "domain" not in raw or "function" not in raw:
            raise ConfigError("config needs both a domain and a function")
        budgets_raw = raw.get("budgets", {})
        if not isinstance(budgets_raw, dict):
            raise ConfigError("budgets must be an object")
        allowed = {"outer", "inner", "pairs", "gradient"}
        bad = set(budgets_raw) - allowed
        if bad:
            raise ConfigError(f"unknown budget fields: {sorted(bad)}")
        try:
            budgets = Budgets(**{k: int(v) for k, v in budgets_raw.items()})
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid budgets: {exc}") from exc
        cfg = cls(
            domain=raw["domain"],
            function=raw["function"],
            p=float(raw.get("p", 2.0)),
            tau=float(raw.get("tau", 0.5)),
            s_grid=tuple(float(s) for s in raw.get("s_grid", DEFAULT_S_GRID)),
            kinds=tuple(raw.get("kinds", ("truncated",))),
            budgets=budgets,
            seed=int(raw.get("seed", 20240)),
            out_dir=raw.get("out_dir"),
            emit_plots=bool(raw.get("emit_plots", False)),
        )
        cfg.validate()
        return cfg

    @classmethod
    def from_path(cls, path) -> "ExperimentConfig":
        try:
            raw = json.loads(Path(path).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        return cls.from_dict(raw)

    def to_dict(self) -> dict:
        return {
            "domain": self.domain,
            "function": self.function,
            "p": self.p,
            "tau": self.tau,
            "s_grid": list(self.s_grid),
            "kinds": list(self.kinds),
            "budgets": {
                "outer": self.budgets.outer,
                "inner": self.budgets.inner,
                "pairs": self.budgets.pairs,
                "gradient": self.budgets.gradient,
            },
            "seed": self.seed,
            "out_dir": self.out_dir,
            "emit_plots": self.emit_plots,
        }

    def validate(self) -> None:
        """Check every module's preconditions before any computation."""
        if not (1.0 < self.p < float("inf")):
            raise ConfigError(f"p must lie in (1, inf), got {self.p}")
        if not (0.0 < self.tau < 1.0):
            raise ConfigError(f"tau must lie in (0, 1), got {self.tau}")
        if not self.s_grid:
            raise ConfigError("s_grid must be nonempty")
        for s in self.s_grid:
            if not (0.0 < s < S_UPPER_GUARD):
                raise ConfigError(f"s values must lie in (0, {S_UPPER_GUARD})")
        if any(b <= a for a, b in zip(self.s_grid, self.s_grid[1:])):
            raise ConfigError("s_grid must be strictly increasing")
        if not self.kinds:
            raise ConfigError("kinds must be nonempty")
        for kind in self.kinds:
            if kind not in KINDS:
                raise ConfigError(f"unknown energy kind {kind!r}; valid: {KINDS}")
        if not (0 <= self.seed <= MAX_SEED):
            raise ConfigError("seed must fit in an unsigned 64-bit integer")
        self.build_domain()  # raises on malformed geometry/function specs
        self.build_function()

    def build_domain(self) -> Domain:
        try:
            return domain_from_spec(self.domain)
        except GeometryError as exc:
            raise ConfigError(f"domain spec: {exc}") from exc

    def build_function(self) -> TestFunction:
        dom = self.build_domain()
        try:
            return function_from_spec(self.function, dom.dim)
        except FunctionError as exc:
            raise ConfigError(f"function spec: {exc}") from exc
