"""Run configuration for the experiment harness (flat JSON, versioned)."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from typing import Optional, Union

from .problems import load_atoms_csv, problem_from_name

CONFIG_VERSION = 1
ALGORITHMS = ("plugin", "search", "constrained", "bayes-oracle")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    version: int = CONFIG_VERSION
    problem: Optional[str] = None
    dim: int = 2
    atoms_csv: Optional[str] = None
    dataset: Optional[str] = None
    label_column: Optional[Union[int, str]] = None
    label_map: Union[str, dict] = "binary"
    fractions: tuple = (0.6, 0.2, 0.2)
    algorithms: tuple = ("plugin",)
    deltas: tuple = (0.2,)
    seeds: tuple = (0,)
    n: int = 2000
    m: int = 2000
    n_test: int = 10000
    n_list: tuple = ()
    slack_scale: float = 0.1
    lepski_scale: float = 0.03
    mu_min: float = 1.0
    band: Optional[float] = None
    features: int = 100
    sigma: Optional[float] = None
    iterations: int = 2000
    constrained_iterations: int = 1000
    step: float = 20.0
    reg: float = 1e-5
    grid_search: bool = False
    tol: float = 0.01
    max_iter: int = 12
    alpha_scale: float = 0.1
    c_relax: float = 1.0
    constraint_tol: float = 1e-3
    n_mc: int = 200000
    svg: bool = True

    def __post_init__(self):
        for name in ("fractions", "algorithms", "deltas", "seeds", "n_list"):
            value = getattr(self, name)
            if isinstance(value, (list, tuple)):
                object.__setattr__(self, name, tuple(value))
            else:
                raise ConfigError(f"{name} must be a list")
        self.validate()

    def validate(self):
        if self.version != CONFIG_VERSION:
            raise ConfigError(f"unsupported config version {self.version}")
        if (self.problem is None) + (self.dataset is None) + (self.atoms_csv is None) != 2:
            raise ConfigError("give exactly one of problem, atoms_csv, dataset")
        bad = [a for a in self.algorithms if a not in ALGORITHMS]
        if bad or not self.algorithms:
            raise ConfigError(f"algorithms must be drawn from {ALGORITHMS}, got {bad or '[]'}")
        if not self.deltas or any(not 0 < d < 1 for d in self.deltas):
            raise ConfigError("deltas must be a non-empty list in (0, 1)")
        if not self.seeds or any(int(s) != s for s in self.seeds):
            raise ConfigError("seeds must be a non-empty list of integers")
        if min(self.n, self.m, self.n_test) < 2:
            raise ConfigError("n, m and n_test must be at least 2")
        if self.slack_scale < 0 or self.lepski_scale <= 0 or self.mu_min <= 0:
            raise ConfigError("slack_scale >= 0, lepski_scale > 0 and mu_min > 0 required")
        if self.tol <= 0 or self.max_iter < 1 or self.c_relax <= 0:
            raise ConfigError("tol, max_iter and c_relax must be positive")
        if not 0 < self.constraint_tol <= 0.1:
            raise ConfigError("constraint_tol must lie in (0, 0.1]")
        if self.problem is not None:
            try:
                self.make_problem()
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
        if "bayes-oracle" in self.algorithms and self.dataset is not None:
            raise ConfigError("bayes-oracle needs a synthetic problem")

    def make_problem(self):
        if self.atoms_csv is not None:
            with open(self.atoms_csv) as fh:
                return load_atoms_csv(fh.read())
        if self.problem is None:
            return None
        return problem_from_name(self.problem, dim=self.dim)

    def as_dict(self) -> dict:
        d = asdict(self)
        for k, v in d.items():
            if isinstance(v, tuple):
                d[k] = list(v)
        return d


def from_dict(d: dict) -> RunConfig:
    known = {f.name for f in fields(RunConfig)}
    unknown = sorted(set(d) - known)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    if "version" not in d:
        raise ConfigError("config needs a version key")
    try:
        return RunConfig(**d)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def load(path: str) -> RunConfig:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    return from_dict(data)
