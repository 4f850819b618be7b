"""Synthetic problem catalog and Bayes-optimal abstaining rules.

A problem is a known joint law of (X, Y) on [0,1]^D: a marginal P_X (uniform
for the continuous kinds, a finite list of atoms otherwise) and a regression
function eta(x) = P(Y = +1 | X = x).  For a budget delta the optimal rule
thresholds |eta - 1/2| at gamma_delta, abstains inside the band and, when the
threshold level carries mass, randomizes on it with probability c0.
"""
from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

KINDS = ("linear1d", "sine1d", "smooth-nd", "two-gaussian", "atoms")

_QUAD_POINTS = 100_000
_BISECT_ITERS = 200


class DomainError(ValueError):
    """A point lies outside the support of a problem or outside [0,1]^D."""


class Region(enum.Enum):
    NEG = "G-1"
    POS = "G1"
    ABSTAIN = "GD"
    BOUNDARY_POS = "dG1"
    BOUNDARY_NEG = "dG-1"


# Decision codes shared by every classifier in the package.
NEG, POS, ABSTAIN = -1, 1, 0


@dataclass(frozen=True)
class Atom:
    location: tuple
    mass: float
    eta: float

    def __post_init__(self):
        if not self.mass > 0:
            raise ValueError(f"atom mass must be positive, got {self.mass}")
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError(f"atom eta must lie in [0,1], got {self.eta}")
        loc = tuple(float(v) for v in np.atleast_1d(self.location))
        if any(not 0.0 <= v <= 1.0 for v in loc):
            raise ValueError(f"atom location {loc} outside [0,1]^D")
        object.__setattr__(self, "location", loc)


@dataclass(frozen=True)
class LabeledSet:
    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.X, dtype=float))
        y = np.asarray(self.y, dtype=int).ravel()
        if len(X) != len(y):
            raise ValueError("points and labels differ in length")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    def __len__(self):
        return len(self.y)


@dataclass(frozen=True)
class UnlabeledSet:
    X: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "X", np.atleast_2d(np.asarray(self.X, dtype=float)))

    def __len__(self):
        return len(self.X)


@dataclass(frozen=True)
class Problem:
    """A catalog problem.

    ``kind`` selects eta:

    * ``linear1d``: eta(x) = x on [0,1].
    * ``sine1d``: eta(x) = 1/2 + A sin(2 pi k x).
    * ``smooth-nd``: eta(x) = 1/2 + A prod_d cos(pi x_d) on [0,1]^D.
    * ``two-gaussian``: equal-prior Gaussians centred at 0.3 (label -1) and
      0.7 (label +1) on every axis, clipped to the cube.  Sampling only; the
      clipping puts mass on the faces so no Bayes rule is offered.
    * ``atoms``: finite support given by ``atoms``.
    """

    kind: str
    dim: int = 1
    amplitude: float = 0.4
    frequency: int = 1
    sigma: float = 0.15
    atoms: tuple = ()
    C0: Optional[float] = None
    rho0: Optional[float] = None
    C1: Optional[float] = None
    rho1: Optional[float] = None
    L: Optional[float] = None
    beta: Optional[float] = None
    mu_min: Optional[float] = None
    mu_max: Optional[float] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown problem kind {self.kind!r}; expected one of {KINDS}")
        if self.kind in ("linear1d", "sine1d") and self.dim != 1:
            raise ValueError(f"{self.kind} is one-dimensional")
        if self.kind in ("sine1d", "smooth-nd") and not 0 < self.amplitude <= 0.5:
            raise ValueError("amplitude must lie in (0, 1/2]")
        if self.kind == "sine1d" and (int(self.frequency) != self.frequency or self.frequency < 1):
            raise ValueError("frequency must be a positive integer")
        if self.kind == "atoms":
            atoms = tuple(self.atoms)
            if not atoms:
                raise ValueError("atoms problem needs at least one atom")
            total = math.fsum(a.mass for a in atoms)
            if abs(total - 1.0) > 1e-12:
                raise ValueError(f"atom masses sum to {total!r}, not 1")
            locs = [a.location for a in atoms]
            if len(set(locs)) != len(locs):
                raise ValueError("atom locations must be distinct")
            dims = {len(loc) for loc in locs}
            if len(dims) != 1:
                raise ValueError("atom locations have mixed dimension")
            object.__setattr__(self, "atoms", atoms)
            object.__setattr__(self, "dim", dims.pop())

    @property
    def has_bayes(self) -> bool:
        return self.kind != "two-gaussian"

    # -- regression function ------------------------------------------------

    def eta_many(self, X) -> np.ndarray:
        X = _as_points(X, self.dim)
        if self.kind == "atoms":
            index = self._atom_index(X)
            return np.array([self.atoms[i].eta for i in index])
        _check_cube(X)
        if self.kind == "linear1d":
            return X[:, 0].copy()
        if self.kind == "sine1d":
            return 0.5 + self.amplitude * np.sin(2 * np.pi * self.frequency * X[:, 0])
        if self.kind == "smooth-nd":
            return 0.5 + self.amplitude * np.prod(np.cos(np.pi * X), axis=1)
        # two-gaussian, interior formula
        d_pos = np.sum((X - 0.7) ** 2, axis=1)
        d_neg = np.sum((X - 0.3) ** 2, axis=1)
        return 1.0 / (1.0 + np.exp((d_pos - d_neg) / (2 * self.sigma**2)))

    def _atom_index(self, X):
        lookup = {a.location: i for i, a in enumerate(self.atoms)}
        out = []
        for row in X:
            key = tuple(float(v) for v in row)
            if key not in lookup:
                raise DomainError(f"{key} is not an atom location")
            out.append(lookup[key])
        return out

    # -- marginal --------------------------------------------------------------

    def sample_points(self, count: int, rng: np.random.Generator) -> np.ndarray:
        return self.sample_xy(count, rng)[0]

    def sample_xy(self, count: int, rng: np.random.Generator):
        """Draw ``count`` i.i.d. pairs; labels are +1 with probability eta(X)."""
        if count < 1:
            raise ValueError("sample size must be at least 1")
        if self.kind == "atoms":
            masses = np.array([a.mass for a in self.atoms])
            idx = rng.choice(len(self.atoms), size=count, p=masses / masses.sum())
            locs = np.array([a.location for a in self.atoms])
            etas = np.array([a.eta for a in self.atoms])
            y = np.where(rng.random(count) < etas[idx], 1, -1)
            return locs[idx], y
        if self.kind == "two-gaussian":
            comp = rng.integers(0, 2, size=count)
            centre = np.where(comp[:, None] == 1, 0.7, 0.3)
            X = np.clip(centre + self.sigma * rng.standard_normal((count, self.dim)), 0.0, 1.0)
            # labels follow the mixture component, not the clipped point
            return X, np.where(comp == 1, 1, -1)
        X = rng.random((count, self.dim))
        y = np.where(rng.random(count) < self.eta_many(X), 1, -1)
        return X, y

    def _level_distribution(self):
        """Values of |eta - 1/2| with their P_X weights (atoms or quadrature)."""
        if self.kind == "atoms":
            levels = np.array([abs(a.eta - 0.5) for a in self.atoms])
            weights = np.array([a.mass for a in self.atoms])
            etas = np.array([a.eta for a in self.atoms])
            return levels, weights, etas
        grid = _midpoint_grid(self.dim)
        etas = self.eta_many(grid)
        weights = np.full(len(grid), 1.0 / len(grid))
        return np.abs(etas - 0.5), weights, etas

    def level_cdf(self, gamma: float) -> float:
        """F(gamma) = P_X(|eta(X) - 1/2| <= gamma)."""
        if gamma < 0:
            return 0.0
        if self.kind == "linear1d":
            return min(1.0, 2.0 * gamma)
        if self.kind == "sine1d":
            if gamma >= self.amplitude:
                return 1.0
            return 2.0 / np.pi * math.asin(gamma / self.amplitude)
        levels, weights, _ = self._level_distribution()
        return float(np.sum(weights[levels <= gamma]))


def _as_points(X, dim):
    X = np.asarray(X, dtype=float)
    if X.ndim == 0:
        X = X.reshape(1, 1)
    elif X.ndim == 1:
        X = X.reshape(1, -1) if dim > 1 or len(X) == dim == 1 else X.reshape(-1, 1)
    if X.shape[1] != dim:
        raise DomainError(f"expected points of dimension {dim}, got {X.shape[1]}")
    return X


def _check_cube(X):
    if np.any(X < 0.0) or np.any(X > 1.0) or np.any(~np.isfinite(X)):
        raise DomainError("point outside [0,1]^D")


def _midpoint_grid(dim):
    per_axis = max(1, int(round(_QUAD_POINTS ** (1.0 / dim))))
    if per_axis**dim > _QUAD_POINTS:
        per_axis -= 1
    axis = (np.arange(per_axis) + 0.5) / per_axis
    mesh = np.meshgrid(*([axis] * dim), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


# -- catalog constructors ----------------------------------------------------


def linear1d() -> Problem:
    return Problem("linear1d", L=1.0, beta=1.0, C0=1.0, rho0=1.0, C1=1.0, rho1=1.0,
                   mu_min=1.0, mu_max=1.0)


def sine1d(frequency: int = 1, amplitude: float = 0.4) -> Problem:
    return Problem("sine1d", frequency=frequency, amplitude=amplitude,
                   L=2 * np.pi * frequency * amplitude, beta=1.0, mu_min=1.0, mu_max=1.0)


def smooth_nd(dim: int = 2, amplitude: float = 0.4) -> Problem:
    return Problem("smooth-nd", dim=dim, amplitude=amplitude,
                   L=amplitude * np.pi * np.sqrt(dim), beta=1.0, mu_min=1.0, mu_max=1.0)


def two_gaussian(dim: int = 2, sigma: float = 0.15) -> Problem:
    return Problem("two-gaussian", dim=dim, sigma=sigma)


def atoms_problem(atoms: Sequence[Atom]) -> Problem:
    return Problem("atoms", atoms=tuple(atoms))


def three_atoms() -> Problem:
    """Equal-mass atoms with eta = 0.5, 0.9, 0.1 at x = 0.1, 0.5, 0.9."""
    third = 1.0 / 3.0
    return atoms_problem([
        Atom((0.1,), third, 0.5),
        Atom((0.5,), third, 0.9),
        Atom((0.9,), 1.0 - 2 * third, 0.1),
    ])


def load_atoms_csv(text: str) -> Problem:
    """Parse an atoms problem from CSV with columns ``location..., mass, eta``."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or len(header) < 3 or header[-2:] != ["mass", "eta"]:
        raise ValueError("atoms CSV needs columns location..., mass, eta")
    atoms = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise ValueError(f"line {lineno}: expected {len(header)} cells, got {len(row)}")
        values = [float(v) for v in row]
        atoms.append(Atom(tuple(values[:-2]), values[-2], values[-1]))
    return atoms_problem(atoms)


def dump_atoms_csv(problem: Problem) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow([f"x{d}" for d in range(problem.dim)] + ["mass", "eta"])
    for a in problem.atoms:
        writer.writerow([repr(v) for v in a.location] + [repr(a.mass), repr(a.eta)])
    return out.getvalue()


def problem_from_name(name: str, dim: int = 2, **kw) -> Problem:
    if name == "linear1d":
        return linear1d()
    if name == "sine1d":
        return sine1d(**kw)
    if name == "smooth-nd":
        return smooth_nd(dim=dim, **kw)
    if name == "two-gaussian":
        return two_gaussian(dim=dim, **kw)
    if name == "three-atoms":
        return three_atoms()
    raise ValueError(f"unknown catalog problem {name!r}")


# -- operations --------------------------------------------------------------


def eta(problem: Problem, x) -> float:
    return float(problem.eta_many(_as_points(x, problem.dim))[0])


def sample_labeled(problem: Problem, n: int, seed: int) -> LabeledSet:
    X, y = problem.sample_xy(n, np.random.default_rng([seed, 1]))
    return LabeledSet(X, y)


def sample_unlabeled(problem: Problem, m: int, seed: int) -> UnlabeledSet:
    return UnlabeledSet(problem.sample_points(m, np.random.default_rng([seed, 2])))


@dataclass(frozen=True)
class AbstainRule:
    """Randomized three-way rule thresholding |eta - 1/2| at ``gamma``."""

    problem: Problem
    gamma: float
    c0: float
    delta: float
    delta1: float
    delta2: float

    def region(self, x) -> Region:
        return self.regions(_as_points(x, self.problem.dim))[0]

    def regions(self, X) -> list:
        return [_region_of(v, self.gamma) for v in self.problem.eta_many(X)]

    def decide_many(self, X, u) -> np.ndarray:
        return rule_decide_many(self, X, u)

    def decision_probs(self, X) -> np.ndarray:
        return rule_decision_probs(self, X)

    @property
    def abstention(self) -> float:
        """P(rule abstains) = delta1 + c0 (delta2 - delta1)."""
        return self.delta1 + self.c0 * (self.delta2 - self.delta1)


def _region_of(v: float, gamma: float) -> Region:
    dev = v - 0.5
    if abs(dev) < gamma:
        return Region.ABSTAIN
    if dev == gamma:
        return Region.BOUNDARY_POS
    if -dev == gamma:
        return Region.BOUNDARY_NEG
    return Region.POS if dev > 0 else Region.NEG


def bayes_threshold(problem: Problem, delta: float) -> float:
    """gamma_delta = sup{gamma > 0 : P_X(|eta - 1/2| <= gamma) <= delta}."""
    if not problem.has_bayes:
        raise ValueError(f"{problem.kind} has no Bayes rule")
    if not 0.0 <= delta <= 1.0:
        raise ValueError("delta must lie in [0, 1]")
    if problem.kind == "linear1d":
        return min(0.5, delta / 2.0)
    if problem.kind == "sine1d":
        if delta >= 1.0:
            return 0.5
        return problem.amplitude * math.sin(np.pi * delta / 2.0)
    if problem.kind == "atoms":
        levels, weights, _ = problem._level_distribution()
        # F at each distinct level; gamma is the smallest level with F > delta
        uniq = np.unique(levels)
        for lv in uniq:
            if math.fsum(weights[levels <= lv]) > delta:
                return float(lv)
        return 0.5
    # quadrature + bisection
    lo, hi = 0.0, 0.5
    if problem.level_cdf(0.0) > delta:
        return 0.0
    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        if problem.level_cdf(mid) <= delta:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-12:
            break
    return lo


def bayes_rule(problem: Problem, delta: float) -> AbstainRule:
    gamma = bayes_threshold(problem, delta)
    if problem.kind == "atoms":
        levels, weights, _ = problem._level_distribution()
        delta1 = math.fsum(weights[levels < gamma])
        delta2 = delta1 + math.fsum(weights[levels == gamma])
    else:
        # continuous eta: the level set at gamma has no mass
        delta1 = delta2 = min(delta, problem.level_cdf(gamma))
    span = delta2 - delta1
    c0 = 0.0 if span <= 0 else min(1.0, max(0.0, (delta - delta1) / span))
    return AbstainRule(problem, gamma, c0, delta, delta1, delta2)


def rule_risk(rule: AbstainRule) -> float:
    """Exact misclassification risk of ``rule`` (abstentions cost nothing)."""
    problem = rule.problem
    g = rule.gamma
    if problem.kind == "linear1d":
        return (0.5 - g) ** 2
    if problem.kind == "sine1d":
        A = problem.amplitude
        if g >= A:
            return 0.0
        s = g / A
        return 0.5 * (1 - 2 / np.pi * math.asin(s)) - A * 2 / np.pi * math.sqrt(1 - s * s)
    levels, weights, etas = problem._level_distribution()
    cond = np.minimum(etas, 1 - etas)
    outside = math.fsum(weights[levels > g] * cond[levels > g])
    boundary = math.fsum(weights[levels == g] * cond[levels == g])
    return outside + (1.0 - rule.c0) * boundary


def bayes_risk(problem: Problem, delta: float) -> float:
    return rule_risk(bayes_rule(problem, delta))


def greedy_oracle(problem: Problem, delta: float):
    """Brute-force optimum over randomized feasible rules on a finite support.

    Abstention budget is spent on atoms in order of increasing |eta - 1/2|,
    splitting the last atom fractionally.  Returns ``(risk, abstain_probs)``
    with one abstention probability per atom (in ``problem.atoms`` order).
    """
    if problem.kind != "atoms":
        raise ValueError("greedy oracle needs an atoms problem")
    atoms = problem.atoms
    order = sorted(range(len(atoms)), key=lambda i: abs(atoms[i].eta - 0.5))
    budget = delta
    probs = [0.0] * len(atoms)
    for i in order:
        if budget <= 0:
            break
        take = min(1.0, budget / atoms[i].mass)
        probs[i] = take
        budget -= take * atoms[i].mass
    risk = math.fsum(a.mass * (1 - p) * min(a.eta, 1 - a.eta) for a, p in zip(atoms, probs))
    return risk, probs


def classify(rule: AbstainRule, x, u: float) -> int:
    """Decision in {-1, +1, 0 (abstain)} for point ``x`` and uniform draw ``u``."""
    region = rule.region(x)
    return _decide_region(region, rule.c0, u)


def _decide_region(region: Region, c: float, u: float) -> int:
    if region is Region.POS:
        return POS
    if region is Region.NEG:
        return NEG
    if region is Region.ABSTAIN:
        return ABSTAIN
    if u < c:
        return ABSTAIN
    return POS if region is Region.BOUNDARY_POS else NEG


def _region_codes(etas, gamma):
    """0 inside the band, +-1 sure label, +-2 on the threshold level."""
    dev = np.asarray(etas) - 0.5
    codes = np.where(dev >= 0, 1, -1)
    codes = np.where(np.abs(dev) == gamma, 2 * codes, codes)
    return np.where(np.abs(dev) < gamma, 0, codes)


def rule_decision_probs(rule: AbstainRule, X) -> np.ndarray:
    """Rows of (P(-1), P(+1), P(abstain)) for each point."""
    codes = _region_codes(rule.problem.eta_many(X), rule.gamma)
    out = np.zeros((len(codes), 3))
    out[codes == -1, 0] = 1.0
    out[codes == 1, 1] = 1.0
    out[codes == 0, 2] = 1.0
    out[codes == -2, 0] = 1.0 - rule.c0
    out[codes == 2, 1] = 1.0 - rule.c0
    out[np.abs(codes) == 2, 2] = rule.c0
    return out


def rule_decide_many(rule: AbstainRule, X, u) -> np.ndarray:
    codes = _region_codes(rule.problem.eta_many(X), rule.gamma)
    out = np.where(codes == 0, ABSTAIN, np.sign(codes))
    out = np.where((np.abs(codes) == 2) & (np.asarray(u) < rule.c0), ABSTAIN, out)
    return out.astype(int)
