"""Piecewise-constant regression estimates over a ladder of grid widths.

For each width h on the ladder {1/N, 2/N, ..., 1} the cube is cut into
ceil(1/h)^D cells and eta is estimated by the fraction of positive labels in
the cell of x (the global fraction when the cell is empty).  The adaptive
estimate picks, per query point, the widest h whose estimate agrees with
every finer one up to ``4 * scale * e_S(h')``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .problems import DomainError, LabeledSet

_INT64_CELLS = 2**62


def e_S(n: int, mu_min: float, h, dim: int):
    """Stochastic error bound sqrt(32 log(n mu_min) / (n mu_min h^D))."""
    nm = n * mu_min
    if nm <= 1:
        raise ValueError("n * mu_min must exceed 1")
    return np.sqrt(32.0 * math.log(nm) / (nm * np.power(h, dim)))


def e_D(L: float, beta: float, h, dim: int):
    """Variation bound L (sqrt(D) h)^beta for a (L, beta)-Holder eta."""
    return L * np.power(math.sqrt(dim) * np.asarray(h, dtype=float), beta)


def b_n(n: int, mu_min: float, L: float, beta: float, dim: int, clip: bool = True) -> float:
    """Uniform error bound of the adaptive estimate.

    Clipped to 1/2 by default: a larger bound says nothing about a probability.
    """
    s = 2 * beta + dim
    val = (
        9.0
        * L ** (dim / s)
        * dim ** (beta * dim / (2 * s))
        * (32.0 * math.log(n * mu_min) / mu_min) ** (beta / s)
        * n ** (-beta / s)
    )
    return min(0.5, val) if clip else val


def ladder_size(n: int, mu_min: float, dim: int) -> int:
    if n < 2:
        return 1
    base = n * mu_min / (16.0 * math.log(n))
    return max(1, int(math.floor(base ** (1.0 / dim) + 1e-12)))


def optimal_width(n: int, mu_min: float, L: float, beta: float, dim: int) -> float:
    """h* in (0,1]: the largest width with e_S(h) >= e_D(h)."""
    # e_S = e_D  <=>  h^(2 beta + D) = 32 log(n mu) / (n mu L^2 D^beta)
    nm = n * mu_min
    h = (32.0 * math.log(nm) / (nm * L**2 * dim**beta)) ** (1.0 / (2 * beta + dim))
    return min(1.0, h)


@dataclass(frozen=True)
class BandwidthLadder:
    N: int
    n: int
    mu_min: float
    dim: int

    @classmethod
    def for_sample(cls, n: int, dim: int, mu_min: float = 1.0) -> "BandwidthLadder":
        return cls(ladder_size(n, mu_min, dim), n, mu_min, dim)

    @property
    def widths(self) -> np.ndarray:
        return np.arange(1, self.N + 1) / self.N


def cells_per_axis(h: float) -> int:
    # guard against 1/h landing a hair above an integer
    return max(1, int(math.ceil(1.0 / h - 1e-9)))


def axis_indices(h: float, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if np.any(X < 0.0) or np.any(X > 1.0) or np.any(~np.isfinite(X)):
        raise DomainError("coordinate outside [0, 1]")
    k = cells_per_axis(h)
    return np.minimum(np.floor(X / h).astype(np.int64), k - 1)


def flat_indices(h: float, X) -> np.ndarray:
    """Row-major flat cell index (axis 0 slowest) for each row of ``X``."""
    idx = axis_indices(h, X)
    k = cells_per_axis(h)
    dim = idx.shape[1]
    if k**dim < _INT64_CELLS:
        weights = k ** np.arange(dim - 1, -1, -1, dtype=np.int64)
        return idx @ weights
    out = np.empty(len(idx), dtype=object)
    for r, row in enumerate(idx):
        flat = 0
        for v in row:
            flat = flat * k + int(v)
        out[r] = flat
    return out


def cell_index(h: float, x, dim: Optional[int] = None):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if dim is not None and len(x) != dim:
        raise DomainError(f"expected a point of dimension {dim}")
    return flat_indices(h, x.reshape(1, -1))[0]


@dataclass(frozen=True)
class GridStats:
    """Sparse per-cell label counts at one grid width."""

    h: float
    dim: int
    keys: np.ndarray       # sorted occupied flat indices
    positives: np.ndarray
    totals: np.ndarray
    global_fraction: float

    @property
    def cells_per_axis(self) -> int:
        return cells_per_axis(self.h)

    @property
    def n_cells(self) -> int:
        return self.cells_per_axis**self.dim

    @classmethod
    def from_data(cls, h: float, X, y, global_fraction: float) -> "GridStats":
        flat = flat_indices(h, X)
        keys, inverse = np.unique(flat, return_inverse=True)
        totals = np.bincount(inverse, minlength=len(keys))
        positives = np.bincount(inverse, weights=(y == 1), minlength=len(keys))
        return cls(h, X.shape[1], keys, positives.astype(np.int64), totals.astype(np.int64),
                   global_fraction)

    def estimate(self, X) -> np.ndarray:
        flat = flat_indices(self.h, X)
        pos = np.searchsorted(self.keys, flat)
        pos = np.minimum(pos, len(self.keys) - 1)
        hit = self.keys[pos] == flat
        out = np.full(len(flat), self.global_fraction)
        out[hit] = self.positives[pos[hit]] / self.totals[pos[hit]]
        return out


@dataclass(frozen=True)
class HistogramEstimator:
    """Fitted statistics for every width on the ladder.

    ``threshold_scale`` multiplies e_S inside the bandwidth selection rule;
    1.0 gives the theoretical constant, which at moderate n tolerates so much
    disagreement that the widest grid always wins.
    """

    ladder: BandwidthLadder
    grids: tuple
    threshold_scale: float = 1.0
    L: Optional[float] = None
    beta: Optional[float] = None

    @property
    def n(self) -> int:
        return self.ladder.n

    @property
    def dim(self) -> int:
        return self.ladder.dim

    def error_bounds(self) -> np.ndarray:
        return e_S(self.ladder.n, self.ladder.mu_min, self.ladder.widths, self.dim)

    def estimates(self, X) -> np.ndarray:
        """Matrix of eta_h(x): one row per point, one column per width."""
        X = _points(X, self.dim)
        return np.column_stack([g.estimate(X) for g in self.grids])

    def select(self, X):
        """Return (chosen width index, per-width estimates) for each point."""
        V = self.estimates(X)
        tol = 4.0 * self.threshold_scale * self.error_bounds()
        # h_j is admissible iff V_j lies in every [V_i - tol_i, V_i + tol_i], i <= j
        lo = np.maximum.accumulate(V - tol, axis=1)
        hi = np.minimum.accumulate(V + tol, axis=1)
        admissible = (V >= lo) & (V <= hi)
        # the finest width is always admissible; take the widest admissible one
        last = V.shape[1] - 1 - np.argmax(admissible[:, ::-1], axis=1)
        return last, V

    def bandwidth(self, X) -> np.ndarray:
        j, _ = self.select(X)
        return self.ladder.widths[j]

    def predict(self, X) -> np.ndarray:
        j, V = self.select(X)
        return V[np.arange(len(V)), j]


def _points(X, dim):
    X = np.asarray(X, dtype=float)
    if X.ndim <= 1:
        X = X.reshape(-1, dim) if dim == 1 else X.reshape(1, -1)
    if X.shape[1] != dim:
        raise DomainError(f"expected points of dimension {dim}, got {X.shape[1]}")
    return X


def fit(data: LabeledSet, ladder: Optional[BandwidthLadder] = None, *,
        mu_min: float = 1.0, threshold_scale: float = 1.0,
        L: Optional[float] = None, beta: Optional[float] = None) -> HistogramEstimator:
    n = len(data)
    if n == 0:
        raise ValueError("cannot fit on an empty dataset")
    if ladder is None:
        ladder = BandwidthLadder.for_sample(n, data.X.shape[1], mu_min)
    if ladder.n != n or ladder.dim != data.X.shape[1]:
        raise ValueError("ladder does not match the dataset")
    axis_indices(1.0, data.X)  # domain check once
    frac = float(np.mean(data.y == 1))
    grids = tuple(GridStats.from_data(h, data.X, data.y, frac) for h in ladder.widths)
    return HistogramEstimator(ladder, grids, threshold_scale, L, beta)


def _single(estimator, x):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (estimator.dim,):
        raise DomainError(f"expected a single point of dimension {estimator.dim}")
    return x.reshape(1, -1)


def lepski_bandwidth(estimator: HistogramEstimator, x) -> float:
    """Selected width for one point; use ``estimator.bandwidth`` for batches."""
    return float(estimator.bandwidth(_single(estimator, x))[0])


def predict_eta(estimator: HistogramEstimator, x) -> float:
    """Adaptive estimate at one point; use ``estimator.predict`` for batches."""
    return float(estimator.predict(_single(estimator, x))[0])
