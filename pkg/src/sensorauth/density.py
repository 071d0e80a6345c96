"""Incremental density estimation for discrete and continuous sensors.

Discrete sensors keep plain occurrence counts.  Continuous sensors keep a
Gaussian-kernel density accumulated on a fixed-size evaluation grid, so an
observation costs O(m) for m grid points and queries never touch the raw
samples.  Both expose a comfort contribution normalized by the mode: the
most familiar value scores exactly 1.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptyDensity, NonFiniteInput

DEFAULT_BINS = 256
SILVERMAN_FACTOR = 1.06
MIN_BANDWIDTH_SPAN_FRACTION = 1e-6


class DiscreteDensity:
    """Occurrence counts over labels, with O(1) observe and score."""

    __slots__ = ("counts", "total", "max_count")

    def __init__(self) -> None:
        self.counts: dict[str, int] = {}
        self.total = 0
        self.max_count = 0

    def observe(self, item: str) -> None:
        count = self.counts.get(item, 0) + 1
        self.counts[item] = count
        self.total += 1
        if count > self.max_count:
            self.max_count = count

    def score(self, item: str) -> float:
        """Comfort contribution: count relative to the modal count, in [0, 1]."""
        if self.max_count == 0:
            return 0.0
        return self.counts.get(item, 0) / self.max_count

    def probability(self, item: str) -> float:
        if self.total == 0:
            return 0.0
        return self.counts.get(item, 0) / self.total

    @property
    def n(self) -> int:
        return self.total

    def ranked_labels(self, top_k: int | None = None) -> list[str]:
        """Labels by descending count, ties broken lexicographically."""
        ranked = sorted(self.counts, key=lambda lab: (-self.counts[lab], lab))
        return ranked if top_k is None else ranked[:top_k]

    def copy(self) -> "DiscreteDensity":
        dup = DiscreteDensity()
        dup.counts = dict(self.counts)
        dup.total = self.total
        dup.max_count = self.max_count
        return dup

    def __eq__(self, other) -> bool:
        if not isinstance(other, DiscreteDensity):
            return NotImplemented
        return self.counts == other.counts

    def to_dict(self) -> dict:
        return {"kind": "discrete", "counts": dict(sorted(self.counts.items()))}

    @classmethod
    def from_dict(cls, data: dict) -> "DiscreteDensity":
        dup = cls()
        dup.counts = {str(k): int(v) for k, v in data["counts"].items()}
        dup.total = sum(dup.counts.values())
        dup.max_count = max(dup.counts.values(), default=0)
        return dup


def _trapezoid(values: np.ndarray, step: float) -> float:
    if len(values) < 2:
        return 0.0
    return float((values[1:-1].sum() + 0.5 * (values[0] + values[-1])) * step)


class ContinuousDensity:
    """Streaming Gaussian-kernel density on a uniform evaluation grid.

    Each observation deposits one kernel evaluated at the grid points.  The
    bandwidth follows Silverman's rule on the running variance, floored at
    one grid step so the kernel stays resolvable; already-deposited mass
    keeps its historical bandwidth.  Every kernel is normalized to unit
    trapezoidal mass on the grid, which keeps the density integrating to 1
    even for kernels near the grid edge.  Values outside the grid trigger a
    factor-of-2 expansion with rebinning before the deposit.
    """

    __slots__ = ("bins", "grid", "mass", "n", "_mean", "_m2", "bandwidth")

    def __init__(self, bins: int = DEFAULT_BINS) -> None:
        if bins < 2:
            raise ValueError("bins must be >= 2")
        self.bins = bins
        self.grid: np.ndarray | None = None
        self.mass = np.zeros(bins, dtype=np.float64)
        self.n = 0
        self._mean = 0.0
        self._m2 = 0.0
        self.bandwidth = 0.0

    @property
    def grid_min(self) -> float:
        return float(self.grid[0]) if self.grid is not None else math.nan

    @property
    def grid_max(self) -> float:
        return float(self.grid[-1]) if self.grid is not None else math.nan

    @property
    def step(self) -> float:
        return (self.grid_max - self.grid_min) / (self.bins - 1)

    @property
    def running_mean(self) -> float:
        return self._mean

    @property
    def running_variance(self) -> float:
        if self.n < 2:
            return 0.0
        return self._m2 / (self.n - 1)

    def _cumulative_at(self, points: np.ndarray) -> np.ndarray:
        """Integral of the piecewise-linear mass from grid_min to each point."""
        grid = self.grid
        step = self.step
        cum = np.empty(self.bins)
        cum[0] = 0.0
        np.cumsum(0.5 * (self.mass[1:] + self.mass[:-1]) * step, out=cum[1:])
        x = np.clip(points, grid[0], grid[-1])
        idx = np.clip(((x - grid[0]) // step).astype(int), 0, self.bins - 2)
        left = grid[idx]
        frac = (x - left) / step
        f_left = self.mass[idx]
        f_x = f_left + (self.mass[idx + 1] - f_left) * frac
        return cum[idx] + 0.5 * (f_left + f_x) * (x - left)

    def _expand(self, x: float) -> None:
        span = self.grid_max - self.grid_min
        if x > self.grid_max:
            new_min, new_max = self.grid_min, self.grid_min + 2.0 * span
        else:
            new_min, new_max = self.grid_max - 2.0 * span, self.grid_max
        new_grid = np.linspace(new_min, new_max, self.bins)
        new_step = (new_max - new_min) / (self.bins - 1)
        old_total = _trapezoid(self.mass, self.step)
        sampled = np.interp(new_grid, self.grid, self.mass, left=0.0, right=0.0)
        sampled_total = _trapezoid(sampled, new_step)
        ratio = sampled_total / old_total if old_total > 0.0 else 1.0
        if 0.99 <= ratio <= 1.01:
            # The coarser grid still resolves the mass: keep exact point
            # samples, rescaled so rebinning conserves total mass.
            self.grid = new_grid
            self.mass = sampled / ratio
        else:
            # Features narrower than the new step cannot be represented
            # pointwise; fall back to cell-averaged conservative rebinning.
            bounds = np.empty(self.bins + 1)
            bounds[0] = new_grid[0]
            bounds[-1] = new_grid[-1]
            bounds[1:-1] = 0.5 * (new_grid[:-1] + new_grid[1:])
            integrals = np.diff(self._cumulative_at(bounds))
            self.grid = new_grid
            self.mass = integrals / np.diff(bounds)

    def _current_bandwidth(self) -> float:
        span = self.grid_max - self.grid_min
        if self.n == 1:
            # No scale information from a single sample; cover a quarter of
            # the initial padding so the kernel survives later coarsening.
            h = span / 4.0
        else:
            sigma = math.sqrt(self.running_variance)
            h = SILVERMAN_FACTOR * sigma * self.n ** (-0.2)
        return max(h, self.step, MIN_BANDWIDTH_SPAN_FRACTION * span)

    def observe(self, x: float) -> None:
        x = float(x)
        if not math.isfinite(x):
            raise NonFiniteInput(f"cannot observe {x!r}")
        if self.grid is None:
            self.grid = np.linspace(x - 1.0, x + 1.0, self.bins)
        while x < self.grid_min or x > self.grid_max:
            self._expand(x)
        self.n += 1
        delta = x - self._mean
        self._mean += delta / self.n
        self._m2 += delta * (x - self._mean)
        h = self._current_bandwidth()
        self.bandwidth = h
        z = (self.grid - x) / h
        kernel = np.exp(-0.5 * z * z) / (h * math.sqrt(2.0 * math.pi))
        total = _trapezoid(kernel, self.step)
        self.mass += kernel / total

    def density(self) -> np.ndarray:
        """Probability density sampled at the grid points."""
        if self.n == 0:
            return np.zeros(self.bins)
        return self.mass / self.n

    def score(self, x: float) -> float:
        """Comfort contribution: density at x relative to the peak, in [0, 1]."""
        x = float(x)
        if not math.isfinite(x):
            raise NonFiniteInput(f"cannot score {x!r}")
        if self.n == 0 or x < self.grid_min or x > self.grid_max:
            return 0.0
        peak = float(self.mass.max())
        if peak <= 0.0:
            return 0.0
        return float(np.interp(x, self.grid, self.mass)) / peak

    def _cdf(self) -> np.ndarray:
        segments = 0.5 * (self.mass[1:] + self.mass[:-1]) * self.step
        cdf = np.empty(self.bins)
        cdf[0] = 0.0
        np.cumsum(segments, out=cdf[1:])
        return cdf

    def percentile_vector(self, ps: Sequence[float]) -> list[float]:
        """Values at the given percentiles of the fitted distribution."""
        if self.n == 0:
            raise EmptyDensity("no observations")
        for p in ps:
            if not 0.0 < p < 100.0:
                raise ValueError(f"percentile {p} must be in (0, 100)")
        cdf = self._cdf()
        total = cdf[-1]
        if total <= 0.0:
            raise EmptyDensity("density carries no mass")
        out = []
        for p in ps:
            target = p / 100.0 * total
            i = int(np.searchsorted(cdf, target, side="left"))
            if i <= 0:
                out.append(float(self.grid[0]))
                continue
            i = min(i, self.bins - 1)
            lo, hi = cdf[i - 1], cdf[i]
            if hi <= lo:
                out.append(float(self.grid[i]))
            else:
                frac = (target - lo) / (hi - lo)
                out.append(float(self.grid[i - 1] + frac * self.step))
        return out

    def copy(self) -> "ContinuousDensity":
        dup = ContinuousDensity(self.bins)
        dup.grid = None if self.grid is None else self.grid.copy()
        dup.mass = self.mass.copy()
        dup.n = self.n
        dup._mean = self._mean
        dup._m2 = self._m2
        dup.bandwidth = self.bandwidth
        return dup

    def __eq__(self, other) -> bool:
        if not isinstance(other, ContinuousDensity):
            return NotImplemented
        if (self.grid is None) != (other.grid is None):
            return False
        return (
            self.bins == other.bins
            and self.n == other.n
            and self._mean == other._mean
            and self._m2 == other._m2
            and self.bandwidth == other.bandwidth
            and (self.grid is None or np.array_equal(self.grid, other.grid))
            and np.array_equal(self.mass, other.mass)
        )

    def to_dict(self) -> dict:
        return {
            "kind": "continuous",
            "bins": self.bins,
            "grid_min": None if self.grid is None else float(self.grid[0]),
            "grid_max": None if self.grid is None else float(self.grid[-1]),
            "n": self.n,
            "mean": self._mean,
            "m2": self._m2,
            "bandwidth": self.bandwidth,
            "mass": [float(v) for v in self.mass],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ContinuousDensity":
        dup = cls(int(data["bins"]))
        if data["grid_min"] is not None:
            dup.grid = np.linspace(
                float(data["grid_min"]), float(data["grid_max"]), dup.bins
            )
        dup.mass = np.asarray(data["mass"], dtype=np.float64)
        dup.n = int(data["n"])
        dup._mean = float(data["mean"])
        dup._m2 = float(data["m2"])
        dup.bandwidth = float(data["bandwidth"])
        return dup


def density_for(discrete: bool, bins: int = DEFAULT_BINS):
    return DiscreteDensity() if discrete else ContinuousDensity(bins)


def batch_discrete(items: Iterable[str]) -> DiscreteDensity:
    d = DiscreteDensity()
    for item in items:
        d.observe(item)
    return d
