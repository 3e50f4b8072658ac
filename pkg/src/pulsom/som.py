"""Kohonen lattice, best-matching-unit search, and the baseline training loop.

The lattice is a 2-D grid of units, each holding a weight vector in feature
space.  Winner search, the Gaussian neighborhood kernel, the linear decay
schedule and the quantization-error metric defined here are reused by every
model variant in the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatchError, DivergenceError

# Neighborhood influence is treated as zero beyond this many radii.
NEIGHBORHOOD_CUTOFF_SIGMA = 3.0


@dataclass
class UnitIndex:
    """Grid address of a lattice unit; ``flat`` is row-major."""

    row: int
    col: int
    flat: int

    @staticmethod
    def from_flat(flat: int, cols: int) -> "UnitIndex":
        return UnitIndex(flat // cols, flat % cols, flat)


@dataclass
class Schedule:
    """Linear decay schedule for learning rate and neighborhood radius."""

    epochs: int = 80
    lr_start: float = 0.9
    lr_end: float = 0.05
    radius_start: float = 1.0
    radius_end: float = 1.0

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if not (self.lr_start >= self.lr_end > 0):
            raise ValueError(
                f"need lr_start >= lr_end > 0, got {self.lr_start}, {self.lr_end}"
            )
        if not (self.radius_start >= self.radius_end > 0):
            raise ValueError(
                f"need radius_start >= radius_end > 0, got "
                f"{self.radius_start}, {self.radius_end}"
            )

    @staticmethod
    def for_lattice(rows: int, cols: int, epochs: int = 80,
                    lr_start: float = 0.9, lr_end: float = 0.05,
                    radius_end: float = 1.0) -> "Schedule":
        """Radius starts at half the larger lattice dimension."""
        start = max(max(rows, cols) / 2.0, radius_end)
        return Schedule(epochs, lr_start, lr_end, start, radius_end)


class Lattice:
    """2-D grid of units with weight vectors of a fixed feature dimension.

    Weights are stored as an (rows*cols, dim) float64 array in row-major
    unit order, so unit (r, c) lives at flat index r*cols + c.
    """

    def __init__(self, rows: int, cols: int, weights: np.ndarray, rng_seed: int = 0):
        if rows < 1 or cols < 1:
            raise ValueError(f"lattice shape must be positive, got {rows}x{cols}")
        weights = np.asarray(weights, dtype=np.float64)
        if weights.shape[0] != rows * cols or weights.ndim != 2:
            raise ValueError(
                f"weights shape {weights.shape} does not match {rows}x{cols} units"
            )
        if not np.all(np.isfinite(weights)):
            raise ValueError("weights must be finite")
        self.rows = rows
        self.cols = cols
        self.dim = weights.shape[1]
        self.weights = weights
        self.rng_seed = int(rng_seed)
        # Grid coordinates of every unit, for lattice-distance computations.
        rr, cc = np.divmod(np.arange(rows * cols), cols)
        self.coords = np.stack([rr, cc], axis=1).astype(np.float64)

    @property
    def n_units(self) -> int:
        return self.rows * self.cols

    def unit(self, flat: int) -> UnitIndex:
        return UnitIndex.from_flat(flat, self.cols)

    def grid_distances(self, unit: UnitIndex) -> np.ndarray:
        """Euclidean distance in lattice coordinates from ``unit`` to all units."""
        delta = self.coords - np.array([unit.row, unit.col], dtype=np.float64)
        return np.sqrt(np.sum(delta * delta, axis=1))

    def copy(self) -> "Lattice":
        return Lattice(self.rows, self.cols, self.weights.copy(), self.rng_seed)

    @staticmethod
    def random_init(rows: int, cols: int, data: np.ndarray, seed: int) -> "Lattice":
        """Uniform random weights in the per-dimension min/max range of ``data``."""
        data = np.asarray(data, dtype=np.float64)
        if data.ndim != 2 or data.shape[0] == 0:
            raise ValueError("data must be a non-empty (n, dim) array")
        lo = data.min(axis=0)
        hi = data.max(axis=0)
        rng = np.random.default_rng(seed)
        w = lo + (hi - lo) * rng.random((rows * cols, data.shape[1]))
        return Lattice(rows, cols, w, rng_seed=seed)


@dataclass
class EpochStats:
    epoch: int
    lr: float
    radius: float
    qe: float
    skipped: int = 0


@dataclass
class TrainingLog:
    """Per-epoch training trace; ``skipped`` counts no-winner presentations."""

    model: str
    rows: list[EpochStats] = field(default_factory=list)

    @property
    def total_skipped(self) -> int:
        return sum(r.skipped for r in self.rows)

    def to_csv(self, path) -> None:
        with open(path, "w") as f:
            f.write("epoch,lr,radius,qe\n")
            for r in self.rows:
                f.write(f"{r.epoch},{float(r.lr)!r},{float(r.radius)!r},"
                        f"{float(r.qe)!r}\n")


def _check_vector(x, dim: int) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (dim,):
        raise DimensionMismatchError(dim, x.shape[0] if x.ndim == 1 else x.shape)
    if not np.all(np.isfinite(x)):
        raise ValueError("input vector must be finite")
    return x


def find_bmu(x, lattice: Lattice) -> UnitIndex:
    """Best-matching unit: smallest squared Euclidean distance to x.

    Ties are broken by the smallest flat index (argmin returns the first
    minimum).
    """
    x = _check_vector(x, lattice.dim)
    delta = lattice.weights - x
    d2 = np.einsum("ij,ij->i", delta, delta)
    return lattice.unit(int(np.argmin(d2)))


def neighborhood(grid_dist: float, radius: float) -> float:
    """Gaussian kernel over lattice distance, zero beyond 3 radii."""
    if radius <= 0:
        raise ValueError(f"radius must be positive, got {radius}")
    if grid_dist > NEIGHBORHOOD_CUTOFF_SIGMA * radius:
        return 0.0
    return math.exp(-(grid_dist * grid_dist) / (2.0 * radius * radius))


def neighborhood_array(grid_dists: np.ndarray, radius: float) -> np.ndarray:
    """Vectorized ``neighborhood`` over an array of lattice distances."""
    if radius <= 0:
        raise ValueError(f"radius must be positive, got {radius}")
    h = np.exp(-(grid_dists * grid_dists) / (2.0 * radius * radius))
    h[grid_dists > NEIGHBORHOOD_CUTOFF_SIGMA * radius] = 0.0
    return h


def som_update(x, lattice: Lattice, bmu: UnitIndex, lr: float, radius: float) -> None:
    """Move every unit within the kernel cutoff toward x by lr * h * (x - w)."""
    if not (0.0 <= lr <= 1.0):
        raise ValueError(f"lr must be in [0, 1], got {lr}")
    x = _check_vector(x, lattice.dim)
    if lr == 0.0:
        return
    h = neighborhood_array(lattice.grid_distances(bmu), radius)
    lattice.weights += (lr * h)[:, None] * (x - lattice.weights)


def linear_decay(t: int, schedule: Schedule) -> tuple[float, float]:
    """Learning rate and radius at epoch t under linear interpolation."""
    if not (0 <= t <= schedule.epochs - 1):
        raise ValueError(f"epoch {t} outside [0, {schedule.epochs - 1}]")
    if schedule.epochs == 1:
        return schedule.lr_start, schedule.radius_start
    frac = t / (schedule.epochs - 1)
    lr = schedule.lr_start + (schedule.lr_end - schedule.lr_start) * frac
    radius = schedule.radius_start + (schedule.radius_end - schedule.radius_start) * frac
    return lr, radius


def quantization_error(data, lattice: Lattice) -> float:
    """Mean Euclidean distance from each sample to its BMU's weight vector."""
    data = np.asarray(data, dtype=np.float64)
    if data.ndim != 2 or data.shape[0] == 0:
        raise ValueError("data must be a non-empty (n, dim) array")
    if data.shape[1] != lattice.dim:
        raise DimensionMismatchError(lattice.dim, data.shape[1])
    total = 0.0
    for x in data:
        delta = lattice.weights - x
        d2 = np.einsum("ij,ij->i", delta, delta)
        total += math.sqrt(float(np.min(d2)))
    return total / data.shape[0]


def check_finite(lattice: Lattice, epoch: int) -> None:
    if not np.all(np.isfinite(lattice.weights)):
        raise DivergenceError(epoch)


def train_som(data, lattice: Lattice, schedule: Schedule, seed: int) -> TrainingLog:
    """Sequential SOM training: per-epoch shuffle, BMU search, neighborhood step.

    Deterministic for a fixed seed; returns the per-epoch quantization error.
    """
    data = np.asarray(data, dtype=np.float64)
    if data.ndim != 2 or data.shape[0] == 0:
        raise ValueError("data must be a non-empty (n, dim) array")
    if data.shape[1] != lattice.dim:
        raise DimensionMismatchError(lattice.dim, data.shape[1])
    rng = np.random.default_rng(seed)
    log = TrainingLog(model="SOM")
    for t in range(schedule.epochs):
        lr, radius = linear_decay(t, schedule)
        for i in rng.permutation(data.shape[0]):
            x = data[i]
            som_update(x, lattice, find_bmu(x, lattice), lr, radius)
        check_finite(lattice, t)
        log.rows.append(EpochStats(t, lr, radius, quantization_error(data, lattice)))
    return log
