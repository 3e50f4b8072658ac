"""Spiking self-organizing map: earliest-firing winner selection, lateral
firing-time interactions, and STDP weight adaptation gated by a spatial
area and a temporal reference window.

Weights live in normalized feature space [0, 1]; inputs arrive as latency
codes.  A unit's candidate firing time grows with its mean squared mismatch
against the input, so the best-matching unit fires first and the spiking
winner coincides with the classic BMU.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .coding import EncodedInput, SsomConfig, decode_latency, encode_latency, normalize
from .errors import DimensionMismatchError
from .som import (
    EpochStats,
    Lattice,
    Schedule,
    TrainingLog,
    UnitIndex,
    check_finite,
    linear_decay,
    neighborhood_array,
    quantization_error,
)
from .stdp import StdpRule, apply_rule_array


@dataclass
class LateralKernel:
    """Mexican-hat lateral interaction on firing times.

    Units within excite_radius of the winner are pulled toward its firing
    time; units beyond it are delayed.  excite_radius=None tracks the
    decayed schedule radius during training.
    """

    excite_radius: float | None = None
    excite_gain: float = 0.5
    inhibit_gain: float = 0.1

    def __post_init__(self):
        if self.excite_radius is not None and self.excite_radius <= 0:
            raise ValueError(f"excite_radius must be positive, got {self.excite_radius}")
        if self.excite_gain <= 0 or self.inhibit_gain <= 0:
            raise ValueError("lateral gains must be positive")


@dataclass
class FiringRecord:
    """Per-unit firing times for one presentation; silent units carry no spike."""

    times: np.ndarray
    silent: np.ndarray
    winner: UnitIndex | None


def frames_of(sample) -> np.ndarray:
    """Frames of a sequence sample (or a bare (n_frames, dim) array)."""
    return np.asarray(getattr(sample, "frames", sample), dtype=np.float64)


def feature_ranges(sequences) -> tuple[np.ndarray, np.ndarray]:
    """Per-dimension min/max over every frame of every sequence."""
    stacked = np.concatenate([frames_of(s) for s in sequences], axis=0)
    return stacked.min(axis=0), stacked.max(axis=0)


def normalized_init(rows: int, cols: int, sequences, seed: int) -> Lattice:
    """Random lattice in the normalized [0, 1] feature space of the data."""
    lo, hi = feature_ranges(sequences)
    stacked = np.concatenate([frames_of(s) for s in sequences], axis=0)
    norm = normalize(stacked, lo, hi)
    return Lattice.random_init(rows, cols, norm, seed)


def mismatch_latencies(v: np.ndarray, lattice: Lattice, t_max: float) -> np.ndarray:
    """Candidate firing times: t_max times the per-dimension mean squared
    mismatch between the normalized input and the (clamped) weights."""
    w = np.clip(lattice.weights, 0.0, 1.0)
    delta = w - v
    msd = np.einsum("ij,ij->i", delta, delta) / lattice.dim
    return t_max * msd


def compute_firing_times(e: EncodedInput, lattice: Lattice, cfg: SsomConfig) -> FiringRecord:
    """Latency-based winner selection over the whole lattice.

    Units whose candidate firing time exceeds t_ref stay silent; the winner
    is the earliest firing unit (lowest flat index on ties), or None if the
    entire map is silent.
    """
    if e.spike_times.shape[0] != lattice.dim:
        raise DimensionMismatchError(lattice.dim, e.spike_times.shape[0])
    v = decode_latency(e)
    times = mismatch_latencies(v, lattice, cfg.t_max)
    silent = times > cfg.t_ref
    if np.all(silent):
        return FiringRecord(times, silent, None)
    masked = np.where(silent, np.inf, times)
    winner = lattice.unit(int(np.argmin(masked)))
    return FiringRecord(times, silent, winner)


def apply_lateral(record: FiringRecord, kernel: LateralKernel, lattice: Lattice,
                  cfg: SsomConfig) -> FiringRecord:
    """Pull nearby firing times toward the winner's; delay remote ones.

    The winner itself is untouched.  Delayed units are capped at t_max and
    re-checked against t_ref, so inhibition can silence them.
    """
    if record.winner is None:
        raise ValueError("apply_lateral requires a record with a winner")
    if kernel.excite_radius is None:
        raise ValueError("excite_radius must be resolved before applying the kernel")
    r = kernel.excite_radius
    times = record.times.copy()
    silent = record.silent.copy()
    d = lattice.grid_distances(record.winner)
    t_win = times[record.winner.flat]

    active = ~silent
    active[record.winner.flat] = False

    near = active & (d <= r)
    factor = np.clip(kernel.excite_gain * np.exp(-(d * d) / (2.0 * r * r)), 0.0, 1.0)
    times[near] += factor[near] * (t_win - times[near])

    far = active & (d > r)
    times[far] = np.minimum(times[far] + kernel.inhibit_gain * (d[far] - r) * cfg.sim_step,
                            cfg.t_max)
    silent |= far & (times > cfg.t_ref)
    return FiringRecord(times, silent, record.winner)


def ssom_learn(e: EncodedInput, lattice: Lattice, record: FiringRecord,
               cfg: SsomConfig, rule: StdpRule, lr_scale: float) -> None:
    """STDP adaptation of the units inside the spatial and temporal gates.

    For each gated unit and each input component, the spike-time difference
    (input spike minus unit firing) drives the configured plasticity rule;
    the effective learning rate is scaled by the neighborhood kernel around
    the winner.
    """
    if record.winner is None:
        return
    if lr_scale == 0.0:
        return
    v = decode_latency(e)
    t_spike = e.spike_times
    d = lattice.grid_distances(record.winner)
    gate = (~record.silent) & (record.times <= cfg.t_ref) & (d <= cfg.s_radius)
    if not np.any(gate):
        return
    idx = np.flatnonzero(gate)
    h = neighborhood_array(d[idx], cfg.s_radius)
    gain = (lr_scale * h)[:, None]
    dt = t_spike[None, :] - record.times[idx][:, None]
    w = lattice.weights[idx]
    lattice.weights[idx] = apply_rule_array(w, v[None, :], dt, rule, gain)


def train_ssom(data, lattice: Lattice, schedule: Schedule, cfg: SsomConfig,
               rule: StdpRule, seed: int,
               kernel: LateralKernel | None = None,
               lo: np.ndarray | None = None,
               hi: np.ndarray | None = None) -> TrainingLog:
    """Train the spiking map on sequence samples, frame by frame.

    Frames are presented one at a time in sequence order with no state kept
    between them; sequence order is reshuffled each epoch from the seed.
    Presentations where every unit stays silent are skipped and counted.
    Quantization error is logged per epoch on the decoded (de-normalized)
    weights against the raw frames.
    """
    if kernel is None:
        kernel = LateralKernel()
    sequences = [frames_of(s) for s in data]
    if not sequences:
        raise ValueError("training data must be non-empty")
    if lo is None or hi is None:
        lo, hi = feature_ranges(sequences)
    all_frames = np.concatenate(sequences, axis=0)
    span = hi - lo
    rng = np.random.default_rng(seed)
    log = TrainingLog(model="SSOM")
    for t in range(schedule.epochs):
        lr, radius = linear_decay(t, schedule)
        cfg_t = replace(cfg, s_radius=radius)
        kernel_t = kernel if kernel.excite_radius is not None else replace(kernel, excite_radius=radius)
        skipped = 0
        for si in rng.permutation(len(sequences)):
            for frame in sequences[si]:
                e = encode_latency(frame, lo, hi, cfg.t_max)
                rec = compute_firing_times(e, lattice, cfg_t)
                if rec.winner is None:
                    skipped += 1
                    continue
                rec = apply_lateral(rec, kernel_t, lattice, cfg_t)
                ssom_learn(e, lattice, rec, cfg_t, rule, lr)
        check_finite(lattice, t)
        decoded = Lattice(lattice.rows, lattice.cols,
                          lo + np.clip(lattice.weights, 0.0, 1.0) * span, lattice.rng_seed)
        log.rows.append(EpochStats(t, lr, radius, quantization_error(all_frames, decoded),
                                   skipped))
    return log
