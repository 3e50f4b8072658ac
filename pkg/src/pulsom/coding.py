"""Temporal (latency) coding of feature vectors into input spike times.

Each feature component is normalized against corpus-wide per-dimension
ranges and mapped to a time-to-first-spike: the larger the value, the
earlier the spike.  A causal exponential trace models the postsynaptic
potential a spike induces downstream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass
class SsomConfig:
    """Timing parameters of the spiking winner mechanism.

    t_max is the encoding horizon; t_ref the reference time bounding the
    temporal learning window; s_radius the spatial learning radius in
    lattice units; sim_step the simulation step; tau_psp the trace decay.
    """

    t_max: float = 20.0
    t_ref: float = 15.0
    s_radius: float = 1.0
    sim_step: float = 1.0
    tau_psp: float = 5.0

    def __post_init__(self):
        if not (0 < self.sim_step <= self.t_ref <= self.t_max):
            raise ValueError(
                f"need 0 < sim_step <= t_ref <= t_max, got "
                f"{self.sim_step}, {self.t_ref}, {self.t_max}"
            )
        if self.s_radius <= 0:
            raise ValueError(f"s_radius must be positive, got {self.s_radius}")
        if self.tau_psp <= 0:
            raise ValueError(f"tau_psp must be positive, got {self.tau_psp}")


@dataclass
class EncodedInput:
    """Spike times of one presented vector, plus the source vector itself."""

    spike_times: np.ndarray
    t_max: float
    source: np.ndarray


def normalize(x, lo, hi) -> np.ndarray:
    """Map x into [0, 1] per component using the ranges [lo, hi].

    Out-of-range values are clamped; degenerate components (lo == hi) map to
    0.5 so they encode at the middle of the horizon.
    """
    x = np.asarray(x, dtype=np.float64)
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    span = hi - lo
    degenerate = span == 0
    safe = np.where(degenerate, 1.0, span)
    v = np.clip((x - lo) / safe, 0.0, 1.0)
    return np.where(degenerate, 0.5, v)


def encode_latency(x, lo, hi, t_max: float) -> EncodedInput:
    """Time-to-first-spike code: component at the range max fires at 0,
    at the range min fires at t_max."""
    x = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise ValueError("cannot encode non-finite input")
    if np.any(np.asarray(lo) > np.asarray(hi)):
        raise ValueError("lo must be <= hi per component")
    v = normalize(x, lo, hi)
    return EncodedInput(spike_times=t_max * (1.0 - v), t_max=t_max, source=x.copy())


def decode_latency(e: EncodedInput) -> np.ndarray:
    """Recover the normalized vector from spike times: v = 1 - t/t_max."""
    return 1.0 - e.spike_times / e.t_max


def psp_trace(spike_time: float, t: float, tau_psp: float) -> float:
    """Causal decaying trace of a spike: 0 before it, exp decay after."""
    if tau_psp <= 0:
        raise ValueError(f"tau_psp must be positive, got {tau_psp}")
    if t < spike_time:
        return 0.0
    return math.exp(-(t - spike_time) / tau_psp)
