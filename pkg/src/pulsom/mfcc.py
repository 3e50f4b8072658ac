"""MFCC speech front-end: pre-emphasis, Hamming-windowed overlapping frames,
power spectrum, triangular mel filterbank, log compression and a DCT.

Defaults follow the common 16 kHz recipe: 256-sample frames (16 ms) with 50%
overlap, 26 mel filters, 12 cepstral coefficients with the mean term dropped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.fft import dct as _scipy_dct

LOG_FLOOR = 1e-10


@dataclass
class AudioBuffer:
    """Mono audio samples in [-1, 1] at a fixed sample rate."""

    samples: np.ndarray
    sample_rate: int = 16000

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("audio samples must be finite")


@dataclass
class MfccConfig:
    preemph_a: float = 0.95
    frame_len: int = 256
    hop: int = 128
    n_filters: int = 26
    n_coeffs: int = 12
    fft_size: int = 256
    use_power: bool = True

    def __post_init__(self):
        if not (0.9 <= self.preemph_a <= 1.0):
            raise ValueError(f"preemph_a must be in [0.9, 1.0], got {self.preemph_a}")
        if self.hop != self.frame_len // 2:
            raise ValueError(f"hop must be frame_len/2, got {self.hop} vs {self.frame_len}")
        if self.n_coeffs > self.n_filters:
            raise ValueError("n_coeffs cannot exceed n_filters")
        if self.fft_size < self.frame_len:
            raise ValueError("fft_size must be >= frame_len")


def preemphasis(buf: AudioBuffer, a: float) -> AudioBuffer:
    """First-order high-pass filter y[n] = s[n] - a*s[n-1]; y[0] = s[0]."""
    if not (0.9 <= a <= 1.0):
        raise ValueError(f"pre-emphasis coefficient must be in [0.9, 1.0], got {a}")
    s = buf.samples
    if s.shape[0] == 0:
        raise ValueError("cannot pre-emphasize an empty buffer")
    y = np.empty_like(s)
    y[0] = s[0]
    y[1:] = s[1:] - a * s[:-1]
    return AudioBuffer(y, buf.sample_rate)


def frame_signal(buf: AudioBuffer, frame_len: int, hop: int) -> np.ndarray:
    """Split into overlapping frames starting at multiples of hop; trailing
    samples that do not fill a frame are dropped."""
    s = buf.samples
    if s.shape[0] < frame_len:
        raise ValueError(
            f"buffer of {s.shape[0]} samples is shorter than one frame ({frame_len})"
        )
    count = (s.shape[0] - frame_len) // hop + 1
    return np.stack([s[i * hop:i * hop + frame_len] for i in range(count)])


def hamming_window(n: int, big_n: int) -> float:
    """Hamming coefficient 0.54 - 0.46*cos(2*pi*n/(N-1))."""
    if big_n <= 1:
        raise ValueError(f"window length must exceed 1, got {big_n}")
    if not (0 <= n < big_n):
        raise ValueError(f"sample index {n} outside window of length {big_n}")
    return 0.54 - 0.46 * math.cos(2.0 * math.pi * n / (big_n - 1))


def hamming_vector(big_n: int) -> np.ndarray:
    n = np.arange(big_n)
    return 0.54 - 0.46 * np.cos(2.0 * np.pi * n / (big_n - 1))


def power_spectrum(frame: np.ndarray, fft_size: int) -> np.ndarray:
    """Squared magnitude of the DFT, bins 0..fft_size/2 (frame zero-padded)."""
    frame = np.asarray(frame, dtype=np.float64)
    if frame.shape[0] > fft_size:
        raise ValueError(f"frame of {frame.shape[0]} samples exceeds fft_size {fft_size}")
    spec = np.fft.rfft(frame, n=fft_size)
    return np.abs(spec) ** 2


def mel_scale(f: float) -> float:
    """Hz to mel."""
    if f < 0:
        raise ValueError(f"frequency must be non-negative, got {f}")
    return 2595.0 * math.log10(1.0 + f / 700.0)


def mel_inverse(m: float) -> float:
    """Mel to Hz."""
    return 700.0 * (10.0 ** (m / 2595.0) - 1.0)


def mel_filter_matrix(sample_rate: int, fft_size: int, n_filters: int) -> np.ndarray:
    """Triangular filters with centers equally spaced on the mel axis.

    Edges are snapped to FFT bins so every triangle peaks at exactly 1;
    adjacent centers landing on the same bin mean the filterbank is too
    dense for this FFT size.
    """
    n_bins = fft_size // 2 + 1
    mel_points = np.linspace(0.0, mel_scale(sample_rate / 2.0), n_filters + 2)
    hz_points = np.array([mel_inverse(m) for m in mel_points])
    bins = np.floor((fft_size + 1) * hz_points / sample_rate).astype(int)
    bins = np.minimum(bins, n_bins - 1)
    if np.any(bins[2:] == bins[1:-1]):
        raise ValueError(
            f"{n_filters} filters collide on a {fft_size}-point FFT; reduce n_filters"
        )
    fb = np.zeros((n_filters, n_bins))
    for j in range(n_filters):
        left, center, right = bins[j], bins[j + 1], bins[j + 2]
        for i in range(left, center):
            fb[j, i] = (i - left) / (center - left)
        for i in range(center, right):
            fb[j, i] = (right - i) / (right - center)
    return fb


def mel_filterbank(spectrum: np.ndarray, cfg: MfccConfig,
                   sample_rate: int = 16000,
                   filters: np.ndarray | None = None) -> np.ndarray:
    """Log10 energies of the mel filterbank applied to a spectrum.

    A small floor keeps silence finite at log10(1e-10) = -10.
    """
    if filters is None:
        filters = mel_filter_matrix(sample_rate, cfg.fft_size, cfg.n_filters)
    energies = filters @ np.asarray(spectrum, dtype=np.float64)
    return np.log10(np.maximum(energies, LOG_FLOOR))


def dct_coeffs(log_energies: np.ndarray, n_coeffs: int) -> np.ndarray:
    """Orthonormal type-II DCT; the mean coefficient is dropped and the next
    n_coeffs returned."""
    log_energies = np.asarray(log_energies, dtype=np.float64)
    if n_coeffs > log_energies.shape[0]:
        raise ValueError("n_coeffs cannot exceed the number of filter energies")
    full = _scipy_dct(log_energies, type=2, norm="ortho")
    return full[1:n_coeffs + 1]


def write_frames_csv(utterance_frames, path) -> None:
    """Per-frame feature rows `utt_id,frame_idx,c1..c<n>` for a list of
    (utt_id, coefficient-matrix) pairs."""
    utterance_frames = list(utterance_frames)
    if not utterance_frames:
        raise ValueError("no utterances to write")
    n_coeffs = utterance_frames[0][1].shape[1]
    with open(path, "w") as f:
        cols = ",".join(f"c{i + 1}" for i in range(n_coeffs))
        f.write(f"utt_id,frame_idx,{cols}\n")
        for utt_id, frames in utterance_frames:
            for i, row in enumerate(frames):
                values = ",".join(repr(float(x)) for x in row)
                f.write(f"{utt_id},{i},{values}\n")


def mfcc_pipeline(buf: AudioBuffer, cfg: MfccConfig | None = None) -> np.ndarray:
    """Full front-end: one row of cepstral coefficients per frame."""
    if cfg is None:
        cfg = MfccConfig()
    emphasized = preemphasis(buf, cfg.preemph_a)
    frames = frame_signal(emphasized, cfg.frame_len, cfg.hop)
    window = hamming_vector(cfg.frame_len)
    filters = mel_filter_matrix(buf.sample_rate, cfg.fft_size, cfg.n_filters)
    out = np.empty((frames.shape[0], cfg.n_coeffs))
    for i, frame in enumerate(frames):
        spec = power_spectrum(frame * window, cfg.fft_size)
        if not cfg.use_power:
            spec = np.sqrt(spec)
        out[i] = dct_coeffs(mel_filterbank(spec, cfg, buf.sample_rate, filters),
                            cfg.n_coeffs)
    return out
