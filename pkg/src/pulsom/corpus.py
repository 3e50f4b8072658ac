"""Corpus ingestion: NIST SPHERE audio, time-aligned transcriptions, segment
extraction with the middle-frames rule, the TIMIT macro-class table, a
synthetic sequence generator, and the dataset cache CSV.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import CorpusFormatError
from .mfcc import AudioBuffer, MfccConfig, mfcc_pipeline

SPHERE_MAGIC = "NIST_1A"

MACRO_CLASSES = {
    "affricates": ["jh", "ch"],
    "stops": ["b", "d", "g", "p", "t", "k", "dx", "q",
              "bcl", "dcl", "gcl", "pcl", "tcl", "kcl"],
    "others": ["pau", "epi", "h#"],
    "nasals": ["m", "n", "ng", "em", "en", "eng", "nx"],
    "semi-vowels": ["l", "r", "w", "y", "hh", "hv", "el"],
    "fricatives": ["s", "sh", "z", "zh", "f", "th", "v", "dh"],
    "vowels": ["iy", "ih", "eh", "ey", "ae", "aa", "aw", "ay", "ah", "ao",
               "oy", "ow", "uh", "uw", "ux", "er", "ax", "ix", "axr", "axh"],
}

_PHONE_TO_CLASS = {p: c for c, phones in MACRO_CLASSES.items() for p in phones}
# TIMIT transcription files spell this vowel with a hyphen.
_PHONE_ALIASES = {"ax-h": "axh"}


@dataclass
class Segment:
    """A labeled sample span inside one utterance."""

    utt_id: str
    label: str
    start_sample: int
    end_sample: int

    def __post_init__(self):
        if not (0 <= self.start_sample < self.end_sample):
            raise ValueError(
                f"invalid segment span [{self.start_sample}, {self.end_sample})"
            )


@dataclass
class SequenceSample:
    """An ordered stack of feature frames with a class label."""

    frames: np.ndarray
    label: str
    macro_class: str | None = None
    utt_id: str = ""

    def __post_init__(self):
        self.frames = np.asarray(self.frames, dtype=np.float64)
        if self.frames.ndim != 2:
            raise ValueError(f"frames must be 2-D, got shape {self.frames.shape}")


def macro_class(phone: str) -> str:
    """Macro class of a TIMIT phone symbol (slashes and case are ignored)."""
    key = phone.strip().strip("/").lower()
    key = _PHONE_ALIASES.get(key, key)
    try:
        return _PHONE_TO_CLASS[key]
    except KeyError:
        raise ValueError(f"unknown phone symbol {phone!r}") from None


def read_sphere(path) -> AudioBuffer:
    """Read a NIST SPHERE file with 16-bit PCM samples into [-1, 1] floats."""
    path = Path(path)
    with open(path, "rb") as f:
        raw = f.read()
    head = raw[:1024].decode("ascii", errors="replace").splitlines()
    if not head or head[0].strip() != SPHERE_MAGIC:
        raise CorpusFormatError(path, "not a SPHERE file (bad magic)")
    try:
        header_size = int(head[1].strip())
    except (IndexError, ValueError):
        raise CorpusFormatError(path, "missing or malformed header-size line") from None
    fields: dict[str, str] = {}
    for line in raw[:header_size].decode("ascii", errors="replace").splitlines()[2:]:
        line = line.strip()
        if line == "end_head":
            break
        if not line:
            continue
        parts = line.split(None, 2)
        if len(parts) == 3:
            fields[parts[0]] = parts[2]

    sample_rate = int(fields.get("sample_rate", 16000))
    channels = int(fields.get("channel_count", 1))
    n_bytes = int(fields.get("sample_n_bytes", 2))
    byte_format = fields.get("sample_byte_format", "01")
    coding = fields.get("sample_coding", "pcm")
    if channels != 1:
        raise CorpusFormatError(path, f"unsupported channel_count {channels}")
    if n_bytes != 2:
        raise CorpusFormatError(path, f"unsupported sample_n_bytes {n_bytes}")
    if not coding.startswith("pcm"):
        raise CorpusFormatError(path, f"unsupported sample_coding {coding!r}")
    if byte_format == "01":
        dtype = "<i2"
    elif byte_format == "10":
        dtype = ">i2"
    else:
        raise CorpusFormatError(path, f"unsupported sample_byte_format {byte_format!r}")

    payload = raw[header_size:]
    if "sample_count" in fields:
        expected = int(fields["sample_count"]) * 2
        if len(payload) < expected:
            raise CorpusFormatError(
                path, f"truncated data: expected {expected} bytes, found {len(payload)}"
            )
        payload = payload[:expected]
    if len(payload) % 2 != 0:
        payload = payload[:-1]
    samples = np.frombuffer(payload, dtype=dtype).astype(np.float64) / 32768.0
    return AudioBuffer(samples, sample_rate)


def write_sphere(path, samples: np.ndarray, sample_rate: int = 16000) -> None:
    """Write 16-bit little-endian SPHERE audio (fixture/round-trip helper)."""
    samples = np.asarray(samples)
    if samples.dtype != np.int16:
        samples = np.clip(np.round(samples * 32768.0), -32768, 32767).astype(np.int16)
    header_size = 1024
    lines = [
        SPHERE_MAGIC,
        f"   {header_size}",
        f"sample_rate -i {sample_rate}",
        "channel_count -i 1",
        "sample_n_bytes -i 2",
        "sample_byte_format -s2 01",
        f"sample_count -i {samples.shape[0]}",
        "sample_coding -s3 pcm",
        "end_head",
    ]
    head = "\n".join(lines) + "\n"
    head = head.encode("ascii")
    head += b" " * (header_size - len(head))
    with open(path, "wb") as f:
        f.write(head)
        f.write(samples.astype("<i2").tobytes())


def read_alignment(path, kind: str = "phn") -> list[Segment]:
    """Read a TIMIT-style alignment file of `start end label` sample spans."""
    if kind not in ("phn", "wrd"):
        raise ValueError(f"alignment kind must be 'phn' or 'wrd', got {kind!r}")
    path = Path(path)
    utt_id = path.stem
    segments: list[Segment] = []
    with open(path) as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 3:
                raise CorpusFormatError(path, f"expected `start end label`, got {line!r}",
                                        line=lineno)
            try:
                start, end = int(parts[0]), int(parts[1])
            except ValueError:
                raise CorpusFormatError(path, f"non-integer span in {line!r}",
                                        line=lineno) from None
            if start < 0 or start >= end:
                raise CorpusFormatError(path, f"invalid span {start}..{end}", line=lineno)
            if segments and start < segments[-1].end_sample:
                raise CorpusFormatError(
                    path, f"segment at {start} overlaps previous ending at "
                          f"{segments[-1].end_sample}", line=lineno)
            segments.append(Segment(utt_id, parts[2], start, end))
    return segments


def middle_frames(seg: Segment, mfcc_frames: np.ndarray, hop: int, frame_len: int,
                  k: int = 9) -> SequenceSample:
    """The k feature frames centered on the middle of a segment's span.

    Frame i covers samples [i*hop, i*hop + frame_len).  Segments spanning
    fewer than k frames get their edge frames replicated outward.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    mfcc_frames = np.asarray(mfcc_frames, dtype=np.float64)
    n_frames = mfcc_frames.shape[0]
    first = max(0, (seg.start_sample - frame_len) // hop + 1)
    last = min(n_frames - 1, (seg.end_sample - 1) // hop)
    if last < first:
        raise ValueError(
            f"segment {seg.label!r} [{seg.start_sample}, {seg.end_sample}) "
            f"overlaps zero frames"
        )
    count = last - first + 1
    center = first + count // 2
    idx = np.clip(np.arange(center - k // 2, center - k // 2 + k), first, last)
    return SequenceSample(mfcc_frames[idx], seg.label, utt_id=seg.utt_id)


def _separated_points(n: int, dim: int, separation: float,
                      rng: np.random.Generator) -> np.ndarray:
    """n points whose pairwise distances are all >= separation."""
    scale = separation
    points: list[np.ndarray] = []
    attempts = 0
    while len(points) < n:
        candidate = rng.normal(0.0, scale, dim)
        if all(np.linalg.norm(candidate - p) >= separation for p in points):
            points.append(candidate)
            attempts = 0
        else:
            attempts += 1
            if attempts > 200:
                scale *= 1.5
                attempts = 0
    return np.array(points)


def synth_class_means(n_classes: int, frames: int, dim: int, separation: float,
                      order_task: bool, seed: int) -> np.ndarray:
    """Per-class per-frame cluster means, shape (n_classes, frames, dim).

    Each class follows a smooth random-walk trajectory around its own base
    point; every cross-class pair of frame means is at least `separation`
    apart.  With order_task the two classes instead share one list of
    mutually separated frame means in opposite orders, so only temporal
    order distinguishes them.
    """
    if separation <= 0:
        raise ValueError(f"separation must be positive, got {separation}")
    if order_task and n_classes != 2:
        raise ValueError("order_task generates exactly 2 classes")
    rng = np.random.default_rng(np.random.SeedSequence(seed).spawn(2)[0])
    if order_task:
        base = _separated_points(frames, dim, separation, rng)
        return np.stack([base, base[::-1]])
    bases = _separated_points(n_classes, dim, 3.0 * separation, rng)
    step = separation / 10.0
    while True:
        drift = np.cumsum(rng.normal(0.0, step, (n_classes, frames, dim)), axis=1)
        means = bases[:, None, :] + drift
        if n_classes == 1 or _min_cross_class_distance(means) >= separation:
            return means


def _min_cross_class_distance(means: np.ndarray) -> float:
    n_classes = means.shape[0]
    best = math.inf
    for a in range(n_classes):
        for b in range(a + 1, n_classes):
            delta = means[a][:, None, :] - means[b][None, :, :]
            best = min(best, math.sqrt(float(np.min(np.sum(delta * delta, axis=2)))))
    return best


def synth_generate(n_classes: int, samples_per_class: int, dim: int = 12,
                   frames: int = 9, separation: float = 5.0,
                   order_task: bool = False, seed: int = 0) -> list[SequenceSample]:
    """Gaussian sequence clusters (unit variance) around separated frame means."""
    if n_classes < 1 or samples_per_class < 1 or dim < 1 or frames < 1:
        raise ValueError("class, sample, dim and frame counts must be positive")
    means = synth_class_means(n_classes, frames, dim, separation, order_task, seed)
    noise_rng = np.random.default_rng(np.random.SeedSequence(seed).spawn(2)[1])
    samples = []
    for c in range(means.shape[0]):
        label = f"class{c}"
        for i in range(samples_per_class):
            frames_arr = means[c] + noise_rng.standard_normal((frames, dim))
            samples.append(SequenceSample(frames_arr, label,
                                          utt_id=f"synth-{label}-{i:04d}"))
    return samples


def dataset_header(frames: int, dim: int) -> list[str]:
    cols = ["utt_id", "label", "macro_class"]
    for f in range(frames):
        cols.extend(f"f{f}c{c + 1}" for c in range(dim))
    return cols


def write_dataset_csv(samples: list[SequenceSample], path) -> None:
    """Dataset cache: one row per sample, feature columns f<frame>c<coeff>."""
    if not samples:
        raise ValueError("cannot write an empty dataset")
    frames, dim = samples[0].frames.shape
    with open(path, "w") as f:
        f.write(",".join(dataset_header(frames, dim)) + "\n")
        for s in samples:
            if s.frames.shape != (frames, dim):
                raise ValueError("all samples must share one frames/dim shape")
            values = [repr(float(x)) for x in s.frames.ravel()]
            f.write(",".join([s.utt_id, s.label, s.macro_class or ""] + values) + "\n")


def read_dataset_csv(path) -> list[SequenceSample]:
    path = Path(path)
    with open(path) as f:
        header = f.readline().strip().split(",")
        if header[:3] != ["utt_id", "label", "macro_class"]:
            raise CorpusFormatError(path, "not a dataset cache CSV (bad header)", line=1)
        feature_cols = header[3:]
        frames = max(int(c.split("c")[0][1:]) for c in feature_cols) + 1
        dim = len(feature_cols) // frames
        samples = []
        for lineno, line in enumerate(f, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 3 + frames * dim:
                raise CorpusFormatError(path, f"expected {3 + frames * dim} columns, "
                                              f"got {len(parts)}", line=lineno)
            arr = np.array([float(x) for x in parts[3:]]).reshape(frames, dim)
            samples.append(SequenceSample(arr, parts[1], parts[2] or None, parts[0]))
    return samples


def iter_utterances(root, dialects=None, speakers=None):
    """Yield (utt_path_without_suffix, dialect, speaker) in sorted path order."""
    root = Path(root)
    if not root.is_dir():
        raise FileNotFoundError(f"corpus root {root} does not exist")
    for dialect_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        if dialects and dialect_dir.name.lower() not in dialects:
            continue
        for speaker_dir in sorted(p for p in dialect_dir.iterdir() if p.is_dir()):
            if speakers and speaker_dir.name.lower() not in speakers:
                continue
            for wav in sorted(speaker_dir.iterdir()):
                if wav.suffix.lower() == ".wav":
                    yield wav.with_suffix(""), dialect_dir.name, speaker_dir.name


def build_corpus_dataset(root, mfcc_cfg: MfccConfig | None = None, unit: str = "phn",
                         k: int = 9, dialects=None, speakers=None,
                         collect_frames: bool = False):
    """Extract one SequenceSample per labeled segment under a corpus root.

    Returns (samples, stats) where stats counts utterances, segments and
    segments skipped for overlapping no whole frame.  With collect_frames
    the per-utterance coefficient matrices come back in
    stats["utterance_frames"] as (utt_id, matrix) pairs.
    """
    if mfcc_cfg is None:
        mfcc_cfg = MfccConfig()
    dialects = {d.lower() for d in dialects} if dialects else None
    speakers = {s.lower() for s in speakers} if speakers else None
    samples: list[SequenceSample] = []
    stats = {"utterances": 0, "segments": 0, "skipped_segments": 0}
    if collect_frames:
        stats["utterance_frames"] = []
    for stem, _dialect, _speaker in iter_utterances(root, dialects, speakers):
        wav = _sibling(stem, ".wav")
        ali = _sibling(stem, f".{unit}")
        if ali is None:
            continue
        buf = read_sphere(wav)
        feats = mfcc_pipeline(buf, mfcc_cfg)
        stats["utterances"] += 1
        utt_id = f"{stem.parent.name}/{stem.name}"
        if collect_frames:
            stats["utterance_frames"].append((utt_id, feats))
        for seg in read_alignment(ali, kind=unit):
            stats["segments"] += 1
            try:
                sample = middle_frames(seg, feats, mfcc_cfg.hop, mfcc_cfg.frame_len, k)
            except ValueError:
                stats["skipped_segments"] += 1
                continue
            if unit == "phn":
                try:
                    sample.macro_class = macro_class(seg.label)
                except ValueError as exc:
                    raise CorpusFormatError(ali, str(exc)) from None
            sample.utt_id = utt_id
            samples.append(sample)
    return samples, stats


def _sibling(stem: Path, suffix: str):
    for candidate in (stem.with_suffix(suffix), stem.with_suffix(suffix.upper())):
        if candidate.exists():
            return candidate
    return None
