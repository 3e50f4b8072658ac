"""Run configuration: a flat `section.key = value` text format with a strict
key registry (unknown keys are rejected), typed parsing, and builders for
the domain objects a run needs.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .coding import SsomConfig
from .errors import ConfigError
from .mfcc import MfccConfig
from .som import Schedule
from .ssom import LateralKernel
from .stdp import StdpRule, StdpWindow

AUTO = "auto"


@dataclass
class Key:
    name: str
    kind: str  # int | float | bool | str | choice | float_or_auto
    default: object
    help: str
    choices: tuple = ()


REGISTRY = [
    Key("run.model", "choice", "som", "model to train/evaluate",
        ("som", "ssom", "rssom", "lin")),
    Key("run.seed", "int", 0, "seed for initialization, shuffling and synthesis"),
    Key("run.outdir", "str", None, "directory for all outputs"),
    Key("lattice.rows", "int", 8, "lattice rows"),
    Key("lattice.cols", "int", 8, "lattice columns"),
    Key("schedule.epochs", "int", 80, "training epochs"),
    Key("schedule.lr_start", "float", 0.9, "initial learning rate"),
    Key("schedule.lr_end", "float", 0.05, "final learning rate"),
    Key("schedule.radius_start", "float_or_auto", AUTO,
        "initial neighborhood radius; auto = half the larger lattice dimension"),
    Key("schedule.radius_end", "float", 1.0, "final neighborhood radius"),
    Key("stdp.variant", "choice", "input", "plasticity rule",
        ("additive", "panchev", "soula", "input")),
    Key("stdp.a_plus", "float", 1.0, "window amplitude, potentiating side"),
    Key("stdp.a_minus", "float", 1.0, "window amplitude, depressing side"),
    Key("stdp.tau_plus_ms", "float", 10.0, "window time constant, potentiating side"),
    Key("stdp.tau_minus_ms", "float", 10.0, "window time constant, depressing side"),
    Key("stdp.eta", "float", 0.1, "plasticity learning rate"),
    Key("stdp.w_max", "float", 1.0, "weight ceiling"),
    Key("stdp.flip_branches", "bool", True,
        "put the potentiating form on the causal (pre-before-post) side"),
    Key("ssom.t_max_ms", "float", 20.0, "latency-encoding horizon"),
    Key("ssom.t_ref_ms", "float", 15.0, "reference time bounding learning"),
    Key("ssom.s_radius", "float", 1.0,
        "spatial learning radius outside training (training follows the schedule)"),
    Key("ssom.sim_step_ms", "float", 1.0, "simulation step"),
    Key("ssom.tau_psp_ms", "float", 5.0, "postsynaptic trace time constant"),
    Key("lateral.excite_radius", "float_or_auto", AUTO,
        "excitatory lateral radius; auto = track the decayed schedule radius"),
    Key("lateral.excite_gain", "float", 0.5, "pull toward the winner's firing time"),
    Key("lateral.inhibit_gain", "float", 0.1, "delay per lattice unit beyond the radius"),
    Key("rssom.alpha", "float", 0.5, "leaking coefficient of the difference vectors"),
    Key("lin.lambda", "float", 0.5, "memory depth of the integrator potentials"),
    Key("lin.scale_input_by_lambda", "bool", False,
        "scale the matching term by lambda as well"),
    Key("som.concat", "bool", False,
        "plain SOM on concatenated whole-sequence vectors instead of frames"),
    Key("mfcc.preemph_a", "float", 0.95, "pre-emphasis coefficient"),
    Key("mfcc.frame_len", "int", 256, "frame length in samples"),
    Key("mfcc.hop", "int", 128, "hop in samples (frame_len/2)"),
    Key("mfcc.n_filters", "int", 26, "mel filterbank size"),
    Key("mfcc.n_coeffs", "int", 12, "cepstral coefficients per frame"),
    Key("mfcc.fft_size", "int", 256, "FFT size"),
    Key("mfcc.use_power", "bool", True, "power spectrum into the filterbank "
                                        "(false = magnitude)"),
    Key("corpus.root", "str", "", "corpus root directory (features command)"),
    Key("corpus.unit", "choice", "phn", "segment unit", ("phn", "wrd")),
    Key("corpus.dialects", "str", "", "comma-separated dialect-directory filter"),
    Key("corpus.speakers", "str", "", "comma-separated speaker-directory filter"),
    Key("corpus.frames", "int", 9, "frames extracted per segment"),
    Key("data.train_csv", "str", "", "training dataset cache (train/eval commands)"),
    Key("data.test_csv", "str", "", "evaluation dataset cache (eval command)"),
    Key("synth.classes", "int", 3, "synthetic class count"),
    Key("synth.samples_per_class", "int", 50, "synthetic sequences per class"),
    Key("synth.dim", "int", 12, "synthetic feature dimension"),
    Key("synth.frames", "int", 9, "synthetic frames per sequence"),
    Key("synth.separation", "float", 5.0, "minimum distance between cluster means"),
    Key("synth.order_task", "bool", False,
        "two classes sharing one frame set in opposite orders"),
    Key("eval.frame_vote", "bool", False,
        "per-frame majority vote instead of the terminal winner"),
    Key("eval.class_map", "choice", "identity", "label-to-class mapping for reports",
        ("identity", "timit_macro")),
]

_BY_NAME = {k.name: k for k in REGISTRY}


def _parse_value(key: Key, raw: str):
    try:
        if key.kind == "int":
            return int(raw)
        if key.kind == "float":
            return float(raw)
        if key.kind == "float_or_auto":
            return AUTO if raw == AUTO else float(raw)
        if key.kind == "bool":
            if raw not in ("true", "false"):
                raise ValueError(raw)
            return raw == "true"
        if key.kind == "choice":
            if raw not in key.choices:
                raise ValueError(raw)
            return raw
        return raw
    except ValueError:
        expect = key.kind if key.kind != "choice" else f"one of {key.choices}"
        raise ConfigError(
            f"bad value {raw!r} for {key.name} (expected {expect})") from None


def parse_config_text(text: str, source: str = "<config>") -> dict:
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{source}:{lineno}: expected `section.key = value`, "
                              f"got {line.strip()!r}")
        name, _, raw = stripped.partition("=")
        name = name.strip()
        raw = raw.strip()
        if name not in _BY_NAME:
            raise ConfigError(f"{source}:{lineno}: unknown config key {name!r}")
        if name in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {name!r}")
        values[name] = _parse_value(_BY_NAME[name], raw)
    return values


class RunConfig:
    """A fully resolved configuration: explicit keys plus module defaults."""

    def __init__(self, values: dict):
        self.values = {k.name: k.default for k in REGISTRY}
        self.values.update(values)

    @staticmethod
    def load(path) -> "RunConfig":
        path = Path(path)
        if not path.is_file():
            raise FileNotFoundError(f"config file {path} does not exist")
        return RunConfig(parse_config_text(path.read_text(), source=str(path)))

    def __getitem__(self, name: str):
        return self.values[name]

    def require(self, name: str):
        v = self.values[name]
        if v in (None, ""):
            raise ConfigError(f"config key {name} is required for this command")
        return v

    def outdir(self) -> Path:
        return Path(self.require("run.outdir"))

    def schedule(self) -> Schedule:
        rows, cols = self["lattice.rows"], self["lattice.cols"]
        start = self["schedule.radius_start"]
        try:
            if start == AUTO:
                return Schedule.for_lattice(
                    rows, cols, epochs=self["schedule.epochs"],
                    lr_start=self["schedule.lr_start"], lr_end=self["schedule.lr_end"],
                    radius_end=self["schedule.radius_end"])
            return Schedule(self["schedule.epochs"], self["schedule.lr_start"],
                            self["schedule.lr_end"], start, self["schedule.radius_end"])
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def stdp_rule(self) -> StdpRule:
        try:
            window = StdpWindow(self["stdp.a_plus"], self["stdp.a_minus"],
                                self["stdp.tau_plus_ms"], self["stdp.tau_minus_ms"])
            return StdpRule(self["stdp.variant"], self["stdp.eta"], self["stdp.w_max"],
                            window, self["stdp.flip_branches"])
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def ssom_config(self) -> SsomConfig:
        try:
            return SsomConfig(self["ssom.t_max_ms"], self["ssom.t_ref_ms"],
                              self["ssom.s_radius"], self["ssom.sim_step_ms"],
                              self["ssom.tau_psp_ms"])
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def lateral_kernel(self) -> LateralKernel:
        radius = self["lateral.excite_radius"]
        try:
            return LateralKernel(None if radius == AUTO else radius,
                                 self["lateral.excite_gain"],
                                 self["lateral.inhibit_gain"])
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def mfcc_config(self) -> MfccConfig:
        try:
            return MfccConfig(self["mfcc.preemph_a"], self["mfcc.frame_len"],
                              self["mfcc.hop"], self["mfcc.n_filters"],
                              self["mfcc.n_coeffs"], self["mfcc.fft_size"],
                              self["mfcc.use_power"])
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def effective_text(self) -> str:
        lines = []
        for key in REGISTRY:
            v = self.values[key.name]
            if isinstance(v, bool):
                v = "true" if v else "false"
            lines.append(f"{key.name} = {v}")
        return "\n".join(lines) + "\n"


def registry_help() -> str:
    """One line per config key, for --help."""
    width = max(len(k.name) for k in REGISTRY)
    lines = ["config keys (section.key = value):"]
    for k in REGISTRY:
        default = k.default
        if isinstance(default, bool):
            default = "true" if default else "false"
        shown = "(required)" if default in (None, "") else f"[{default}]"
        lines.append(f"  {k.name.ljust(width)}  {k.help} {shown}")
    return "\n".join(lines)
