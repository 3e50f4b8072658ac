import pytest

from pulsom.config import AUTO, REGISTRY, RunConfig, parse_config_text, registry_help
from pulsom.errors import ConfigError


class TestParsing:
    def test_basic_lines(self):
        values = parse_config_text(
            "run.model = ssom\n"
            "lattice.rows = 10\n"
            "stdp.eta = 0.2\n"
            "stdp.flip_branches = false\n")
        assert values["run.model"] == "ssom"
        assert values["lattice.rows"] == 10
        assert values["stdp.eta"] == 0.2
        assert values["stdp.flip_branches"] is False

    def test_comments_and_blank_lines(self):
        values = parse_config_text("# a comment\n\nrun.seed = 7  # trailing\n")
        assert values["run.seed"] == 7

    def test_unknown_key_named(self):
        with pytest.raises(ConfigError, match="run.modle"):
            parse_config_text("run.modle = som\n")

    def test_duplicate_key(self):
        with pytest.raises(ConfigError, match="duplicate"):
            parse_config_text("run.seed = 1\nrun.seed = 2\n")

    def test_bad_int(self):
        with pytest.raises(ConfigError, match="lattice.rows"):
            parse_config_text("lattice.rows = eight\n")

    def test_bad_choice(self):
        with pytest.raises(ConfigError, match="run.model"):
            parse_config_text("run.model = gng\n")

    def test_bad_bool(self):
        with pytest.raises(ConfigError, match="synth.order_task"):
            parse_config_text("synth.order_task = yes\n")

    def test_missing_equals(self):
        with pytest.raises(ConfigError, match="section.key"):
            parse_config_text("run.model som\n")

    def test_auto_values(self):
        values = parse_config_text("schedule.radius_start = auto\n"
                                   "lateral.excite_radius = 2.5\n")
        assert values["schedule.radius_start"] == AUTO
        assert values["lateral.excite_radius"] == 2.5


class TestRunConfig:
    def test_defaults_fill_in(self):
        cfg = RunConfig({})
        assert cfg["schedule.epochs"] == 80
        assert cfg["stdp.variant"] == "input"
        assert cfg["stdp.flip_branches"] is True

    def test_require_flags_missing(self):
        cfg = RunConfig({})
        with pytest.raises(ConfigError, match="run.outdir"):
            cfg.require("run.outdir")

    def test_schedule_auto_radius(self):
        cfg = RunConfig({"lattice.rows": 8, "lattice.cols": 6})
        sched = cfg.schedule()
        assert sched.radius_start == 4.0

    def test_schedule_validation_becomes_config_error(self):
        cfg = RunConfig({"schedule.epochs": 0})
        with pytest.raises(ConfigError):
            cfg.schedule()

    def test_builders_produce_domain_objects(self):
        cfg = RunConfig({"stdp.variant": "soula", "ssom.t_ref_ms": 20.0})
        assert cfg.stdp_rule().variant == "soula"
        assert cfg.ssom_config().t_ref == 20.0
        assert cfg.lateral_kernel().excite_radius is None
        assert cfg.mfcc_config().n_coeffs == 12

    def test_effective_text_covers_every_key(self):
        text = RunConfig({}).effective_text()
        for key in REGISTRY:
            assert key.name in text

    def test_effective_text_round_trips(self):
        cfg = RunConfig({"run.model": "lin", "lin.lambda": 0.25,
                         "run.outdir": "/tmp/x"})
        text = cfg.effective_text()
        reparsed = RunConfig(parse_config_text(text))
        assert reparsed.values == cfg.values

    def test_load_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            RunConfig.load(tmp_path / "nope.cfg")


class TestRegistryHelp:
    def test_lists_every_key(self):
        text = registry_help()
        for key in REGISTRY:
            assert key.name in text
