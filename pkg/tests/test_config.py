"""Parsing and validation of the flat `key = value` experiment files."""

import pytest

from sela.config import (
    ADAPT_ITERATIONS_BY_WORLD,
    ConfigError,
    ExperimentConfig,
    parse_config,
    parse_config_file,
    with_overrides,
)
from sela.mission import Method


class TestDefaults:
    def test_minimal_config_fills_published_defaults(self):
        config = parse_config("world = point_robot")
        assert config.world == "point_robot"
        assert config.methods == (Method.SELA,)
        assert config.replicates == 1
        assert config.base_seed == 0
        assert config.damage == "none"
        assert config.damage_offset == 0.5
        assert config.damage_joint == 0
        assert config.noise_variance == 0.01
        assert (config.goal_x, config.goal_y) == (2.0, 2.0)
        assert config.epsilon_goal == 0.1
        assert config.alpha == 0.05
        assert config.kernel_family == "squared_exponential"
        assert config.kernel_sigma == 0.1
        assert config.gp_noise == 0.001
        assert config.epsilon_model == 0.01
        assert config.babble_max == 15
        assert config.uncertainty_iterations == 15
        assert config.episodic_success_projection == 0.09
        assert config.drop_window == 3
        assert config.drop_threshold == 0.15
        assert config.lookahead_cells == 2
        assert config.cell_size == 0.1
        assert config.planner_margin == 1.0
        assert config.step_cap == 500
        assert config.candidate_grid == 360
        assert config.archive_budget == 50000
        assert config.archive_grid == 20
        assert config.archive_mutation_sigma == 0.2

    def test_adaptation_budget_depends_on_world(self):
        assert parse_config("world = point_robot").adapt_iterations() == 10
        assert parse_config("world = segment_walker").adapt_iterations() == 15
        assert ADAPT_ITERATIONS_BY_WORLD == {"point_robot": 10, "segment_walker": 15}

    def test_explicit_budget_wins(self):
        text = "world = point_robot\nmax_adapt_iterations = 25"
        assert parse_config(text).adapt_iterations() == 25

    def test_effective_dict_resolves_world_default(self):
        effective = parse_config("world = segment_walker").effective_dict()
        assert effective["max_adapt_iterations"] == 15
        assert effective["methods"] == ("sela",)


class TestParsing:
    def test_comments_and_blank_lines_ignored(self):
        text = "\n# a comment\nworld = point_robot  # trailing\n\nreplicates = 3\n"
        config = parse_config(text)
        assert config.replicates == 3

    def test_methods_list(self):
        text = "world = point_robot\nmethods = sela, babbling, episodic_ite"
        config = parse_config(text)
        assert config.methods == (Method.SELA, Method.BABBLING, Method.EPISODIC_ITE)

    def test_archive_path_is_verbatim(self):
        text = "world = segment_walker\narchive_path = out/elites.txt"
        assert parse_config(text).archive_path == "out/elites.txt"

    def test_file_round_trip(self, tmp_path):
        path = tmp_path / "exp.cfg"
        path.write_text("world = point_robot\nbase_seed = 7\n")
        assert parse_config_file(path).base_seed == 7


class TestErrors:
    def test_missing_world(self):
        with pytest.raises(ConfigError, match="world"):
            parse_config("replicates = 3")

    def test_unknown_key_reports_line(self):
        with pytest.raises(ConfigError, match="line 1: unknown key 'worlds'"):
            parse_config("worlds = point_robot")

    def test_duplicate_key_reports_both_lines(self):
        text = "world = point_robot\nreplicates = 2\nreplicates = 3"
        with pytest.raises(ConfigError, match="line 3: key 'replicates' already set on line 2"):
            parse_config(text)

    def test_malformed_line(self):
        with pytest.raises(ConfigError, match="line 2"):
            parse_config("world = point_robot\njust some words")

    def test_bad_integer(self):
        with pytest.raises(ConfigError, match="line 2.*integer"):
            parse_config("world = point_robot\nreplicates = two")

    def test_bad_float(self):
        with pytest.raises(ConfigError, match="line 2.*number"):
            parse_config("world = point_robot\nalpha = fast")

    def test_bad_world_choice(self):
        with pytest.raises(ConfigError, match="line 1"):
            parse_config("world = hexapod")

    def test_bad_method_name(self):
        with pytest.raises(ConfigError, match="unknown method"):
            parse_config("world = point_robot\nmethods = sela, teleport")

    def test_negative_alpha_rejected(self):
        with pytest.raises(ConfigError, match="alpha"):
            parse_config("world = point_robot\nalpha = -1")

    def test_zero_cell_size_rejected(self):
        with pytest.raises(ConfigError, match="cell_size"):
            parse_config("world = point_robot\ncell_size = 0")

    def test_zero_replicates_rejected(self):
        with pytest.raises(ConfigError, match="replicates"):
            parse_config("world = point_robot\nreplicates = 0")


class TestOverrides:
    def test_override_replaces_field(self):
        base = parse_config("world = point_robot")
        changed = with_overrides(base, replicates=50, base_seed=100)
        assert changed.replicates == 50
        assert changed.base_seed == 100
        assert base.replicates == 1  # original untouched

    def test_override_still_validates(self):
        base = parse_config("world = point_robot")
        with pytest.raises(ConfigError):
            with_overrides(base, replicates=0)

    def test_direct_construction_has_same_defaults(self):
        assert ExperimentConfig(world="point_robot") == parse_config("world = point_robot")
