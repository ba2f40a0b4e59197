"""
Configuration Tests
===================

Parsing, validation and the canonical text form of SimConfig.
"""

import numpy as np
import pytest
from pydantic import ValidationError

from hexgas_lattice.boundary import BoundaryKind
from hexgas_lattice.config import (
    SimConfig,
    load_config,
    parse_config,
    serialize_config,
)
from hexgas_lattice.exceptions import ConfigurationError, MaskFormatError, RegionError
from hexgas_lattice.lattice import Direction
from hexgas_lattice.scenarios import Disk, ScenarioKind

BASE = "width = 20\nheight = 20\nsteps = 10\nseed = 1\n"


class TestParseConfig:
    def test_hole_config(self, hole_config_text):
        config = parse_config(hole_config_text)
        assert config.dims == (100, 100)
        assert config.steps == 300
        assert config.seed == 42
        assert config.scenario is ScenarioKind.HOLE
        assert config.fill == 0.667

    def test_defaults(self):
        config = parse_config(BASE)
        assert config.boundary is BoundaryKind.PERIODIC
        assert (config.block, config.window, config.frame_every) == (10, 50, 50)
        assert config.mask is None

    def test_range_error_names_key_and_line(self):
        with pytest.raises(ConfigurationError) as exc:
            parse_config("fill = 1.5\n")
        assert exc.value.key == "fill"
        assert exc.value.line == 1

    def test_unknown_key(self):
        with pytest.raises(ConfigurationError) as exc:
            parse_config("widht = 100\n")
        assert exc.value.key == "widht"
        assert exc.value.line == 1
        assert "unknown" in str(exc.value)

    def test_missing_required_key(self):
        with pytest.raises(ConfigurationError) as exc:
            parse_config("width = 20\nheight = 20\nsteps = 10\n")
        assert exc.value.key == "seed"
        assert exc.value.line is None

    def test_duplicate_key(self):
        with pytest.raises(ConfigurationError) as exc:
            parse_config(BASE + "seed = 2\n")
        assert exc.value.key == "seed"
        assert exc.value.line == 5

    def test_malformed_line(self):
        with pytest.raises(ConfigurationError) as exc:
            parse_config(BASE + "just words\n")
        assert exc.value.line == 5

    def test_comments_and_blank_lines(self):
        config = parse_config("# header\n\n" + BASE + "fill = 0.25  # quarter\n")
        assert config.fill == 0.25

    def test_empty_value_means_unset(self):
        assert parse_config(BASE + "bias_direction =\n").bias_direction is None

    def test_bad_type_on_its_line(self):
        with pytest.raises(ConfigurationError) as exc:
            parse_config(BASE + "steps_typo = 1\n")
        assert exc.value.line == 5
        with pytest.raises(ConfigurationError) as exc:
            parse_config("width = 20\nheight = many\nsteps = 10\nseed = 1\n")
        assert exc.value.key == "height"
        assert exc.value.line == 2

    def test_seed_is_64_bit(self):
        assert parse_config(BASE.replace("seed = 1", f"seed = {2**64 - 1}")).seed == 2**64 - 1
        with pytest.raises(ConfigurationError):
            parse_config(BASE.replace("seed = 1", f"seed = {2**64}"))


class TestCrossFieldRules:
    def test_block_must_divide(self):
        with pytest.raises(ConfigurationError) as exc:
            parse_config(BASE + "block = 3\n")
        assert exc.value.key == "block"
        assert exc.value.line == 5

    def test_periodic_needs_even_height(self):
        with pytest.raises(ConfigurationError) as exc:
            parse_config("width = 20\nheight = 15\nsteps = 1\nseed = 1\nblock = 5\n")
        assert exc.value.key == "height"
        assert exc.value.line == 2

    def test_walled_allows_odd_height(self):
        config = parse_config(
            "width = 20\nheight = 15\nsteps = 1\nseed = 1\nblock = 5\nboundary = walled\n"
        )
        assert config.boundary is BoundaryKind.WALLED

    def test_region_off_lattice(self):
        with pytest.raises(RegionError) as exc:
            parse_config(BASE + "regions = disk:5.0,5.0,8.0\n")
        assert exc.value.line == 5

    def test_regions_are_canonical(self):
        config = parse_config(BASE + "regions = disk:10,10,3 ; rect:0,0,2,2\n")
        assert config.regions == "disk:10.0,10.0,3.0;rect:0,0,2,2"

    def test_bias_fill_requires_direction(self):
        with pytest.raises(ConfigurationError) as exc:
            parse_config(BASE + "bias_fill = 0.9\n")
        assert exc.value.key == "bias_fill"

    def test_paths_reject_comment_marker(self):
        with pytest.raises(ValidationError):
            SimConfig(width=20, height=20, steps=1, seed=1, output_dir="out#1")


class TestSerialize:
    def test_round_trip(self, hole_config_text):
        config = parse_config(hole_config_text)
        assert parse_config(serialize_config(config)) == config

    def test_randomized_round_trip(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            block = int(rng.choice([1, 2, 5, 10]))
            fields = dict(
                width=block * int(rng.integers(2, 10)),
                height=2 * block * int(rng.integers(1, 6)),
                steps=int(rng.integers(0, 1000)),
                seed=int(rng.integers(0, 2**63)),
                scenario=str(rng.choice([k.value for k in ScenarioKind])),
                fill=float(rng.random()),
                block=block,
                window=int(rng.integers(1, 100)),
                frame_every=int(rng.integers(1, 100)),
                workers=int(rng.integers(1, 8)),
                amplitude=float(rng.random() * 0.1),
            )
            if rng.random() < 0.5:
                fields["bias_direction"] = int(rng.integers(0, 6))
                fields["bias_fill"] = float(rng.random())
            config = SimConfig(**fields)
            assert parse_config(serialize_config(config)) == config

    def test_optional_fields_are_omitted(self):
        text = serialize_config(parse_config(BASE))
        assert "bias_direction" not in text
        assert "regions" not in text
        assert "scenario = uniform" in text

    def test_load_config(self, tmp_path, hole_config_text):
        path = tmp_path / "hole.cfg"
        path.write_text(hole_config_text, encoding="utf-8")
        assert load_config(path).scenario is ScenarioKind.HOLE

    def test_load_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError):
            load_config(tmp_path / "missing.cfg")


class TestDerivedObjects:
    def test_build_scenario(self):
        config = parse_config(
            BASE + "scenario = hole\nbias_direction = 3\nbias_fill = 0.8\nregions = disk:10,10,4\n"
        )
        scenario = config.build_scenario()
        assert scenario.bias_direction is Direction.W
        assert scenario.regions == (Disk(10.0, 10.0, 4.0),)

    def test_boundary_mode(self):
        config = parse_config(BASE + "boundary = walled\n")
        assert config.boundary_mode().wall_count == 4 * 19

    def test_load_obstacles_reports_bad_mask(self, tmp_path):
        mask = tmp_path / "bad.pbm"
        mask.write_text("P2\n20 20\n", encoding="ascii")
        config = parse_config(BASE + f"mask = {mask}\n")
        with pytest.raises(MaskFormatError):
            config.load_obstacles()

    def test_no_mask(self):
        assert parse_config(BASE).load_obstacles() is None
