"""
Boundary Tests
==============

Bounce-back rule, boundary modes and plain PBM obstacle masks.
"""

import numpy as np
import pytest

from hexgas_lattice.boundary import (
    BoundaryKind,
    BoundaryMode,
    border_ring,
    bounce_back,
    bounce_back_table,
    dump_mask,
    load_mask,
    load_mask_file,
    random_obstacles,
)
from hexgas_lattice.exceptions import ConfigurationError, MaskFormatError
from hexgas_lattice.lattice import FULL_STATE, CellKind, site_mass, state_from_labels


class TestBounceBack:
    def test_single_particle_reverses(self):
        assert bounce_back(state_from_labels([1])) == state_from_labels([4])

    def test_head_on_pair_is_fixed(self):
        s = state_from_labels([1, 4])
        assert bounce_back(s) == s

    def test_empty(self):
        assert bounce_back(0) == 0

    def test_table_is_an_involution(self):
        table = bounce_back_table()
        for s in range(FULL_STATE + 1):
            assert table[table[s]] == s
            assert site_mass(int(table[s])) == site_mass(s)


class TestBoundaryMode:
    def test_periodic_needs_even_height(self):
        with pytest.raises(ConfigurationError):
            BoundaryMode.periodic(10, 9)

    def test_walled_allows_odd_height(self):
        mode = BoundaryMode.walled(10, 9)
        assert mode.height == 9

    def test_walled_forces_border_ring(self):
        mode = BoundaryMode.walled(8, 6)
        assert np.array_equal(mode.walls, border_ring(8, 6))
        assert mode.wall_count == 2 * 8 + 2 * 4

    def test_walled_keeps_obstacles(self):
        obstacles = np.zeros((6, 8), dtype=np.uint8)
        obstacles[3, 3] = CellKind.WALL
        mode = BoundaryMode.walled(8, 6, obstacles)
        assert mode.mask[3, 3] == CellKind.WALL
        assert obstacles[0, 0] == CellKind.FLUID

    def test_periodic_has_no_walls(self):
        mode = BoundaryMode.periodic(8, 6)
        assert mode.kind is BoundaryKind.PERIODIC
        assert mode.periodic_wrap
        assert mode.wall_count == 0

    def test_random_obstacles_seeded(self):
        a = random_obstacles(30, 30, 0.2, seed=3)
        assert np.array_equal(a, random_obstacles(30, 30, 0.2, seed=3))
        assert 0.1 < a.mean() < 0.3


class TestLoadMask:
    """Plain PBM parsing."""

    def test_first_raster_row_is_top(self):
        text = "P1\n3 2\n1 0 0\n0 0 0\n"
        mask = load_mask(text, 3, 2, BoundaryKind.PERIODIC)
        assert mask[1, 0] == CellKind.WALL
        assert mask[0, 0] == CellKind.FLUID

    def test_comments_and_packed_pixels(self):
        text = "P1\n# obstacle\n4 2 # dims\n0110\n0000\n"
        mask = load_mask(text, 4, 2, BoundaryKind.PERIODIC)
        assert mask[1].tolist() == [0, 1, 1, 0]

    def test_walled_forces_ring(self):
        text = "P1\n4 4\n" + "0 0 0 0\n" * 4
        mask = load_mask(text, 4, 4, BoundaryKind.WALLED)
        assert np.array_equal(mask == CellKind.WALL, border_ring(4, 4))

    def test_wrong_magic(self):
        with pytest.raises(MaskFormatError) as exc:
            load_mask("P2\n2 2\n0 0 0 0\n", 2, 2)
        assert exc.value.line == 1
        assert "P1" in str(exc.value)

    def test_dimension_mismatch(self):
        with pytest.raises(MaskFormatError) as exc:
            load_mask("P1\n3 2\n000\n000\n", 2, 2)
        assert exc.value.line == 2

    def test_malformed_dimension(self):
        with pytest.raises(MaskFormatError) as exc:
            load_mask("P1\nx 2\n", 2, 2)
        assert exc.value.line == 2

    def test_bad_pixel(self):
        with pytest.raises(MaskFormatError) as exc:
            load_mask("P1\n2 2\n0 0\n0 2\n", 2, 2)
        assert exc.value.line == 4

    def test_too_few_pixels(self):
        with pytest.raises(MaskFormatError):
            load_mask("P1\n2 2\n0 0 0\n", 2, 2)

    def test_too_many_pixels(self):
        with pytest.raises(MaskFormatError):
            load_mask("P1\n2 2\n0 0 0 0 1\n", 2, 2)

    def test_empty(self):
        with pytest.raises(MaskFormatError):
            load_mask("", 2, 2)

    def test_is_a_configuration_error(self):
        assert issubclass(MaskFormatError, ConfigurationError)

    def test_dump_and_load_file(self, tmp_path):
        obstacles = random_obstacles(6, 4, 0.3, seed=1)
        path = tmp_path / "mask.pbm"
        path.write_text(dump_mask(obstacles), encoding="ascii")
        loaded = load_mask_file(path, 6, 4, BoundaryKind.PERIODIC)
        assert np.array_equal(loaded, obstacles)

    def test_missing_file_names_path(self, tmp_path):
        path = tmp_path / "nope.pbm"
        with pytest.raises(MaskFormatError) as exc:
            load_mask_file(path, 2, 2)
        assert str(path) in str(exc.value)
