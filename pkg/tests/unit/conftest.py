"""
Pytest Fixtures for hexgas-lattice Unit Tests
=============================================

Shared lattices, boundaries and config text for the unit suites.

Design:
- small lattices (8x8 to 40x40) so every test runs in well under a second
- every random draw is seeded
- states are written with the 1..6 labels used in the FHP literature where
  that reads more naturally than bit masks
"""

from __future__ import annotations

import numpy as np
import pytest

from hexgas_lattice.boundary import BoundaryMode
from hexgas_lattice.dynamics import ChiralityStream, Stepper
from hexgas_lattice.lattice import Lattice
from hexgas_lattice.scenarios import Scenario, init


# ==================== Lattices ====================


@pytest.fixture
def small_dims() -> tuple[int, int]:
    """20 x 20 sites: even height, divisible by blocks 2, 4, 5, 10."""
    return (20, 20)


@pytest.fixture
def half_filled(small_dims: tuple[int, int]) -> Lattice:
    """Uniform f = 0.5 fill on the small periodic lattice."""
    return init(Scenario(fill=0.5), small_dims, seed=2024)


@pytest.fixture
def full_lattice(small_dims: tuple[int, int]) -> Lattice:
    width, height = small_dims
    return Lattice(np.full((height, width), 63, dtype=np.uint8))


@pytest.fixture
def empty_lattice(small_dims: tuple[int, int]) -> Lattice:
    return Lattice.empty(*small_dims)


# ==================== Boundaries ====================


@pytest.fixture
def periodic(small_dims: tuple[int, int]) -> BoundaryMode:
    return BoundaryMode.periodic(*small_dims)


@pytest.fixture
def walled(small_dims: tuple[int, int]) -> BoundaryMode:
    return BoundaryMode.walled(*small_dims)


# ==================== Helpers ====================


def _evolve(
    lattice: Lattice, boundary: BoundaryMode, steps: int, seed: int = 7, workers: int = 1
) -> Lattice:
    with Stepper(boundary, ChiralityStream(seed), workers=workers) as stepper:
        for t in range(steps):
            lattice = stepper.advance(lattice, t)
    return lattice


@pytest.fixture
def evolve():
    """Advance ``lattice`` by ``steps`` steps.

    Called as ``evolve(lattice, boundary, steps, seed, workers)``.
    """
    return _evolve


# ==================== Config text ====================


HOLE_CONFIG = """\
# hole relaxation experiment
width = 100
height = 100
steps = 300
seed = 42
scenario = hole
fill = 0.667
"""


@pytest.fixture
def hole_config_text() -> str:
    return HOLE_CONFIG


@pytest.fixture
def small_config_text(tmp_path) -> str:
    """A quick run writing into ``tmp_path``."""
    return (
        "width = 20\n"
        "height = 20\n"
        "steps = 12\n"
        "seed = 3\n"
        "scenario = hole\n"
        "fill = 0.6\n"
        "block = 5\n"
        "window = 4\n"
        "frame_every = 5\n"
        f"output_dir = {tmp_path / 'out'}\n"
    )
