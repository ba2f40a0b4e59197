"""Hexagonal lattice geometry and site storage.

The hexagonal lattice is stored as an offset-row rectangular array: odd rows
sit half a spacing to the right of even rows. Directions are numbered
counter-clockwise from east, ``c_i = (cos 60°·i, sin 60°·i)``; direction
``i`` here is label ``i + 1`` in the usual 1..6 FHP notation.

A site state is a 6-bit integer, bit ``i`` being the occupation number of
direction ``i``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Iterable

import numpy as np

from .exceptions import ContractViolation, validate_periodic_height, validate_positive

NUM_DIRECTIONS = 6
FULL_STATE = (1 << NUM_DIRECTIONS) - 1
ROW_PITCH = math.sqrt(3.0) / 2.0

# (dx, dy) for even rows, then odd rows.
_EVEN_OFFSETS = ((1, 0), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1))
_ODD_OFFSETS = ((1, 0), (1, 1), (0, 1), (-1, 0), (0, -1), (1, -1))


class Direction(IntEnum):
    E = 0
    NE = 1
    NW = 2
    W = 3
    SW = 4
    SE = 5

    @property
    def opposite(self) -> "Direction":
        return Direction((self + 3) % NUM_DIRECTIONS)

    @property
    def vector(self) -> tuple[float, float]:
        return float(C[self, 0]), float(C[self, 1])

    @property
    def label(self) -> int:
        return int(self) + 1

    @classmethod
    def from_label(cls, label: int) -> "Direction":
        if not 1 <= label <= NUM_DIRECTIONS:
            raise ContractViolation("Direction.from_label", f"label {label} not in 1..6")
        return cls(label - 1)


class CellKind(IntEnum):
    FLUID = 0
    WALL = 1


def _unit_vectors() -> np.ndarray:
    angles = np.arange(NUM_DIRECTIONS) * (math.pi / 3.0)
    c = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    # Exact antisymmetry: c_{i+3} = -c_i bit for bit.
    c[3:] = -c[:3]
    c[0] = (1.0, 0.0)
    c[3] = (-1.0, 0.0)
    c.setflags(write=False)
    return c


C: np.ndarray = _unit_vectors()
"""Unit lattice vectors, shape (6, 2)."""


def opposite(i: int) -> int:
    return (i + 3) % NUM_DIRECTIONS


def state_from_directions(directions: Iterable[int]) -> int:
    state = 0
    for i in directions:
        if not 0 <= int(i) < NUM_DIRECTIONS:
            raise ContractViolation("state_from_directions", f"direction {i} not in 0..5")
        state |= 1 << int(i)
    return state


def state_from_labels(labels: Iterable[int]) -> int:
    return state_from_directions(Direction.from_label(label) for label in labels)


def directions_of(state: int) -> tuple[Direction, ...]:
    return tuple(Direction(i) for i in range(NUM_DIRECTIONS) if state >> i & 1)


def labels_of(state: int) -> tuple[int, ...]:
    return tuple(d.label for d in directions_of(state))


@dataclass(frozen=True)
class LatticeUnits:
    spacing: float = 1.0
    tick: float = 1.0

    def __post_init__(self) -> None:
        validate_positive("spacing", self.spacing)
        validate_positive("tick", self.tick)

    @property
    def v(self) -> float:
        return self.spacing / self.tick

    def velocities(self) -> np.ndarray:
        """Particle velocities v_i = v·c_i, shape (6, 2)."""
        return self.v * C


def site_mass(state: int) -> int:
    return int(state & FULL_STATE).bit_count()


def site_momentum(state: int, units: LatticeUnits | None = None) -> tuple[float, float]:
    v = (units or LatticeUnits()).v
    px = 0.0
    py = 0.0
    # Pair up opposite directions so reversal-symmetric states cancel exactly.
    for i in range(3):
        weight = (state >> i & 1) - (state >> (i + 3) & 1)
        px += weight * C[i, 0]
        py += weight * C[i, 1]
    return v * px, v * py


def _check_dims(width: int, height: int) -> None:
    if width <= 0 or height <= 0:
        raise ContractViolation("lattice", f"dimensions must be positive, got {width}x{height}")


def neighbor(
    p: tuple[int, int],
    i: int,
    dims: tuple[int, int],
    periodic: bool = True,
) -> tuple[int, int]:
    """Destination of a particle leaving site ``p`` along direction ``i``.

    Coordinates wrap modulo ``dims = (width, height)``. In periodic mode the
    height must be even so the row parity is the same on both sides of the
    seam. Walled lattices also wrap, but no particle crosses their wall ring.
    """
    width, height = dims
    _check_dims(width, height)
    x, y = p
    if not (0 <= x < width and 0 <= y < height):
        raise ContractViolation("neighbor", f"site {p} outside {width}x{height} lattice")
    if not 0 <= i < NUM_DIRECTIONS:
        raise ContractViolation("neighbor", f"direction {i} not in 0..5")
    if periodic:
        validate_periodic_height(height)
    dx, dy = (_ODD_OFFSETS if y & 1 else _EVEN_OFFSETS)[i]
    return (x + dx) % width, (y + dy) % height


def neighbor_indices(width: int, height: int, direction: int) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised :func:`neighbor` for every site, as (ys, xs) of shape (H, W)."""
    _check_dims(width, height)
    ys, xs = np.indices((height, width))
    even = np.array(_EVEN_OFFSETS[direction])
    odd = np.array(_ODD_OFFSETS[direction])
    offsets = np.where((ys & 1)[..., None] == 1, odd, even)
    return (ys + offsets[..., 1]) % height, (xs + offsets[..., 0]) % width


def gather_sources(width: int, height: int) -> np.ndarray:
    """Flat source index per direction for gather streaming, shape (6, H·W).

    ``sources[i, p]`` is the flat index of ``neighbor(p, opposite(i))``: the
    site whose post-collision bit ``i`` arrives at ``p``.
    """
    sources = np.empty((NUM_DIRECTIONS, height * width), dtype=np.intp)
    for i in range(NUM_DIRECTIONS):
        ys, xs = neighbor_indices(width, height, opposite(i))
        sources[i] = (ys * width + xs).ravel()
    sources.setflags(write=False)
    return sources


def site_positions(
    width: int, height: int, units: LatticeUnits | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Euclidean coordinates (X, Y) of every site, each of shape (H, W)."""
    spacing = (units or LatticeUnits()).spacing
    ys, xs = np.indices((height, width), dtype=np.float64)
    return spacing * (xs + 0.5 * (ys.astype(np.int64) & 1)), spacing * ROW_PITCH * ys


_BIT_SHIFTS = np.arange(NUM_DIRECTIONS, dtype=np.uint8)


def occupation(cells: np.ndarray) -> np.ndarray:
    """Unpack site states into occupation numbers, shape ``cells.shape + (6,)``."""
    return (np.asarray(cells, dtype=np.uint8)[..., None] >> _BIT_SHIFTS) & 1


def pack(occupations: np.ndarray) -> np.ndarray:
    """Inverse of :func:`occupation`."""
    bits = np.asarray(occupations, dtype=np.uint8) << _BIT_SHIFTS
    return np.bitwise_or.reduce(bits, axis=-1).astype(np.uint8)


_POPCOUNT = np.array([site_mass(s) for s in range(FULL_STATE + 1)], dtype=np.int64)


def mass_field(cells: np.ndarray) -> np.ndarray:
    """Particles per site."""
    return _POPCOUNT[np.asarray(cells, dtype=np.uint8)]


def mass_of(cells: np.ndarray) -> int:
    return int(mass_field(cells).sum())


@dataclass(frozen=True, eq=False)
class Lattice:
    """Immutable snapshot of the automaton state.

    ``cells`` and ``mask`` have shape (height, width); row ``y`` is the
    y-th lattice row counted upwards.
    """

    cells: np.ndarray
    mask: np.ndarray = field(default=None)  # type: ignore[assignment]
    units: LatticeUnits = field(default_factory=LatticeUnits)

    def __post_init__(self) -> None:
        cells = np.array(self.cells, dtype=np.uint8, copy=True)
        if cells.ndim != 2:
            raise ContractViolation("Lattice", f"cells must be 2-D, got shape {cells.shape}")
        _check_dims(cells.shape[1], cells.shape[0])
        if np.any(cells > FULL_STATE):
            raise ContractViolation("Lattice", "site states must fit in 6 bits")
        if self.mask is None:
            mask = np.zeros_like(cells)
        else:
            mask = np.array(self.mask, dtype=np.uint8, copy=True)
            if mask.shape != cells.shape:
                raise ContractViolation(
                    "Lattice", f"mask shape {mask.shape} != cells shape {cells.shape}"
                )
        cells.setflags(write=False)
        mask.setflags(write=False)
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "mask", mask)

    @classmethod
    def empty(cls, width: int, height: int, *, mask: np.ndarray | None = None) -> "Lattice":
        return cls(np.zeros((height, width), dtype=np.uint8), mask)

    @property
    def width(self) -> int:
        return int(self.cells.shape[1])

    @property
    def height(self) -> int:
        return int(self.cells.shape[0])

    @property
    def dims(self) -> tuple[int, int]:
        return self.width, self.height

    @property
    def total_mass(self) -> int:
        return mass_of(self.cells)

    @property
    def walls(self) -> np.ndarray:
        return self.mask == CellKind.WALL

    @property
    def fluid_sites(self) -> int:
        return int(np.count_nonzero(self.mask == CellKind.FLUID))

    def state_at(self, x: int, y: int) -> int:
        return int(self.cells[y, x])

    def with_cells(self, cells: np.ndarray) -> "Lattice":
        """Next buffer with the same mask and units."""
        return Lattice(cells, self.mask, self.units)

    def momentum(self) -> tuple[float, float]:
        p = occupation(self.cells).reshape(-1, NUM_DIRECTIONS).sum(axis=0) @ self.units.velocities()
        return float(p[0]), float(p[1])
