"""Boundary conditions: periodic wrap, bounce-back walls and obstacle masks.

Wall sites replace the collision step with full bounce-back: every particle
leaves the way it came, which is the lattice-gas form of the no-slip
condition ``u = 0`` on a rigid surface. Obstacle masks are read from plain
PBM (``P1``) bitmaps whose first raster row is the top of the lattice.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterator

import numpy as np

from .exceptions import ContractViolation, MaskFormatError, validate_periodic_height
from .lattice import FULL_STATE, NUM_DIRECTIONS, CellKind, opposite

logger = logging.getLogger(__name__)


class BoundaryKind(str, Enum):
    PERIODIC = "periodic"
    WALLED = "walled"


def bounce_back(state: int) -> int:
    out = 0
    for i in range(NUM_DIRECTIONS):
        if state >> opposite(i) & 1:
            out |= 1 << i
    return out


def bounce_back_table() -> np.ndarray:
    table = np.array([bounce_back(s) for s in range(FULL_STATE + 1)], dtype=np.uint8)
    table.setflags(write=False)
    return table


def border_ring(width: int, height: int) -> np.ndarray:
    ring = np.zeros((height, width), dtype=bool)
    ring[0, :] = ring[-1, :] = True
    ring[:, 0] = ring[:, -1] = True
    return ring


@dataclass(frozen=True, eq=False)
class BoundaryMode:
    kind: BoundaryKind
    mask: np.ndarray

    def __post_init__(self) -> None:
        mask = np.array(self.mask, dtype=np.uint8, copy=True)
        if mask.ndim != 2:
            raise ContractViolation("BoundaryMode", f"mask must be 2-D, got {mask.shape}")
        height, width = mask.shape
        if self.kind is BoundaryKind.PERIODIC:
            validate_periodic_height(height)
        else:
            mask[border_ring(width, height)] = CellKind.WALL
        mask.setflags(write=False)
        object.__setattr__(self, "mask", mask)

    @classmethod
    def periodic(
        cls, width: int, height: int, obstacles: np.ndarray | None = None
    ) -> "BoundaryMode":
        mask = np.zeros((height, width), dtype=np.uint8) if obstacles is None else obstacles
        return cls(BoundaryKind.PERIODIC, mask)

    @classmethod
    def walled(
        cls, width: int, height: int, obstacles: np.ndarray | None = None
    ) -> "BoundaryMode":
        mask = np.zeros((height, width), dtype=np.uint8) if obstacles is None else obstacles
        return cls(BoundaryKind.WALLED, mask)

    @property
    def periodic_wrap(self) -> bool:
        return self.kind is BoundaryKind.PERIODIC

    @property
    def width(self) -> int:
        return int(self.mask.shape[1])

    @property
    def height(self) -> int:
        return int(self.mask.shape[0])

    @property
    def walls(self) -> np.ndarray:
        return self.mask == CellKind.WALL

    @property
    def wall_count(self) -> int:
        return int(np.count_nonzero(self.walls))


def random_obstacles(width: int, height: int, density: float, seed: int) -> np.ndarray:
    rng = np.random.Generator(np.random.Philox(seed))
    return (rng.random((height, width)) < density).astype(np.uint8)


def _tokens(source: str) -> Iterator[tuple[int, str]]:
    """Yield (line number, token) pairs, skipping '#' comments."""
    for lineno, raw in enumerate(source.splitlines(), start=1):
        text = raw.split("#", 1)[0]
        for token in text.split():
            yield lineno, token


def load_mask(
    source: str,
    width: int,
    height: int,
    kind: BoundaryKind = BoundaryKind.WALLED,
    *,
    path: str | None = None,
) -> np.ndarray:
    """Parse a plain PBM bitmap into a (height, width) CellKind mask."""

    def fail(message: str, line: int | None) -> MaskFormatError:
        return MaskFormatError("mask", message, line, path=path)

    tokens = _tokens(source)
    first = next(tokens, None)
    if first is None:
        raise fail("empty bitmap", 1)
    lineno, magic = first
    if magic != "P1":
        raise fail(f"expected magic 'P1', got {magic!r}", lineno)

    dims: list[int] = []
    for lineno, token in tokens:
        if not token.isdigit() or int(token) <= 0:
            raise fail(f"malformed dimension {token!r}", lineno)
        dims.append(int(token))
        if len(dims) == 2:
            break
    if len(dims) != 2:
        raise fail("missing bitmap dimensions", lineno)
    if tuple(dims) != (width, height):
        raise fail(
            f"bitmap is {dims[0]}x{dims[1]}, lattice is {width}x{height}", lineno
        )

    pixels: list[int] = []
    expected = width * height
    for lineno, token in tokens:
        # P1 allows pixels without separating whitespace.
        for ch in token:
            if ch not in "01":
                raise fail(f"invalid pixel {ch!r}", lineno)
            pixels.append(int(ch))
            if len(pixels) > expected:
                raise fail(f"more than {expected} pixels", lineno)
    if len(pixels) < expected:
        raise fail(f"expected {expected} pixels, found {len(pixels)}", lineno)

    raster = np.array(pixels, dtype=np.uint8).reshape(height, width)
    mask = np.where(raster[::-1] == 1, CellKind.WALL, CellKind.FLUID).astype(np.uint8)
    if kind is BoundaryKind.WALLED:
        mask[border_ring(width, height)] = CellKind.WALL
    logger.debug(f"Loaded mask {width}x{height} with {int(mask.sum())} wall sites")
    return mask


def load_mask_file(
    path: Path | str,
    width: int,
    height: int,
    kind: BoundaryKind = BoundaryKind.WALLED,
) -> np.ndarray:
    try:
        text = Path(path).read_text(encoding="ascii")
    except (OSError, UnicodeDecodeError) as e:
        raise MaskFormatError("mask", f"cannot read bitmap ({e})", None, path=str(path)) from e
    return load_mask(text, width, height, kind, path=str(path))


def dump_mask(mask: np.ndarray) -> str:
    height, width = mask.shape
    rows = [" ".join(str(int(v)) for v in row) for row in np.asarray(mask)[::-1]]
    return "\n".join(["P1", f"{width} {height}", *rows]) + "\n"
