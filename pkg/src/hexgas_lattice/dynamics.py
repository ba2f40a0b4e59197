"""FHP-I microdynamics: collision operator, chirality draws and streaming.

One time step is collide-then-stream. Fluid sites look their post-collision
state up in a 2 × 64 table indexed by (chirality, state); wall sites bounce
back. Streaming is gather-based: every destination site reads its six
incoming bits from its neighbours, so rows are updated independently by
parallel numba loops.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from functools import lru_cache
from types import TracebackType

import numba
import numpy as np
from numba import njit, prange

from .boundary import BoundaryMode, bounce_back_table
from .exceptions import ContractViolation
from .lattice import C, FULL_STATE, NUM_DIRECTIONS, Lattice, gather_sources

logger = logging.getLogger(__name__)

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def _bit(state: int, i: int) -> int:
    return state >> (i % NUM_DIRECTIONS) & 1


def _two_body(state: int, i: int) -> int:
    """D_i: head-on pair along i and i+3, all other directions empty."""
    d = _bit(state, i) * _bit(state, i + 3)
    for j in (1, 2, 4, 5):
        d *= 1 - _bit(state, i + j)
    return d


def _three_body(state: int, i: int) -> int:
    """T_i: symmetric triple i, i+2, i+4 with the other three empty."""
    return (
        _bit(state, i)
        * _bit(state, i + 2)
        * _bit(state, i + 4)
        * (1 - _bit(state, i + 1))
        * (1 - _bit(state, i + 3))
        * (1 - _bit(state, i + 5))
    )


def collide_formula(state: int, q: bool | int) -> int:
    """Reference FHP-I collision, evaluated term by term.

    ``Ω_i = −D_i + q·D_{i−1} + (1−q)·D_{i+1} − T_i + T_{i+3}``. ``q = 1``
    rotates a head-on pair counter-clockwise, ``q = 0`` clockwise. Slow;
    used to build and audit :class:`CollisionTable`.
    """
    if not 0 <= state <= FULL_STATE:
        raise ContractViolation("collide_formula", f"state {state} not in 0..63")
    qi = 1 if q else 0
    out = 0
    for i in range(NUM_DIRECTIONS):
        omega = (
            -_two_body(state, i)
            + qi * _two_body(state, i - 1)
            + (1 - qi) * _two_body(state, i + 1)
            - _three_body(state, i)
            + _three_body(state, i + 3)
        )
        n = _bit(state, i) + omega
        if n not in (0, 1):
            raise ContractViolation("collide_formula", f"occupation {n} at direction {i}")
        out |= n << i
    return out


@dataclass(frozen=True, eq=False)
class CollisionTable:
    """Post-collision states, ``out[q, s]``; shape (2, 64)."""

    out: np.ndarray

    def __post_init__(self) -> None:
        out = np.array(self.out, dtype=np.uint8, copy=True)
        if out.shape != (2, FULL_STATE + 1):
            raise ContractViolation("CollisionTable", f"expected shape (2, 64), got {out.shape}")
        out.setflags(write=False)
        object.__setattr__(self, "out", out)

    @property
    def out_q0(self) -> np.ndarray:
        return self.out[0]

    @property
    def out_q1(self) -> np.ndarray:
        return self.out[1]

    @property
    def flat(self) -> np.ndarray:
        """Entries indexed by ``(q << 6) | s``."""
        return self.out.reshape(-1)

    def lookup(self, state: int, q: bool | int) -> int:
        return int(self.out[1 if q else 0, state])

    def entries(self) -> list[tuple[int, int, int]]:
        return [(q, s, int(self.out[q, s])) for q in (0, 1) for s in range(FULL_STATE + 1)]


def build_table() -> CollisionTable:
    started = time.perf_counter()
    out = [[collide_formula(s, q) for s in range(FULL_STATE + 1)] for q in (0, 1)]
    table = CollisionTable(np.array(out, dtype=np.uint8))
    logger.debug(f"Collision table built in {(time.perf_counter() - started) * 1e3:.2f}ms")
    return table


@lru_cache(maxsize=1)
def default_table() -> CollisionTable:
    return build_table()


def table_momentum_defect(table: CollisionTable) -> float:
    """Largest |Σ n'_i c_i − Σ n_i c_i| over all 128 entries."""
    states = np.arange(FULL_STATE + 1)
    bits_in = (states[:, None] >> np.arange(NUM_DIRECTIONS)) & 1
    worst = 0.0
    for q in (0, 1):
        bits_out = (table.out[q].astype(np.int64)[:, None] >> np.arange(NUM_DIRECTIONS)) & 1
        delta = (bits_out - bits_in) @ C
        worst = max(worst, float(np.abs(delta).max()))
    return worst


# SplitMix64 finaliser; the chirality of a site is a pure function of its
# (seed, step, row, column) key.


def _splitmix64(x: int) -> int:
    z = (x + _GOLDEN) & _MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
    return z ^ (z >> 31)


def _splitmix64_array(x: np.ndarray) -> np.ndarray:
    z = x + np.uint64(_GOLDEN)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    return z ^ (z >> np.uint64(31))


@dataclass(frozen=True)
class ChiralityStream:
    """Counter-based Bernoulli(1/2) chirality q(x, y, t)."""

    seed: int

    def __post_init__(self) -> None:
        if not 0 <= self.seed <= _MASK64:
            raise ContractViolation("ChiralityStream", f"seed {self.seed} is not a 64-bit value")

    def step_key(self, t: int) -> np.uint64:
        return np.uint64(_splitmix64(_splitmix64(self.seed) ^ (t & _MASK64)))

    def field(self, t: int, width: int, y0: int, y1: int) -> np.ndarray:
        """Chirality of rows ``y0..y1-1``, bool array of shape (y1-y0, width)."""
        ys = np.arange(y0, y1, dtype=np.uint64)[:, None]
        xs = np.arange(width, dtype=np.uint64)[None, :]
        keys = (ys << np.uint64(32)) | xs
        h = _splitmix64_array(_splitmix64_array(keys) ^ self.step_key(t))
        return (h >> np.uint64(63)).astype(bool)

    def draw(self, t: int, x: int, y: int) -> bool:
        return bool(self.field(t, x + 1, y, y + 1)[0, x])


@lru_cache(maxsize=8)
def _cached_sources(width: int, height: int) -> np.ndarray:
    return gather_sources(width, height)


_BITS = np.array([1 << i for i in range(NUM_DIRECTIONS)], dtype=np.uint8)
_GOLDEN_U = np.uint64(_GOLDEN)
_MIX1_U = np.uint64(_MIX1)
_MIX2_U = np.uint64(_MIX2)


@njit(inline="always")
def _splitmix64_scalar(z):
    z = z + _GOLDEN_U
    z = (z ^ (z >> np.uint64(30))) * _MIX1_U
    z = (z ^ (z >> np.uint64(27))) * _MIX2_U
    return z ^ (z >> np.uint64(31))


@njit(parallel=True, cache=True)
def _advance_kernel(cells, sources, table, bounce, walls, step_key, bits, new):
    height, width = cells.shape
    post = np.empty(height * width, dtype=np.uint8)
    for y in prange(height):
        row = np.uint64(y) << np.uint64(32)
        for x in range(width):
            s = cells[y, x]
            if walls[y, x]:
                post[y * width + x] = bounce[s]
            else:
                h = _splitmix64_scalar(_splitmix64_scalar(row | np.uint64(x)) ^ step_key)
                post[y * width + x] = table[np.intp(h >> np.uint64(63)), s]
    # Collision has finished on every row before any row gathers.
    for y in prange(height):
        for x in range(width):
            p = y * width + x
            acc = 0
            for i in range(NUM_DIRECTIONS):
                acc |= post[sources[i, p]] & bits[i]
            new[p] = acc


@dataclass(eq=False)
class Stepper:
    """Reusable time stepper for one boundary configuration.

    ``workers`` caps the numba threads the row loops run on; rows are
    independent, so the result does not depend on it.
    """

    boundary: BoundaryMode
    chirality: ChiralityStream
    table: CollisionTable = field(default_factory=default_table)
    workers: int = 1

    def __post_init__(self) -> None:
        if self.workers < 1:
            raise ContractViolation("Stepper", f"workers must be >= 1, got {self.workers}")
        self._sources = _cached_sources(self.boundary.width, self.boundary.height)
        self._bounce = bounce_back_table()
        self._walls = np.ascontiguousarray(self.boundary.walls, dtype=np.bool_)
        self._threads = thread_count(self.workers)
        self._restore = numba.get_num_threads()

    def close(self) -> None:
        numba.set_num_threads(self._restore)

    def __enter__(self) -> "Stepper":
        return self

    def __exit__(
        self,
        exc_type: type[BaseException] | None,
        exc: BaseException | None,
        tb: TracebackType | None,
    ) -> None:
        self.close()

    def advance(self, current: Lattice, t: int) -> Lattice:
        cells = current.cells
        if cells.shape != self.boundary.mask.shape:
            raise ContractViolation(
                "step",
                f"lattice shape {cells.shape} != boundary shape {self.boundary.mask.shape}",
            )
        new = np.empty(cells.size, dtype=np.uint8)
        numba.set_num_threads(self._threads)
        _advance_kernel(
            np.ascontiguousarray(cells, dtype=np.uint8),
            self._sources,
            self.table.out,
            self._bounce,
            self._walls,
            self.chirality.step_key(t),
            _BITS,
            new,
        )
        return Lattice(new.reshape(cells.shape), self.boundary.mask, current.units)


def thread_count(workers: int) -> int:
    """Numba threads used for ``workers``, clamped to the launched pool."""
    return max(1, min(workers, numba.config.NUMBA_NUM_THREADS))


def step(
    current: Lattice,
    table: CollisionTable,
    chirality: ChiralityStream,
    t: int,
    boundary: BoundaryMode,
    *,
    workers: int = 1,
) -> Lattice:
    """Advance ``current`` from step ``t`` to ``t + 1``."""
    with Stepper(boundary, chirality, table, workers) as stepper:
        return stepper.advance(current, t)
