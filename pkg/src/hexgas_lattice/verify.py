"""Invariant suite behind ``hexgas verify``."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass

import numpy as np

from .boundary import BoundaryMode, random_obstacles
from .dynamics import (
    ChiralityStream,
    CollisionTable,
    Stepper,
    build_table,
    collide_formula,
    table_momentum_defect,
)
from .lattice import FULL_STATE, NUM_DIRECTIONS, Lattice, gather_sources, mass_field, opposite
from .scenarios import Scenario, init

logger = logging.getLogger(__name__)

_TWO_BODY = {(1 << i) | (1 << opposite(i)) for i in range(3)}
_THREE_BODY = {0b010101, 0b101010}


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail}"


def check_table_matches_formula(table: CollisionTable) -> CheckResult:
    mismatches = [
        (q, s)
        for q in (0, 1)
        for s in range(FULL_STATE + 1)
        if table.lookup(s, q) != collide_formula(s, q)
    ]
    return CheckResult(
        "table_matches_formula",
        not mismatches,
        "128 entries agree" if not mismatches else f"mismatches at (q, s) = {mismatches[:4]}",
    )


def check_table_conservation(table: CollisionTable) -> CheckResult:
    states = np.arange(FULL_STATE + 1)
    mass_ok = all(
        np.array_equal(mass_field(table.out[q]), mass_field(states.astype(np.uint8)))
        for q in (0, 1)
    )
    defect = table_momentum_defect(table)
    differs = {int(s) for s in np.flatnonzero(table.out_q0 != table.out_q1)}
    passed = mass_ok and defect < 1e-12 and differs == _TWO_BODY
    return CheckResult(
        "table_conservation",
        passed,
        f"mass {'ok' if mass_ok else 'broken'}, momentum defect {defect:.2e}, "
        f"chirality-dependent states {sorted(differs)}",
    )


def check_three_body_involution(table: CollisionTable) -> CheckResult:
    broken = [s for s in _THREE_BODY for q in (0, 1) if table.lookup(table.lookup(s, q), q) != s]
    return CheckResult(
        "three_body_involution",
        not broken,
        "symmetric triples swap and swap back" if not broken else f"broken for {broken}",
    )


def check_streaming_involution(width: int, height: int) -> CheckResult:
    sources = gather_sources(width, height)
    identity = np.arange(width * height)
    broken = [
        i
        for i in range(NUM_DIRECTIONS)
        if not np.array_equal(sources[i][sources[opposite(i)]], identity)
    ]
    return CheckResult(
        "streaming_involution",
        not broken,
        f"{width}x{height}, all directions" if not broken else f"broken directions {broken}",
    )


def _evolve(
    lattice: Lattice, boundary: BoundaryMode, seed: int, steps: int, workers: int
) -> Lattice:
    with Stepper(boundary, ChiralityStream(seed), workers=workers) as stepper:
        for t in range(steps):
            lattice = stepper.advance(lattice, t)
    return lattice


def check_mass_conservation(
    name: str, boundary: BoundaryMode, seed: int, steps: int, workers: int
) -> CheckResult:
    lattice = init(Scenario(fill=0.5), (boundary.width, boundary.height), seed, mask=boundary.mask)
    start = lattice.total_mass
    end = _evolve(lattice, boundary, seed, steps, workers).total_mass
    return CheckResult(name, start == end, f"{start} -> {end} particles over {steps} steps")


def check_determinism(size: int, seed: int, steps: int, workers: int) -> CheckResult:
    boundary = BoundaryMode.periodic(size, size)
    lattice = init(Scenario(fill=0.5), (size, size), seed)
    sequential = _evolve(lattice, boundary, seed, steps, 1)
    parallel = _evolve(lattice, boundary, seed, steps, max(2, workers))
    repeat = _evolve(lattice, boundary, seed, steps, 1)
    same = np.array_equal(sequential.cells, parallel.cells) and np.array_equal(
        sequential.cells, repeat.cells
    )
    return CheckResult(
        "determinism", same, f"{steps} steps, 1 vs {max(2, workers)} workers and a rerun"
    )


def run_invariant_suite(
    size: int = 100,
    steps: int = 1000,
    seed: int = 12345,
    workers: int = 1,
) -> list[CheckResult]:
    """Run every invariant check; ``size`` is rounded up to an even number."""
    size += size % 2
    table = build_table()
    started = time.perf_counter()
    results = [
        check_table_matches_formula(table),
        check_table_conservation(table),
        check_three_body_involution(table),
        check_streaming_involution(size, size),
        check_mass_conservation(
            "periodic_mass", BoundaryMode.periodic(size, size), seed, steps, workers
        ),
        check_mass_conservation(
            "bounce_back_mass",
            BoundaryMode.walled(size, size, random_obstacles(size, size, 0.1, seed)),
            seed,
            steps,
            workers,
        ),
        check_determinism(size, seed, min(steps, 50), workers),
    ]
    for result in results:
        log = logger.info if result.passed else logger.error
        log(result.line())
    logger.debug(f"Invariant suite finished in {time.perf_counter() - started:.2f}s")
    return results
