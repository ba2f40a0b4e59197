"""Simulation driver.

``run`` validates everything up front, then iterates the time step and
emits coarse-grained frames every ``frame_every`` steps. Output files carry
no timing information, so equal configurations produce identical
directories at any worker count.
"""

from __future__ import annotations

import logging
import time
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from .boundary import BoundaryKind
from .config import SimConfig
from .dynamics import ChiralityStream, Stepper
from .exceptions import ConfigurationError
from .frames import ensure_directory, frame_from_field, write_csv, write_field_csv, write_frame
from .lattice import Lattice
from .observables import block_mass, coarse_grain
from .probes import (
    ProbeResult,
    probe_equilibrium,
    probe_near_wall,
    probe_relaxation,
    probe_sound_speed,
    probe_viscosity,
)
from .scenarios import init

logger = logging.getLogger(__name__)

RELAXATION_FILE = "relaxation.csv"
PROBES_FILE = "probes.csv"
MEASUREMENTS = ("viscosity", "sound", "equilibrium")


@dataclass(frozen=True)
class RunSummary:
    steps: int
    sites: int
    mass_start: int
    mass_end: int
    runtime: float
    site_updates_per_sec: float

    @property
    def mass_conserved(self) -> bool:
        return self.mass_start == self.mass_end


@dataclass
class RunResult:
    config: SimConfig
    final: Lattice
    summary: RunSummary
    series: pd.DataFrame
    frames: list[Path] = field(default_factory=list)
    fields: list[Path] = field(default_factory=list)
    probes: dict[str, ProbeResult] = field(default_factory=dict)
    history: tuple[Lattice, ...] = ()

    @property
    def output_dir(self) -> Path:
        return Path(self.config.output_dir)


SERIES_COLUMNS = ["step", "mass", "std", "rel_std", "std_snapshot"]


class _WindowedDensity:
    """Block densities averaged over the last ``window`` snapshots.

    Integer block masses are summed, so the field equals
    ``coarse_grain(history, block, window).rho`` exactly.
    """

    def __init__(self, block: int, window: int) -> None:
        self.block = block
        self._masses: deque[np.ndarray] = deque(maxlen=window)
        self._total: np.ndarray | None = None

    def push(self, lattice: Lattice) -> dict[str, float]:
        mass = block_mass(lattice.cells, self.block)
        if self._total is None:
            self._total = np.zeros_like(mass)
        if len(self._masses) == self._masses.maxlen:
            self._total -= self._masses[0]
        self._masses.append(mass)
        self._total += mass
        area = self.block * self.block
        rho = self._total / (area * len(self._masses))
        mean = float(rho.mean())
        std = float(rho.std())
        return {
            "mass": lattice.total_mass,
            "std": std,
            "rel_std": std / mean if mean > 0 else 0.0,
            "std_snapshot": float((mass / area).std()),
        }


def run(
    config: SimConfig,
    mask_path: Path | str | None = None,
    workers: int | None = None,
) -> RunResult:
    obstacles = config.load_obstacles(mask_path)
    boundary = config.boundary_mode(obstacles)
    lattice = init(config.build_scenario(), config.dims, config.seed, mask=boundary.mask)
    out = ensure_directory(config.output_dir)
    workers = workers if workers is not None else config.workers

    logger.info(
        f"Run {config.scenario.value} {config.width}x{config.height} "
        f"({config.boundary.value}, {boundary.wall_count} wall sites) for {config.steps} steps, "
        f"seed {config.seed}, {workers} worker(s)"
    )

    history: deque[Lattice] = deque([lattice], maxlen=config.window)
    density = _WindowedDensity(config.block, config.window)
    rows = [{"step": 0, **density.push(lattice)}]
    frames: list[Path] = []
    fields: list[Path] = []

    def emit(step: int) -> None:
        macro = coarse_grain(list(history), config.block, len(history), lattice.units)
        frames.append(write_frame(frame_from_field(macro, step), out))
        fields.append(write_field_csv(macro, out, step))

    mass_start = lattice.total_mass
    emit(0)
    elapsed = 0.0
    with Stepper(boundary, ChiralityStream(config.seed), workers=workers) as stepper:
        for t in range(config.steps):
            started = time.perf_counter()
            lattice = stepper.advance(lattice, t)
            elapsed += time.perf_counter() - started
            history.append(lattice)
            rows.append({"step": t + 1, **density.push(lattice)})
            if (t + 1) % config.frame_every == 0:
                emit(t + 1)
                logger.debug(f"Frame at step {t + 1}, mass {lattice.total_mass}")

    series = pd.DataFrame(rows, columns=SERIES_COLUMNS)
    write_csv(series, out / RELAXATION_FILE)

    probes: dict[str, ProbeResult] = {}
    if config.steps > 0:
        probes["relaxation"] = probe_relaxation(series)
    if config.boundary is BoundaryKind.WALLED:
        probes["near_wall"] = probe_near_wall(list(history))
    if probes:
        write_csv(pd.DataFrame([p.summary_row() for p in probes.values()]), out / PROBES_FILE)

    sites = config.width * config.height
    rate = sites * config.steps / elapsed if elapsed > 0 else float("nan")
    summary = RunSummary(config.steps, sites, mass_start, lattice.total_mass, elapsed, rate)
    if not summary.mass_conserved:
        logger.error(f"Mass changed from {mass_start} to {summary.mass_end}")
    logger.info(
        f"Run finished: mass {summary.mass_start} -> {summary.mass_end}, "
        f"{elapsed:.3f}s, {rate:.3g} site-updates/s, {len(frames)} frames in {out}"
    )
    return RunResult(config, lattice, summary, series, frames, fields, probes, tuple(history))


def measure(config: SimConfig, probe: str, workers: int | None = None) -> ProbeResult:
    """Run one of the periodic-lattice measurement probes described by ``config``."""
    if config.boundary is not BoundaryKind.PERIODIC:
        raise ConfigurationError("boundary", "measurement probes run on periodic lattices")
    workers = workers if workers is not None else config.workers
    if probe == "viscosity":
        return probe_viscosity(
            config.dims,
            config.fill,
            config.amplitude,
            config.seed,
            config.ensembles,
            steps=config.probe_steps,
            workers=workers,
        )
    if probe == "sound":
        return probe_sound_speed(
            config.dims,
            config.fill,
            config.seed,
            delta=config.pulse_delta,
            radius=config.pulse_radius,
            steps=config.probe_steps or 80,
            ensembles=config.ensembles,
            workers=workers,
        )
    if probe == "equilibrium":
        return probe_equilibrium(
            config.dims,
            config.fill,
            config.seed,
            window=config.probe_steps or 200,
            workers=workers,
        )
    raise ConfigurationError("probe", f"unknown measurement {probe!r}; choose from {MEASUREMENTS}")
