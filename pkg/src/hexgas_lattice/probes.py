"""Measurement probes comparing simulated transport against theory values.

Each probe returns a :class:`ProbeResult` carrying the measured value, the
closed-form prediction, a status and the time series it was fitted from.
Ensemble members run one after another and are combined in member order;
``workers`` sets the numba threads of each member's stepper, so a probe is
bit-identical across reruns and worker counts.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Sequence

import numpy as np
import pandas as pd

from .boundary import BoundaryMode
from .dynamics import ChiralityStream, Stepper
from .exceptions import ConfigurationError, validate_periodic_height, validate_probability
from .frames import write_csv
from .lattice import (
    C,
    FULL_STATE,
    NUM_DIRECTIONS,
    ROW_PITCH,
    CellKind,
    Direction,
    Lattice,
    LatticeUnits,
    mass_field,
    occupation,
    site_positions,
)
from .observables import TheoryParams, collision_eigenvalue, sound_speed, theory_viscosity
from .scenarios import sample_cells

logger = logging.getLogger(__name__)

SEED_MASK = (1 << 64) - 1
RELAXATION_FRACTION = 0.1
MONOTONE_WINDOW = 25
NEAR_WALL_COLUMNS = 3
NEAR_WALL_RATIO = 1.1
EQUILIBRIUM_TOLERANCE = 0.01


class ProbeStatus(str, Enum):
    OK = "ok"
    INCONCLUSIVE = "inconclusive"
    FAILED = "failed"


@dataclass
class ProbeResult:
    name: str
    measured: float
    units: str
    theory: float
    status: ProbeStatus
    series: pd.DataFrame = field(default_factory=pd.DataFrame)
    notes: str = ""
    extras: dict[str, float] = field(default_factory=dict)

    @property
    def relative_error(self) -> float:
        if self.theory == 0 or not math.isfinite(self.measured):
            return math.nan
        return abs(self.measured - self.theory) / abs(self.theory)

    @property
    def ok(self) -> bool:
        return self.status is ProbeStatus.OK

    def summary_row(self) -> dict[str, object]:
        return {
            "probe": self.name,
            "measured": self.measured,
            "theory": self.theory,
            "units": self.units,
            "relative_error": self.relative_error,
            "status": self.status.value,
        }

    def report(self) -> str:
        rows: list[tuple[str, str]] = [
            ("probe", self.name),
            ("measured", f"{self.measured:.6g} {self.units}".strip()),
            ("theory", f"{self.theory:.6g} {self.units}".strip()),
            ("relative error", f"{self.relative_error:.4f}"),
            ("status", self.status.value),
        ]
        rows.extend((key, f"{value:.6g}") for key, value in self.extras.items())
        text = pd.DataFrame(rows, columns=["quantity", "value"]).to_string(index=False)
        return f"{text}\n{self.notes}" if self.notes else text

    def to_csv(self, path: Path | str) -> Path:
        return write_csv(self.series, path)


def _finish(result: ProbeResult) -> ProbeResult:
    if result.status is ProbeStatus.OK:
        logger.info(
            f"Probe {result.name}: measured {result.measured:.6g}, theory {result.theory:.6g}"
        )
    else:
        logger.warning(f"Probe {result.name} {result.status.value}: {result.notes}")
    return result


def _member_seed(seed: int, member: int) -> int:
    return (seed + member) & SEED_MASK


def _periodic(dims: tuple[int, int]) -> BoundaryMode:
    width, height = dims
    validate_periodic_height(height)
    return BoundaryMode.periodic(width, height)


# Relaxation and near-wall probes read the output of a run.


def probe_relaxation(series: pd.DataFrame) -> ProbeResult:
    """First step at which the block-density std-dev falls below 10% of its start.

    ``series`` needs ``step`` and ``std`` columns, one row per step; ``run``
    writes ``std`` over the coarse field averaged across its window.
    """
    steps = series["step"].to_numpy()
    std = series["std"].to_numpy(dtype=np.float64)
    initial = float(std[0])
    threshold = RELAXATION_FRACTION * initial
    below = np.flatnonzero(std < threshold)

    windows = std[MONOTONE_WINDOW:]
    n = len(windows) // MONOTONE_WINDOW
    means = windows[: n * MONOTONE_WINDOW].reshape(n, MONOTONE_WINDOW).mean(axis=1)
    extras: dict[str, float] = {
        "initial_std": initial,
        "final_std": float(std[-1]),
        "monotone_after_25": float(bool(np.all(np.diff(means) <= 0.0))),
    }
    if means.size > 1:
        extras["largest_window_rise"] = float(max(np.diff(means).max(), 0.0))
    if len(std) > 10 and std[-1] > 0:
        extras["reduction_from_step_10"] = float(std[10] / std[-1])

    if below.size == 0:
        return _finish(
            ProbeResult(
                "relaxation",
                math.nan,
                "steps",
                math.nan,
                ProbeStatus.INCONCLUSIVE,
                series,
                f"std-dev never fell below {threshold:.4g} (10% of the initial value)",
                extras,
            )
        )
    return _finish(
        ProbeResult(
            "relaxation",
            float(steps[below[0]]),
            "steps",
            math.nan,
            ProbeStatus.OK,
            series,
            "",
            extras,
        )
    )


def probe_near_wall(
    history: Sequence[Lattice], columns: int = NEAR_WALL_COLUMNS
) -> ProbeResult:
    """Time-averaged density next to the right wall relative to the bulk."""
    stack = np.stack([mass_field(h.cells) for h in history]).astype(np.float64)
    fluid = history[-1].mask == CellKind.FLUID
    width = stack.shape[2]
    if fluid[:, -1].any():
        return _finish(
            ProbeResult(
                "near_wall",
                math.nan,
                "ratio",
                NEAR_WALL_RATIO,
                ProbeStatus.INCONCLUSIVE,
                notes="the right edge is not a wall",
            )
        )
    density = stack.mean(axis=0)
    fluid_columns = [x for x in range(width - 1, -1, -1) if fluid[:, x].any()]
    near = fluid_columns[:columns]
    lo, hi = width // 4, (3 * width) // 4
    bulk_mask = fluid.copy()
    bulk_mask[:, :lo] = False
    bulk_mask[:, hi:] = False
    near_mask = np.zeros_like(fluid)
    near_mask[:, near] = True
    near_mask &= fluid

    near_density = float(density[near_mask].mean())
    bulk_density = float(density[bulk_mask].mean())
    ratio = near_density / bulk_density if bulk_density > 0 else math.nan
    column_density = np.array(
        [density[fluid[:, x], x].mean() if fluid[:, x].any() else math.nan for x in range(width)]
    )
    series = pd.DataFrame({"x": np.arange(width), "rho": column_density})
    status = ProbeStatus.OK if ratio >= NEAR_WALL_RATIO else ProbeStatus.FAILED
    return _finish(
        ProbeResult(
            "near_wall",
            ratio,
            "ratio",
            NEAR_WALL_RATIO,
            status,
            series,
            "" if status is ProbeStatus.OK else f"ratio {ratio:.4g} below {NEAR_WALL_RATIO}",
            {"near_density": near_density, "bulk_density": bulk_density},
        )
    )


# Sound: a small disk over-density spreads as a ring moving at c_s.

SOUND_SMOOTHING = 5
SOUND_SPEED_RANGE = (0.2, 1.0)
SOUND_SPEED_STEP = 0.005


@dataclass(frozen=True)
class _RadialGeometry:
    bins: np.ndarray
    counts: np.ndarray
    disk: np.ndarray
    reach: int

    @property
    def nbins(self) -> int:
        return int(self.counts.size)


def _radial_geometry(
    width: int, height: int, radius: float, units: LatticeUnits
) -> _RadialGeometry:
    xs, ys = site_positions(width, height, units)
    lx = width * units.spacing
    ly = height * ROW_PITCH * units.spacing
    # Measured from the domain centre, so these are already minimum-image distances.
    r = np.hypot(xs - lx / 2, ys - ly / 2)
    bins = np.floor(r / units.spacing).astype(np.intp).ravel()
    counts = np.bincount(bins)
    # Full circles only; corner bins see the periodic images of the ring.
    reach = int(min(lx, ly) / (2 * units.spacing))
    return _RadialGeometry(bins, counts, r <= radius, reach)


def _track_front(
    profiles: np.ndarray, times: np.ndarray, speeds: np.ndarray, offsets: np.ndarray
) -> np.ndarray:
    """Sum of ``profiles[k]`` along every line ``r = offset + speed·t``.

    Radii are in bins with bin ``j`` centred on ``j + 0.5``; returns an
    array of shape (speeds, offsets).
    """
    nbins = profiles.shape[1]
    pos = offsets[None, :, None] + speeds[:, None, None] * times[None, None, :] - 0.5
    lo = np.floor(pos).astype(np.intp)
    frac = pos - lo
    inside = (lo >= 0) & (lo + 1 < nbins)
    lo = np.clip(lo, 0, nbins - 2)
    rows = np.broadcast_to(np.arange(times.size), pos.shape)
    values = (1.0 - frac) * profiles[rows, lo] + frac * profiles[rows, lo + 1]
    return np.where(inside, values, 0.0).sum(axis=-1)


def _refine(scores: np.ndarray, k: int) -> float:
    """Sub-grid vertex of a parabola through ``scores[k-1:k+2]``."""
    a, b, _ = np.polyfit([-1.0, 0.0, 1.0], scores[k - 1 : k + 2], 2)
    return float(np.clip(-b / (2 * a), -1.0, 1.0)) if a < 0 else 0.0


def probe_sound_speed(
    dims: tuple[int, int],
    fill: float,
    seed: int,
    *,
    delta: float = 0.1,
    radius: float | None = None,
    steps: int = 80,
    ensembles: int = 16,
    workers: int = 1,
    units: LatticeUnits | None = None,
) -> ProbeResult:
    """Pulse-tracking estimate of the sound speed on a periodic lattice.

    The radial density excess is normalised by the shot noise of each
    annulus and smoothed. The front is the straight line ``r = r0 + c·t``
    through the (radius, time) plane that collects the most excess; its
    slope ``c`` is the measured sound speed.
    """
    units = units or LatticeUnits()
    width, height = dims
    boundary = _periodic(dims)
    validate_probability("fill", fill)
    validate_probability("pulse_delta", delta)
    if fill + delta > 1.0:
        raise ConfigurationError("pulse_delta", f"fill + delta = {fill + delta!r} exceeds 1")
    if ensembles < 1:
        raise ConfigurationError("ensembles", f"must be >= 1, got {ensembles}")
    if steps < 1:
        raise ConfigurationError("probe_steps", f"must be >= 1, got {steps}")
    theory = sound_speed(TheoryParams(v=units.v))
    radius = float(radius if radius is not None else max(3, min(width, height) // 20))

    if delta == 0.0:
        return _finish(
            ProbeResult(
                "sound_speed",
                math.nan,
                "spacing/tick",
                theory,
                ProbeStatus.INCONCLUSIVE,
                notes="no over-density (delta = 0); nothing propagates",
            )
        )

    geometry = _radial_geometry(width, height, radius, units)
    probabilities = np.where(geometry.disk, fill + delta, fill)[..., None]
    start = max(steps // 4, 1)
    sample_times = np.arange(start, steps + 1)

    total = np.zeros((sample_times.size, geometry.nbins))
    for e in range(ensembles):
        member_seed = _member_seed(seed, e)
        lattice = Lattice(sample_cells(probabilities, width, height, member_seed), units=units)
        with Stepper(boundary, ChiralityStream(member_seed), workers=workers) as stepper:
            for t in range(steps):
                lattice = stepper.advance(lattice, t)
                if t + 1 >= start:
                    total[t + 1 - start] += np.bincount(
                        geometry.bins,
                        weights=mass_field(lattice.cells).ravel(),
                        minlength=geometry.nbins,
                    )

    counts = np.maximum(geometry.counts, 1)
    excess = total / ensembles - NUM_DIRECTIONS * fill * counts
    # Excess per annulus over sqrt(sites): unit-variance noise at every radius.
    profiles = excess / np.sqrt(counts)
    kernel = np.ones(SOUND_SMOOTHING) / SOUND_SMOOTHING
    profiles = np.array([np.convolve(p, kernel, mode="same") for p in profiles])
    profiles[:, geometry.reach :] = 0.0
    sigma = math.sqrt(NUM_DIRECTIONS * fill * (1.0 - fill) / (ensembles * SOUND_SMOOTHING))

    # Radii in bins, times in steps; speeds are fractions of v, i.e. bins per step.
    rb = radius / units.spacing
    lo, hi = SOUND_SPEED_RANGE
    fractions = np.arange(lo, hi + SOUND_SPEED_STEP / 2, SOUND_SPEED_STEP)
    offsets = np.arange(-rb, 2.0 * rb + 0.25, 0.5)
    scores = _track_front(profiles, sample_times.astype(np.float64), fractions, offsets)
    best_speed, best_offset = np.unravel_index(int(np.argmax(scores)), scores.shape)
    line_mean = float(scores[best_speed, best_offset]) / sample_times.size
    snr = line_mean / sigma
    times = sample_times * units.tick

    front = offsets[best_offset] + fractions[best_speed] * sample_times
    # Per-step maxima near the front, for the series only.
    window = max(1, int(round(rb)))
    peaks = np.empty(times.size)
    for k, centre in enumerate(front):
        a = int(max(centre - window, 0))
        b = int(min(centre + window + 1, geometry.reach))
        peaks[k] = a + int(np.argmax(profiles[k, a:b])) + 0.5 if b > a else math.nan
    series = pd.DataFrame(
        {
            "step": sample_times,
            "time": times,
            "radius": peaks * units.spacing,
            "front": front * units.spacing,
        }
    )

    on_edge = best_speed in (0, fractions.size - 1)
    if on_edge:
        slope = math.nan
    else:
        shift = _refine(scores[:, best_offset], int(best_speed))
        slope = float(fractions[best_speed] + shift * SOUND_SPEED_STEP) * units.v
    extras = {
        "intercept": float(offsets[best_offset] * units.spacing),
        "front_amplitude": line_mean,
        "noise_sigma": sigma,
        "snr": snr,
        "radius": radius,
    }
    detected = np.isfinite(peaks)
    if detected.sum() >= 3 and np.ptp(peaks[detected]) > 0:
        r_squared = float(np.corrcoef(times[detected], peaks[detected])[0, 1] ** 2)
        extras["r_squared"] = r_squared

    if on_edge or snr < 3.0:
        return _finish(
            ProbeResult(
                "sound_speed",
                slope,
                "spacing/tick",
                theory,
                ProbeStatus.INCONCLUSIVE,
                series,
                f"no density front above 3 sigma of shot noise (snr {snr:.2f})"
                if snr < 3.0
                else "best front speed lies on the edge of the search range",
                extras,
            )
        )
    return _finish(
        ProbeResult(
            "sound_speed", slope, "spacing/tick", theory, ProbeStatus.OK, series, "", extras
        )
    )


# Viscosity: decay of a transverse shear wave u_x(y) = U sin(2πy/H).

_JX = np.array(
    [float(occupation(np.uint8(s)) @ C[:, 0]) for s in range(FULL_STATE + 1)],
    dtype=np.float64,
)


def shear_probabilities(
    dims: tuple[int, int], fill: float, amplitude: float, units: LatticeUnits | None = None
) -> np.ndarray:
    """Per-direction fill that imprints ``u_x = U sin(2πy/H)`` at density 6f."""
    v = (units or LatticeUnits()).v
    width, height = dims
    rho = NUM_DIRECTIONS * fill
    ys = np.arange(height, dtype=np.float64)
    delta = rho * amplitude * np.sin(2 * np.pi * ys / height) / 2.0
    p = np.full((height, 1, NUM_DIRECTIONS), fill)
    p[:, 0, Direction.E] += delta
    p[:, 0, Direction.W] -= delta
    if np.any(p < 0.0) or np.any(p > 1.0):
        raise ConfigurationError(
            "amplitude", f"U = {amplitude * v!r} drives occupations outside [0, 1] at fill {fill!r}"
        )
    return np.broadcast_to(p, (height, width, NUM_DIRECTIONS))


def shear_noise(dims: tuple[int, int], fill: float, ensembles: int) -> float:
    """Shot-noise std-dev of the ensemble-averaged mode amplitude."""
    width, height = dims
    rho = NUM_DIRECTIONS * fill
    return math.sqrt(2.0 * 3.0 * fill * (1.0 - fill) / (width * height * ensembles)) / rho


def probe_viscosity(
    dims: tuple[int, int],
    fill: float,
    amplitude: float,
    seed: int,
    ensembles: int = 16,
    *,
    steps: int | None = None,
    workers: int = 1,
    units: LatticeUnits | None = None,
) -> ProbeResult:
    """Shear-wave decay estimate of the kinematic viscosity.

    The wavenumber is ``k = 2π/H`` with ``y`` counted in rows; ``extras``
    also carries the value rescaled to the Euclidean row pitch.
    """
    units = units or LatticeUnits()
    width, height = dims
    boundary = _periodic(dims)
    if not 0.0 < fill < 1.0:
        raise ConfigurationError("fill", f"shear probe needs 0 < fill < 1, got {fill!r}")
    if ensembles < 1:
        raise ConfigurationError("ensembles", f"must be >= 1, got {ensembles}")
    rho = NUM_DIRECTIONS * fill
    theory = theory_viscosity(rho, TheoryParams(v=units.v), dt=units.tick)
    probabilities = shear_probabilities(dims, fill, amplitude, units)
    k = 2.0 * math.pi / (height * units.spacing)
    # Stress needs a few collision times to follow the imprinted flow.
    skip = math.ceil(2.0 / collision_eigenvalue(rho))
    if steps is None:
        steps = skip + math.ceil(2.0 / (theory * k**2 * units.tick))
    skip = min(skip, steps // 2)
    weights = (
        2.0 / (width * height * rho) * np.sin(2 * np.pi * np.arange(height) / height)[:, None]
    )

    total = np.zeros(steps + 1)
    for e in range(ensembles):
        member_seed = _member_seed(seed, e)
        lattice = Lattice(sample_cells(probabilities, width, height, member_seed), units=units)
        total[0] += np.sum(_JX[lattice.cells] * weights)
        with Stepper(boundary, ChiralityStream(member_seed), workers=workers) as stepper:
            for t in range(steps):
                lattice = stepper.advance(lattice, t)
                total[t + 1] += np.sum(_JX[lattice.cells] * weights)
    mean_amplitude = total / ensembles
    time = np.arange(steps + 1) * units.tick
    series = pd.DataFrame({"step": np.arange(steps + 1), "time": time, "amplitude": mean_amplitude})
    sigma = shear_noise(dims, fill, ensembles)
    a0 = float(mean_amplitude[0])
    extras: dict[str, float] = {
        "initial_amplitude": a0,
        "noise_sigma": sigma,
        "k": k,
        "fit_start": float(skip),
    }

    if a0 < 5.0 * sigma:
        return _finish(
            ProbeResult(
                "viscosity",
                math.nan,
                "spacing^2/tick",
                theory,
                ProbeStatus.INCONCLUSIVE,
                series,
                f"initial mode amplitude {a0:.3g} is below 5 sigma ({5 * sigma:.3g})",
                extras,
            )
        )

    usable = mean_amplitude[skip:] > 3.0 * sigma
    # Fit only the leading run of points above the noise floor.
    cut = skip + (int(np.argmin(usable)) if not usable.all() else usable.size)
    if cut - skip < 3:
        return _finish(
            ProbeResult(
                "viscosity",
                math.nan,
                "spacing^2/tick",
                theory,
                ProbeStatus.FAILED,
                series,
                "mode amplitude sinks into noise before a decay can be fitted",
                extras,
            )
        )
    slope, _ = np.polyfit(time[skip:cut], np.log(mean_amplitude[skip:cut]), 1)
    decay = -float(slope)
    extras.update({"decay": decay, "fit_points": float(cut - skip)})
    if decay <= 0.0:
        return _finish(
            ProbeResult(
                "viscosity",
                math.nan,
                "spacing^2/tick",
                theory,
                ProbeStatus.FAILED,
                series,
                f"non-positive fitted decay {decay:.3g}; signal below noise",
                extras,
            )
        )
    nu = decay / k**2
    extras["nu_euclidean"] = nu * ROW_PITCH**2
    return _finish(
        ProbeResult("viscosity", nu, "spacing^2/tick", theory, ProbeStatus.OK, series, "", extras)
    )


def probe_equilibrium(
    dims: tuple[int, int],
    fill: float,
    seed: int,
    *,
    window: int = 200,
    workers: int = 1,
    units: LatticeUnits | None = None,
) -> ProbeResult:
    """Per-direction occupations of a uniform fill averaged over ``window`` steps."""
    units = units or LatticeUnits()
    width, height = dims
    boundary = _periodic(dims)
    validate_probability("fill", fill)
    lattice = Lattice(
        sample_cells(np.full(NUM_DIRECTIONS, fill), width, height, seed), units=units
    )
    totals = np.zeros(NUM_DIRECTIONS, dtype=np.int64)
    rows = []
    with Stepper(boundary, ChiralityStream(seed), workers=workers) as stepper:
        for t in range(window):
            lattice = stepper.advance(lattice, t)
            per_direction = (
                occupation(lattice.cells).reshape(-1, NUM_DIRECTIONS).sum(axis=0, dtype=np.int64)
            )
            totals += per_direction
            rows.append(per_direction / (width * height))
    averaged = totals / (width * height * window)
    series = pd.DataFrame(rows, columns=[f"n{i}" for i in range(NUM_DIRECTIONS)])
    series.insert(0, "step", np.arange(1, window + 1))
    deviation = float(np.max(np.abs(averaged - fill)))
    extras = {f"n{i}": float(averaged[i]) for i in range(NUM_DIRECTIONS)}
    extras["max_deviation"] = deviation
    status = ProbeStatus.OK if deviation <= EQUILIBRIUM_TOLERANCE else ProbeStatus.FAILED
    return _finish(
        ProbeResult(
            "equilibrium",
            float(averaged.mean()),
            "occupation",
            fill,
            status,
            series,
            "" if status is ProbeStatus.OK else f"direction spread {deviation:.4g} exceeds 0.01",
            extras,
        )
    )
