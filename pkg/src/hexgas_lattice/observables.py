"""Coarse-grained fields and closed-form FHP theory values.

Macroscopic quantities are ensemble averages ``N_i = <n_i>`` of the
occupation numbers. With one realisation they are approximated by averaging
over square blocks of sites and a window of consecutive time steps.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import pandas as pd
from numba import njit, prange

from .exceptions import (
    ContractViolation,
    DomainError,
    ExpansionValidityWarning,
    validate_block,
)
from .lattice import C, NUM_DIRECTIONS, Lattice, LatticeUnits

FIELD_COLUMNS = ("bx", "by", "rho", "ux", "uy", "pxx", "pxy", "pyy")


@dataclass(frozen=True, eq=False)
class MacroField:
    """Block-averaged fields; arrays are indexed ``[by, bx]``."""

    block: int
    window: int
    counts: np.ndarray
    occupation: np.ndarray
    rho: np.ndarray
    u: np.ndarray
    pi: np.ndarray

    @property
    def samples(self) -> int:
        """Site-snapshots averaged into each block."""
        return self.block * self.block * self.window

    @property
    def shape(self) -> tuple[int, int]:
        return int(self.rho.shape[0]), int(self.rho.shape[1])

    @property
    def pxx(self) -> np.ndarray:
        return self.pi[..., 0, 0]

    @property
    def pxy(self) -> np.ndarray:
        return self.pi[..., 0, 1]

    @property
    def pyy(self) -> np.ndarray:
        return self.pi[..., 1, 1]

    def to_frame(self) -> pd.DataFrame:
        by, bx = np.indices(self.shape)
        return pd.DataFrame(
            {
                "bx": bx.ravel(),
                "by": by.ravel(),
                "rho": self.rho.ravel(),
                "ux": self.u[..., 0].ravel(),
                "uy": self.u[..., 1].ravel(),
                "pxx": self.pxx.ravel(),
                "pxy": self.pxy.ravel(),
                "pyy": self.pyy.ravel(),
            },
            columns=list(FIELD_COLUMNS),
        )


@njit(parallel=True, cache=True)
def _block_occupation(stack, block):
    """Occupation counts of (T, H, W) states per tile and direction -> (H/b, W/b, 6)."""
    frames, height, width = stack.shape
    out = np.zeros((height // block, width // block, NUM_DIRECTIONS), dtype=np.int64)
    for by in prange(height // block):
        for t in range(frames):
            for y in range(by * block, (by + 1) * block):
                for x in range(width):
                    s = stack[t, y, x]
                    bx = x // block
                    for i in range(NUM_DIRECTIONS):
                        out[by, bx, i] += (s >> i) & 1
    return out


def coarse_grain(
    history: Sequence[Lattice] | Sequence[np.ndarray],
    block: int,
    window: int,
    units: LatticeUnits | None = None,
) -> MacroField:
    """Average the last ``window`` snapshots of ``history`` over blocks."""
    if window < 1:
        raise ContractViolation("coarse_grain", f"window must be >= 1, got {window}")
    if len(history) < window:
        raise ContractViolation(
            "coarse_grain", f"history holds {len(history)} snapshots, window is {window}"
        )
    snapshots = [h.cells if isinstance(h, Lattice) else np.asarray(h) for h in history[-window:]]
    if units is None:
        last = history[-1]
        units = last.units if isinstance(last, Lattice) else LatticeUnits()
    height, width = snapshots[0].shape
    validate_block(block, width, height)

    per_direction = _block_occupation(np.stack(snapshots).astype(np.uint8), block)
    samples = block * block * window
    n = per_direction / samples
    counts = per_direction.sum(axis=-1)

    vel = units.velocities()
    rho = counts / samples
    # Opposite directions are paired so reversal-symmetric blocks cancel exactly.
    momentum = (per_direction[..., :3] - per_direction[..., 3:]) @ vel[:3] / samples
    safe = np.where(rho > 0, rho, 1.0)
    u = np.where((rho > 0)[..., None], momentum / safe[..., None], 0.0)

    pairs = n[..., :3] + n[..., 3:]
    pxx = pairs @ (vel[:3, 0] * vel[:3, 0])
    pxy = pairs @ (vel[:3, 0] * vel[:3, 1])
    pyy = pairs @ (vel[:3, 1] * vel[:3, 1])
    pi = np.empty(rho.shape + (2, 2))
    pi[..., 0, 0] = pxx
    pi[..., 0, 1] = pxy
    pi[..., 1, 0] = pxy
    pi[..., 1, 1] = pyy
    return MacroField(block, window, counts, n, rho, u, pi)


def block_mass(cells: np.ndarray, block: int) -> np.ndarray:
    """Particles in each block x block tile of one snapshot, int64."""
    height, width = np.shape(cells)
    validate_block(block, width, height)
    stack = np.asarray(cells, dtype=np.uint8)[None]
    return _block_occupation(stack, block).sum(axis=-1)


def block_density(cells: np.ndarray, block: int) -> np.ndarray:
    """Instantaneous particles per site averaged over block x block tiles."""
    return block_mass(cells, block) / (block * block)


def spatial_std(field: MacroField) -> float:
    return float(np.std(field.rho))


def relative_std(field: MacroField) -> float:
    mean = float(np.mean(field.rho))
    return float(np.std(field.rho)) / mean if mean > 0 else 0.0


def isotropy_tensors() -> tuple[np.ndarray, np.ndarray]:
    """Second and third moments of the lattice vectors."""
    second = np.einsum("ia,ib->ab", C, C)
    third = np.einsum("ia,ib,ic->abc", C, C, C)
    return second, third


@dataclass(frozen=True)
class TheoryParams:
    z: int = NUM_DIRECTIONS
    d: int = 2
    v: float = 1.0

    @property
    def a(self) -> float:
        return 1.0 / self.z

    @property
    def b(self) -> float:
        return self.d / self.z

    @property
    def c2(self) -> float:
        return self.z / self.d

    @property
    def c4(self) -> float:
        # Fixed by b·C4 = 1/(d+2), the relation the viscosity formulas use.
        return 1.0 / (self.b * (self.d + 2))


def g_factor(rho: float) -> float:
    if rho == 6.0:
        raise DomainError("G", rho, "diverges at rho = 6")
    return (2.0 / 3.0) * (3.0 - rho) / (6.0 - rho)


def galilean_factor(rho: float, params: TheoryParams | None = None) -> float:
    """Prefactor 2·C4·G(ρ) of the advection term; 1 for a Galilean fluid."""
    p = params or TheoryParams()
    return 2.0 * p.c4 * g_factor(rho)


def _check_density(rho: float, *, open_interval: bool = False) -> None:
    if open_interval and not 0.0 < rho < 6.0:
        raise DomainError("rho", rho, "must lie strictly between 0 and 6")
    if not 0.0 <= rho <= 6.0:
        raise DomainError("rho", rho, "must lie within [0, 6]")


def equilibrium_occupation(
    rho: float,
    u: tuple[float, float] | np.ndarray,
    i: int,
    params: TheoryParams | None = None,
) -> float:
    """Second-order low-Mach expansion of the Fermi-Dirac equilibrium."""
    p = params or TheoryParams()
    _check_density(rho)
    uu = np.asarray(u, dtype=np.float64)
    speed = float(np.hypot(*uu))
    if speed > 0.3 * p.v:
        warnings.warn(
            f"|u| = {speed:.3g} exceeds 0.3·v; equilibrium expansion is unreliable",
            ExpansionValidityWarning,
            stacklevel=2,
        )
    if rho == 6.0 and speed > 0.0:
        # Fermi-Dirac is saturated; the quadratic term diverges with G.
        warnings.warn(
            f"rho = 6 with |u| = {speed:.3g}; returning the saturated occupation",
            ExpansionValidityWarning,
            stacklevel=2,
        )
        return p.a * rho
    vi = p.v * C[i]
    value = p.a * rho + (p.b * rho / p.v**2) * float(vi @ uu)
    if speed == 0.0:
        return value
    q = np.outer(vi, vi) - (p.v**2 / p.d) * np.eye(2)
    return value + (rho * g_factor(rho) / p.v**4) * float(uu @ q @ uu)


def theory_pressure(
    rho: float,
    u: tuple[float, float] | np.ndarray = (0.0, 0.0),
    params: TheoryParams | None = None,
) -> float:
    p = params or TheoryParams()
    _check_density(rho)
    u2 = float(np.dot(np.asarray(u, dtype=np.float64), np.asarray(u, dtype=np.float64)))
    pressure = p.a * p.c2 * p.v**2 * rho
    if u2 == 0.0:
        return pressure
    return pressure - (p.c2 / p.d - p.c4) * rho * g_factor(rho) * u2


def sound_speed(params: TheoryParams | None = None) -> float:
    p = params or TheoryParams()
    return p.v * math.sqrt(p.a * p.c2)


def collision_eigenvalue(rho: float) -> float:
    """Λ = 2s(1−s)³ with s = ρ/6, taken positive."""
    s = rho / 6.0
    return 2.0 * s * (1.0 - s) ** 3


def lattice_viscosity(params: TheoryParams | None = None, dt: float = 1.0) -> float:
    p = params or TheoryParams()
    return -dt * p.v**2 / (2.0 * (p.d + 2))


def collision_viscosity(
    rho: float, params: TheoryParams | None = None, dt: float = 1.0
) -> float:
    p = params or TheoryParams()
    _check_density(rho, open_interval=True)
    return dt * p.v**2 * p.b * p.c4 / collision_eigenvalue(rho)


def theory_viscosity(
    rho: float, params: TheoryParams | None = None, dt: float = 1.0
) -> float:
    """Kinematic viscosity ν = collisional + lattice contribution."""
    p = params or TheoryParams()
    _check_density(rho, open_interval=True)
    return (dt * p.v**2 / (p.d + 2)) * (1.0 / collision_eigenvalue(rho) - 0.5)
