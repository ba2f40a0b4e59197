"""Density frames (binary PGM) and CSV dumps of coarse-grained fields."""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from .exceptions import ContractViolation, OutputError, output_error
from .lattice import NUM_DIRECTIONS
from .observables import MacroField

logger = logging.getLogger(__name__)

MAXVAL = 255
FLOAT_FORMAT = "%.9g"
_HEADER = re.compile(rb"P5\s+(\d+)\s+(\d+)\s+(\d+)\s")


@dataclass(frozen=True, eq=False)
class Frame:
    """8-bit block-density image; ``payload[by, bx]`` with ``by = 0`` at the bottom."""

    index: int
    payload: np.ndarray

    def __post_init__(self) -> None:
        payload = np.array(self.payload, dtype=np.uint8, copy=True)
        if payload.ndim != 2:
            raise ContractViolation("Frame", f"payload must be 2-D, got {payload.shape}")
        payload.setflags(write=False)
        object.__setattr__(self, "payload", payload)

    @property
    def filename(self) -> str:
        return frame_filename(self.index)


def frame_filename(index: int) -> str:
    return f"frame_{index:06d}.pgm"


def field_filename(index: int) -> str:
    return f"field_{index:06d}.csv"


def gray_levels(counts: np.ndarray, samples: int) -> np.ndarray:
    """round-half-up(255·ρ/6) with ρ = counts/samples, in integer arithmetic."""
    if samples <= 0:
        raise ContractViolation("gray_levels", f"samples must be positive, got {samples}")
    c = np.asarray(counts, dtype=np.int64)
    if np.any(c < 0) or np.any(c > NUM_DIRECTIONS * samples):
        raise ContractViolation("gray_levels", "block counts outside [0, 6·samples]")
    denominator = 2 * NUM_DIRECTIONS * samples
    return ((2 * MAXVAL * c + NUM_DIRECTIONS * samples) // denominator).astype(np.uint8)


def frame_from_field(field: MacroField, index: int) -> Frame:
    return Frame(index, gray_levels(field.counts, field.samples))


def ensure_directory(directory: Path | str) -> Path:
    path = Path(directory)
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise output_error(path, e) from e
    if not path.is_dir():
        raise OutputError(str(path), "not a directory")
    return path


def encode_pgm(frame: Frame) -> bytes:
    rows, cols = frame.payload.shape
    header = f"P5\n{cols} {rows}\n{MAXVAL}\n".encode("ascii")
    return header + np.ascontiguousarray(frame.payload[::-1]).tobytes()


def write_frame(frame: Frame, directory: Path | str) -> Path:
    path = ensure_directory(directory) / frame.filename
    try:
        path.write_bytes(encode_pgm(frame))
    except OSError as e:
        raise output_error(path, e) from e
    logger.debug(f"Wrote {path}")
    return path


def read_pgm(path: Path | str) -> Frame:
    """Read a frame written by :func:`write_frame` back into lattice orientation."""
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as e:
        raise output_error(path, e) from e
    match = _HEADER.match(data)
    if match is None:
        raise OutputError(str(path), "not a binary PGM (P5) file")
    cols, rows, maxval = (int(g) for g in match.groups())
    if maxval != MAXVAL:
        raise OutputError(str(path), f"unsupported maxval {maxval}")
    body = data[match.end() :]
    if len(body) != rows * cols:
        raise OutputError(str(path), f"expected {rows * cols} pixels, found {len(body)}")
    raster = np.frombuffer(body, dtype=np.uint8).reshape(rows, cols)
    index_match = re.search(r"(\d+)", path.stem)
    index = int(index_match.group(1)) if index_match else 0
    return Frame(index, raster[::-1])


def write_csv(table: pd.DataFrame, path: Path | str) -> Path:
    path = Path(path)
    ensure_directory(path.parent)
    try:
        table.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    except OSError as e:
        raise output_error(path, e) from e
    return path


def write_field_csv(field: MacroField, directory: Path | str, index: int) -> Path:
    """One row per block, columns ``bx,by,rho,ux,uy,pxx,pxy,pyy``."""
    return write_csv(field.to_frame(), Path(directory) / field_filename(index))
