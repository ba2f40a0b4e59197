"""Exception hierarchy and the small validators shared by config, scenarios and probes."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path


class LatticeGasError(Exception):
    """Base exception for hexgas-lattice errors."""


@dataclass(eq=False)
class ConfigurationError(LatticeGasError):
    """Raised when user-supplied configuration is invalid."""

    key: str
    message: str
    line: int | None = None

    def __str__(self) -> str:
        where = f" (line {self.line})" if self.line is not None else ""
        return f"{self.key}{where}: {self.message}"


@dataclass(eq=False)
class MaskFormatError(ConfigurationError):
    """Raised when an obstacle bitmap cannot be parsed."""

    path: str | None = None

    def __str__(self) -> str:
        prefix = f"{self.path}: " if self.path else ""
        where = f"line {self.line}: " if self.line is not None else ""
        return f"{prefix}{where}{self.message}"


@dataclass(eq=False)
class RegionError(ConfigurationError):
    """Raised when a zero-density region does not fit on the lattice."""

    width: int = 0
    height: int = 0

    def __str__(self) -> str:
        where = f" (line {self.line})" if self.line is not None else ""
        return f"{self.key}{where}: {self.message} on a {self.width}x{self.height} lattice"


@dataclass(eq=False)
class ContractViolation(LatticeGasError):
    """Raised when an internal precondition is broken by the caller."""

    operation: str
    message: str

    def __str__(self) -> str:
        return f"{self.operation}: {self.message}"


@dataclass(eq=False)
class DomainError(LatticeGasError):
    """Raised when a theory formula is evaluated outside its domain."""

    quantity: str
    value: float
    message: str

    def __str__(self) -> str:
        return f"{self.quantity}({self.value!r}): {self.message}"


@dataclass(eq=False)
class OutputError(LatticeGasError):
    """Raised when writing simulation output fails."""

    path: str
    message: str

    def __str__(self) -> str:
        return f"{self.path}: {self.message}"


class ExpansionValidityWarning(UserWarning):
    """Velocity is outside the low-Mach range of the equilibrium expansion."""


def validate_probability(name: str, value: float) -> None:
    if not 0.0 <= value <= 1.0:
        raise ConfigurationError(name, f"must be within [0, 1], got {value!r}")


def validate_positive(name: str, value: float) -> None:
    if not value > 0:
        raise ConfigurationError(name, f"must be > 0, got {value!r}")


def validate_block(block: int, width: int, height: int) -> None:
    validate_positive("block", block)
    if width % block or height % block:
        raise ConfigurationError(
            "block",
            f"{block} does not divide lattice dimensions {width}x{height}",
        )


def validate_periodic_height(height: int) -> None:
    if height % 2:
        raise ConfigurationError(
            "height",
            f"periodic boundaries need an even height to keep row parity, got {height}",
        )


def output_error(path: Path | str, exc: OSError) -> OutputError:
    return OutputError(str(path), exc.strerror or str(exc))
