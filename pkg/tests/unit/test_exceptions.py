"""
Exception Tests
===============

Test custom exception types and validation functions.
"""

import dataclasses

import pytest

from hexgas_lattice.exceptions import (
    ConfigurationError,
    ContractViolation,
    DomainError,
    LatticeGasError,
    MaskFormatError,
    OutputError,
    RegionError,
    output_error,
    validate_block,
    validate_periodic_height,
    validate_positive,
    validate_probability,
)


class TestExceptionHierarchy:
    """Test exception class hierarchy."""

    def test_lattice_gas_error_is_base(self):
        for cls in (ConfigurationError, ContractViolation, DomainError, OutputError):
            assert issubclass(cls, LatticeGasError)

    def test_input_errors_are_configuration_errors(self):
        """Mask and region problems surface as configuration errors."""
        assert issubclass(MaskFormatError, ConfigurationError)
        assert issubclass(RegionError, ConfigurationError)

    def test_can_catch_all_with_base(self):
        with pytest.raises(LatticeGasError):
            raise OutputError("out/frame.pgm", "disk full")


class TestConfigurationError:
    def test_message_with_line(self):
        err = ConfigurationError("fill", "must be within [0, 1]", line=4)
        assert str(err) == "fill (line 4): must be within [0, 1]"

    def test_message_without_line(self):
        assert str(ConfigurationError("seed", "missing required key")) == (
            "seed: missing required key"
        )

    def test_line_can_be_attached_later(self):
        err = dataclasses.replace(RegionError("regions", "disk does not fit", None, 20, 20), line=7)
        assert isinstance(err, RegionError)
        assert "line 7" in str(err)
        assert "20x20" in str(err)

    def test_mask_error_names_file(self):
        err = MaskFormatError("mask", "bad magic", 1, path="walls.pbm")
        assert str(err) == "walls.pbm: line 1: bad magic"


class TestOtherErrors:
    def test_contract_violation(self):
        assert str(ContractViolation("coarse_grain", "empty history")) == (
            "coarse_grain: empty history"
        )

    def test_domain_error(self):
        err = DomainError("collision_viscosity", 0.0, "density must be in (0, 6)")
        assert "0.0" in str(err)
        assert err.quantity == "collision_viscosity"

    def test_output_error_from_os_error(self):
        err = output_error("out", PermissionError(13, "Permission denied"))
        assert str(err) == "out: Permission denied"


class TestValidationFunctions:
    def test_probability_bounds(self):
        validate_probability("fill", 0.0)
        validate_probability("fill", 1.0)
        with pytest.raises(ConfigurationError) as exc:
            validate_probability("fill", 1.01)
        assert exc.value.key == "fill"

    def test_positive(self):
        validate_positive("block", 1)
        with pytest.raises(ConfigurationError):
            validate_positive("block", 0)

    def test_block_divides(self):
        validate_block(10, 100, 50)
        with pytest.raises(ConfigurationError) as exc:
            validate_block(3, 100, 50)
        assert "100x50" in str(exc.value)

    def test_periodic_height(self):
        validate_periodic_height(64)
        with pytest.raises(ConfigurationError) as exc:
            validate_periodic_height(63)
        assert exc.value.key == "height"
