"""Exception hierarchy shared across the package."""

from __future__ import annotations


class MaglabError(Exception):
    """Base class for all package-specific errors."""


class FieldDomainError(MaglabError):
    """Field evaluation requested inside or on the magnet volume."""


class MotionError(MaglabError):
    """Stage command violates travel limits or motion constraints."""


class BracketingError(MaglabError):
    """A scan range does not bracket an interior minimum."""


class CalibrationError(MaglabError):
    """A calibration routine failed (degenerate data, too many bad fits)."""


class ConfigError(MaglabError):
    """Configuration file failed validation."""
