"""Deterministic digital-twin engine for a two-arm surgical teleoperation trainer."""

__version__ = "0.1.0"
