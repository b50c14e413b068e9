"""screenintel: turn infostealer infection screenshots into threat intelligence."""

__version__ = "0.1.0"
