"""Multi-organization, multi-workspace project tracking platform."""

__version__ = "0.1.0"
