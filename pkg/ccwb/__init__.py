"""Exact verification workbench for two-party communication complexity."""

__version__ = "1.0.0"
