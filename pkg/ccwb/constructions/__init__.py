# ccwb/constructions/__init__.py
"""Explicit functions, strategies and fooling families behind the separation results."""
