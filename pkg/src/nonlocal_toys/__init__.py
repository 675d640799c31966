"""Exact simulators and verifiers for nonlocal toy theories with less complementarity."""

__version__ = "0.1.0"
