"""Directed metric graphs, network forms, symmetries and semigroups."""

__version__ = "0.1.0"
