"""Robe's restricted three-body problem with an oblate, fluid-filled primary."""

__version__ = "0.1.0"
