"""Utility functions."""

from .rng import Domain, stream

__all__ = [
    "Domain",
    "stream",
]
