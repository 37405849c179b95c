"""Finite invariants of unramified toral characters: tori, signs, orbit sums."""

__version__ = "0.1.0"
