"""Sherali-Adams lifts, exact LP certificates and valuations for CNF principles."""

__version__ = "0.1.0"
