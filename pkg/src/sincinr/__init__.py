"""Sinc implicit neural representations: bases, networks, dynamics and SINDy."""

__version__ = "0.1.0"
