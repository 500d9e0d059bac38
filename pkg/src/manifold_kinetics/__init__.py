"""Kinetic (BGK) gas dynamics and Chapman-Enskog closures on curved surfaces."""

__version__ = "0.1.0"
