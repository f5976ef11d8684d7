"""Flat Z-covers of IET suspensions: PSL(2,R) Bruhat calculus, interval
exchanges, translation surfaces, train-track route counting, and a
genus-2 octagon group with its kappa / delta-spectrum diagnostics."""

from . import cli, fuchsian, iet, psl2, suspension, traintrack

__all__ = ["cli", "fuchsian", "iet", "psl2", "suspension", "traintrack"]
__version__ = "0.1.0"
