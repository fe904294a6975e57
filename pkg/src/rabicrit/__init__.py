"""Dissipative quantum Rabi model near its superradiant critical point."""

__version__ = "0.1.0"

from . import dissipators, dynamics, metrology, model, operators  # noqa: F401
