"""Figure regeneration for rabicrit CSV outputs."""

__version__ = "0.1.0"

from .render import FigureSpec, render  # noqa: F401
from .schemas import SchemaError  # noqa: F401
