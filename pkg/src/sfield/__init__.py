"""Numerical verification engine for a bimetric vierbein theory with a Dirac field."""

__version__ = "0.1.0"

from .errors import SFieldError  # noqa: E402,F401
