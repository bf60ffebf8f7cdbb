"""Citation prediction from altmetric indicators."""

__version__ = "0.1.0"
