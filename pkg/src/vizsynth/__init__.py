"""Type-directed synthesis of visualization programs."""

__version__ = "0.1.0"
