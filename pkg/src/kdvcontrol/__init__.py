"""Fast boundary controls for the KdV equation on an interval."""

__version__ = "0.1.0"
