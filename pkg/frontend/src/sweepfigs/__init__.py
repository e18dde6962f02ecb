"""Static figures from bhdirac sweep CSV output."""

__version__ = "0.1.0"
