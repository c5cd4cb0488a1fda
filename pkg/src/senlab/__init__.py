"""p-adic Sen theory calculator with exhaustive identity suites."""

__version__ = "0.1.0"
