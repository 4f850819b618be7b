"""Binary classification with a bounded abstention rate."""

__version__ = "0.1.0"
