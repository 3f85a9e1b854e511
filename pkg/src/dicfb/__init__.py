"""Feedback and the two-user symmetric linear deterministic interference channel."""

__version__ = "0.1.0"
