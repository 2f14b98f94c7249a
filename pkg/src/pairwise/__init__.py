"""Toolkit for broadband light whose frequency pairs are phase correlated."""

__version__ = "0.1.0"
