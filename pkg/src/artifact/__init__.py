"""Eisenstein series, cusps and Lambda-adic Eisenstein congruences over Q, in exact arithmetic."""

__version__ = "0.1.0"
