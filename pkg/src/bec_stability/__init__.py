"""Stability of a harmonically trapped Bose-Einstein condensate."""

__version__ = "0.1.0"
