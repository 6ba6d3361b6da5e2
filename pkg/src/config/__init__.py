"""
Configuration Module
===================

Settings for the citation metrics engine, read from the environment.
"""

from .config import Settings, settings

__all__ = ['Settings', 'settings']
