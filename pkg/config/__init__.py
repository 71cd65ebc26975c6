"""PT Crystal Workbench Configuration Module"""

from .settings import Settings, settings, DEFAULT_SETTINGS

__all__ = ['Settings', 'settings', 'DEFAULT_SETTINGS']
