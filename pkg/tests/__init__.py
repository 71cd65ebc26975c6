"""PT Crystal Workbench Tests Module"""

__all__ = []
