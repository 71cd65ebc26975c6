"""PT Crystal Workbench: sweeps, result tables and figures for collective-spin Liouvillians"""

__version__ = '0.1.0'

__all__ = ['__version__']
