"""
memctrl: boundary steering controls for the 1D wave equation with persistent memory.

Modal ζ solvers, projected moment problems in the L², H¹₀ and H²₀ control
classes, forward simulators and the regularity experiments, with a batch CLI
(`python manage.py run config.json`).
"""

from .settings import VERSION as __version__

__all__ = ['__version__']
