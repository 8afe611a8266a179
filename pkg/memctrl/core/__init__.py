"""
Numerical core: spectral data, memory kernels, modal solvers, moment problems and synthesis
"""

from .kernels import MemoryKernel, Signal, TimeGrid
from .moment import ControlClass, TargetClass, TargetSpec
from .spectral import ModalBasis, build_interval_basis, build_synthetic_basis
from .synthesis import regularity_experiment, steer

__all__ = [
    'MemoryKernel', 'Signal', 'TimeGrid',
    'ControlClass', 'TargetClass', 'TargetSpec',
    'ModalBasis', 'build_interval_basis', 'build_synthetic_basis',
    'regularity_experiment', 'steer',
]
