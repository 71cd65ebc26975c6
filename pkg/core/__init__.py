"""PT Crystal Workbench core: spin algebra, Liouvillians and errors"""

from .errors import (
    CapExceededError,
    ConfigError,
    DegenerateSteadyStateError,
    DimensionMismatchError,
    ExceptionalPointError,
    InvalidParameterError,
    NumericalFailure,
    WorkbenchError,
)
from .spin_algebra import OperatorMatrix, ProductSpace, SpinSpace, build_spin_operators, build_x_ladder
from .lindblad import (
    DensityMatrix,
    Liouvillian,
    ModelSpec,
    Spectrum,
    build_liouvillian,
    check_liouvillian_pt,
    evolve,
    expectation,
    spectrum,
    stationary_state,
)

__all__ = [
    'CapExceededError',
    'ConfigError',
    'DegenerateSteadyStateError',
    'DimensionMismatchError',
    'ExceptionalPointError',
    'InvalidParameterError',
    'NumericalFailure',
    'WorkbenchError',
    'OperatorMatrix',
    'ProductSpace',
    'SpinSpace',
    'build_spin_operators',
    'build_x_ladder',
    'DensityMatrix',
    'Liouvillian',
    'ModelSpec',
    'Spectrum',
    'build_liouvillian',
    'check_liouvillian_pt',
    'evolve',
    'expectation',
    'spectrum',
    'stationary_state',
]
