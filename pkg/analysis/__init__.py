"""PT Crystal Workbench analysis: diagnostics, perturbation theory and trajectories"""

from .diagnostics import (
    BtcTolerances,
    BtcVerdict,
    FitResult,
    btc_detect,
    btc_detect_values,
    finite_size_fit,
    ladder_commutator_expansion,
    ladder_commutator_norm,
    magnetization,
    pt_residual_matrix,
    purity,
    q_pt,
    q_pt_trend,
    steady_diag_asymmetry,
    symmetry_delta,
)
from .perturbation import (
    CorrectionTable,
    PerturbationEngine,
    PerturbativeSplit,
    SectorMatrix,
    first_order_corrections,
    perturbation_vs_exact,
    second_order_analysis,
    second_order_corrections,
    sector_basis,
    sector_tridiagonal,
)
from .trajectory import EnsembleAverage, TrajectoryRun, TrajectoryRunner, ensemble_average, run_trajectory

__all__ = [
    'BtcTolerances',
    'BtcVerdict',
    'FitResult',
    'btc_detect',
    'btc_detect_values',
    'finite_size_fit',
    'ladder_commutator_expansion',
    'ladder_commutator_norm',
    'magnetization',
    'pt_residual_matrix',
    'purity',
    'q_pt',
    'q_pt_trend',
    'steady_diag_asymmetry',
    'symmetry_delta',
    'CorrectionTable',
    'PerturbationEngine',
    'PerturbativeSplit',
    'SectorMatrix',
    'first_order_corrections',
    'perturbation_vs_exact',
    'second_order_analysis',
    'second_order_corrections',
    'sector_basis',
    'sector_tridiagonal',
    'EnsembleAverage',
    'TrajectoryRun',
    'TrajectoryRunner',
    'ensemble_average',
    'run_trajectory',
]
