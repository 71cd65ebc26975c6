# models/one_spin_btc.py
"""
One-spin boundary time crystal: H = 2g Sx with collective decay (κ/S) D[S-]
"""

from dataclasses import asdict, dataclass

import numpy as np

from core.errors import InvalidParameterError
from core.lindblad import DensityMatrix, ModelSpec
from core.model_family import BaseModelFamily, require_non_negative
from core.spin_algebra import OperatorMatrix, SpinSpace, build_spin_operators, parity_reflection


@dataclass(frozen=True)
class OneSpinBtcParams:
    g: float = 1.0
    kappa: float = 1.0
    S: float = 1.0

    def __post_init__(self):
        require_non_negative(g=self.g, kappa=self.kappa)

    @property
    def space(self) -> SpinSpace:
        return SpinSpace.from_spin(self.S)


def one_spin_btc(params: OneSpinBtcParams) -> ModelSpec:
    space = params.space
    ops = build_spin_operators(space)
    hamiltonian = OperatorMatrix(space, 2 * params.g * ops.sx.data, True, '2gSx')
    return ModelSpec(
        space=space,
        hamiltonian=hamiltonian,
        dissipators=((params.kappa / space.S, ops.sminus),),
        parity=parity_reflection(space),
        label=f"one-spin-btc g={params.g} kappa={params.kappa} {space.label}",
        family=OneSpinBtcFamily.name,
        params=asdict(params),
    )


def one_spin_btc_exact_steady(params: OneSpinBtcParams) -> DensityMatrix:
    """
    Closed-form stationary state ρ ∝ Σ_{n,n'} (iκ/g S-/S)^n' (-iκ/g S+/S)^n.

    The double sum factorizes into X X† with X = Σ_n (iκ/g S-/S)^n, and the
    series terminates at n = 2S because S- is nilpotent.
    """
    if params.g == 0:
        raise InvalidParameterError("Exact steady state needs g > 0")
    space = params.space
    lowering = 1j * (params.kappa / params.g) * build_spin_operators(space).sminus.data / space.S

    series = np.eye(space.dim, dtype=complex)
    term = np.eye(space.dim, dtype=complex)
    for _ in range(space.two_s):
        term = term @ lowering
        series = series + term

    rho = series @ series.conj().T
    rho = rho / np.trace(rho)
    return DensityMatrix(space, (rho + rho.conj().T) / 2)


class OneSpinBtcFamily(BaseModelFamily):
    name = 'one-spin-btc'
    params_type = OneSpinBtcParams

    def _build(self, params: OneSpinBtcParams) -> ModelSpec:
        return one_spin_btc(params)

    def exact_steady(self, params: OneSpinBtcParams) -> DensityMatrix:
        return one_spin_btc_exact_steady(params)
