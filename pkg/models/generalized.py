# models/generalized.py
"""
Generalized one-spin model H = S (g_z s_z^{p_z} + g_x s_x^{p_x}), s = S/S,
with collective decay (κ-/S) D[S-] and pumping (κ+/S) D[S+].
"""

from dataclasses import asdict, dataclass

import numpy as np

from core.errors import InvalidParameterError
from core.lindblad import ModelSpec
from core.model_family import BaseModelFamily, require_non_negative
from core.spin_algebra import OperatorMatrix, SpinSpace, build_spin_operators, parity_reflection


@dataclass(frozen=True)
class GeneralizedParams:
    gz: float = 1.0
    gx: float = 0.0
    pz: int = 2
    px: int = 1
    kappa_minus: float = 0.0
    kappa_plus: float = 0.0
    S: float = 1.0

    def __post_init__(self):
        require_non_negative(kappa_minus=self.kappa_minus, kappa_plus=self.kappa_plus)
        for name in ('pz', 'px'):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise InvalidParameterError(f"{name} must be a positive integer, got {value}")
            object.__setattr__(self, name, int(value))

    @property
    def space(self) -> SpinSpace:
        return SpinSpace.from_spin(self.S)


def generalized_one_spin(params: GeneralizedParams) -> ModelSpec:
    space = params.space
    S = space.S
    ops = build_spin_operators(space)
    sz_power = np.linalg.matrix_power(ops.sz.data / S, params.pz)
    sx_power = np.linalg.matrix_power(ops.sx.data / S, params.px)
    h = S * (params.gz * sz_power + params.gx * sx_power)
    hamiltonian = OperatorMatrix(space, (h + h.conj().T) / 2, True, 'S(gz sz^pz + gx sx^px)')

    dissipators = []
    if params.kappa_minus > 0:
        dissipators.append((params.kappa_minus / S, ops.sminus))
    if params.kappa_plus > 0:
        dissipators.append((params.kappa_plus / S, ops.splus))

    return ModelSpec(
        space=space,
        hamiltonian=hamiltonian,
        dissipators=tuple(dissipators),
        parity=parity_reflection(space),
        label=(f"generalized gz={params.gz} gx={params.gx} pz={params.pz} px={params.px} "
               f"kappa-={params.kappa_minus} kappa+={params.kappa_plus} {space.label}"),
        family=GeneralizedFamily.name,
        params=asdict(params),
    )


class GeneralizedFamily(BaseModelFamily):
    name = 'generalized'
    params_type = GeneralizedParams

    def _build(self, params: GeneralizedParams) -> ModelSpec:
        return generalized_one_spin(params)
