# models/one_spin_pt.py
"""
One-spin PT model: H = g Sx with gain/loss along the x-ladder,
κ(1+p)/S D[Sx+] + κ(1-p)/S D[Sx-].  Liouvillian PT symmetric only at p = 0.
"""

from dataclasses import asdict, dataclass
from typing import List

import numpy as np

from core.errors import InvalidParameterError
from core.lindblad import ModelSpec
from core.model_family import BaseModelFamily, require_non_negative
from core.spin_algebra import (
    OperatorMatrix,
    SpinSpace,
    build_spin_operators,
    build_x_ladder,
    identity,
    parity_reflection,
)

PARITY_CHOICES = ('reflection', 'identity')


@dataclass(frozen=True)
class OneSpinPtParams:
    g: float = 1.0
    kappa: float = 1.0
    p: float = 0.0
    S: float = 1.0
    parity: str = 'reflection'

    def __post_init__(self):
        require_non_negative(g=self.g, kappa=self.kappa)
        if abs(self.p) > 1:
            raise InvalidParameterError(f"|p| must be <= 1, got {self.p}")
        if self.parity not in PARITY_CHOICES:
            raise InvalidParameterError(f"parity must be one of {PARITY_CHOICES}, got {self.parity!r}")

    @property
    def space(self) -> SpinSpace:
        return SpinSpace.from_spin(self.S)


@dataclass(frozen=True)
class LabelledEigenvalue:
    l: int
    q: int
    value: complex


def one_spin_pt(params: OneSpinPtParams) -> ModelSpec:
    space = params.space
    S = space.S
    sx = build_spin_operators(space).sx
    ladder = build_x_ladder(space)
    parity = parity_reflection(space) if params.parity == 'reflection' else identity(space)
    return ModelSpec(
        space=space,
        hamiltonian=OperatorMatrix(space, params.g * sx.data, True, 'gSx'),
        dissipators=(
            (params.kappa * (1 + params.p) / S, ladder.sx_plus),
            (params.kappa * (1 - params.p) / S, ladder.sx_minus),
        ),
        parity=parity,
        label=f"one-spin-pt g={params.g} kappa={params.kappa} p={params.p} {space.label}",
        family=OneSpinPtFamily.name,
        params=asdict(params),
    )


def one_spin_pt_exact_spectrum(params: OneSpinPtParams) -> List[LabelledEigenvalue]:
    """
    λ_{l,q} = igq − (2κ/S)[|q| + l(1 + l + 2|q|)] for q = -2S..2S and
    l = 0..2S-|q|, which gives all (2S+1)² eigenvalues.
    """
    if params.p != 0:
        raise InvalidParameterError(f"Exact spectrum is only known at p = 0, got p = {params.p}")
    space = params.space
    S = space.S
    values = []
    for q in range(-space.two_s, space.two_s + 1):
        for l in range(space.two_s - abs(q) + 1):
            decay = (2 * params.kappa / S) * (abs(q) + l * (1 + l + 2 * abs(q)))
            values.append(LabelledEigenvalue(l=l, q=q, value=complex(-decay, params.g * q)))
    return values


def x_lowering_mode(space: SpinSpace, q: int) -> np.ndarray:
    """(Sx-)^q, the slowest eigenmode of sector q at p = 0"""
    return np.linalg.matrix_power(build_x_ladder(space).sx_minus.data, q)


class OneSpinPtFamily(BaseModelFamily):
    name = 'one-spin-pt'
    params_type = OneSpinPtParams

    def _build(self, params: OneSpinPtParams) -> ModelSpec:
        return one_spin_pt(params)

    def exact_spectrum(self, params: OneSpinPtParams) -> List[LabelledEigenvalue]:
        return one_spin_pt_exact_spectrum(params)
