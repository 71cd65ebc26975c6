# models/two_spin.py
"""
Two-spin gain/loss model on A ⊗ B:

    H = g (S+,A S-,B + h.c.) / 2S,  gain Γg/2S D[S+,A],  loss Γl/2S D[S-,B]

with the SWAP parity.  The S = ∞ oracle covers the balanced case Γg = Γl = Γ.
"""

from dataclasses import asdict, dataclass
from itertools import product
from typing import List

import numpy as np

from config.settings import settings
from core.errors import CapExceededError, ExceptionalPointError, InvalidParameterError
from core.lindblad import ModelSpec
from core.model_family import BaseModelFamily, require_non_negative
from core.spin_algebra import (
    OperatorMatrix,
    ProductSpace,
    SpinSpace,
    build_spin_operators,
    embed_a,
    embed_b,
    swap_parity,
)


@dataclass(frozen=True)
class TwoSpinParams:
    g: float = 1.0
    gamma_gain: float = 1.0
    gamma_loss: float = 1.0
    S: float = 1.0

    def __post_init__(self):
        require_non_negative(g=self.g, gamma_gain=self.gamma_gain, gamma_loss=self.gamma_loss)

    @property
    def factor_space(self) -> SpinSpace:
        return SpinSpace.from_spin(self.S)

    @property
    def space(self) -> ProductSpace:
        return ProductSpace(self.factor_space)


def two_spin_pt(params: TwoSpinParams) -> ModelSpec:
    factor = params.factor_space
    cap = settings.get_float('caps.two_spin_S', 4)
    if factor.S > cap:
        raise CapExceededError(f"Two-spin model limited to S <= {cap}, got S = {factor.S}")

    S = factor.S
    ops = build_spin_operators(factor)
    splus_a = embed_a(ops.splus)
    sminus_a = embed_a(ops.sminus)
    splus_b = embed_b(ops.splus)
    sminus_b = embed_b(ops.sminus)

    exchange = (splus_a @ sminus_b).data + (sminus_a @ splus_b).data
    space = params.space
    hamiltonian = OperatorMatrix(space, params.g * exchange / (2 * S), True, 'g(S+A S-B + h.c.)/2S')

    return ModelSpec(
        space=space,
        hamiltonian=hamiltonian,
        dissipators=(
            (params.gamma_gain / (2 * S), OperatorMatrix(space, splus_a.data, label='S+A')),
            (params.gamma_loss / (2 * S), OperatorMatrix(space, sminus_b.data, label='S-B')),
        ),
        parity=swap_parity(factor),
        label=(f"two-spin g={params.g} gain={params.gamma_gain} loss={params.gamma_loss} "
               f"{factor.label}"),
        family=TwoSpinFamily.name,
        params=asdict(params),
    )


@dataclass(frozen=True)
class InfiniteSpinOracle:
    """Closed-form S = ∞ stationary quantities of the balanced model"""
    g: float
    gamma: float
    delta: float
    purity: float
    imag_base: float
    beta_plus: float
    beta_minus: float

    @property
    def broken(self) -> bool:
        return self.gamma > self.g

    def broken_eigenvalues(self, m_max: int) -> List[float]:
        """-2(m+ β+ + m- β-) for m± in 0..m_max, sorted descending and deduplicated"""
        if not self.broken:
            raise InvalidParameterError("Real eigenvalue ladder only exists in the broken phase (Γ > g)")
        values = {round(-2 * (mp * self.beta_plus + mm * self.beta_minus), 12)
                  for mp, mm in product(range(m_max + 1), repeat=2)}
        return sorted(values, reverse=True)


def two_spin_infinite_S(g: float, gamma: float) -> InfiniteSpinOracle:
    require_non_negative(g=g, gamma=gamma)
    if np.isclose(gamma, g, rtol=1e-12, atol=0.0):
        raise ExceptionalPointError(f"Γ = g = {g} is the exceptional point; S = ∞ quantities are not analytic there")

    if gamma < g:
        delta = purity = 0.0
        imag_base = float(np.sqrt(g ** 2 - gamma ** 2))
    else:
        delta = purity = float(1 - (g / gamma) ** 2)
        imag_base = 0.0
    return InfiniteSpinOracle(g=float(g), gamma=float(gamma), delta=delta, purity=purity,
                              imag_base=imag_base, beta_plus=(gamma + g) / 2, beta_minus=(gamma - g) / 2)


class TwoSpinFamily(BaseModelFamily):
    name = 'two-spin'
    params_type = TwoSpinParams

    def _build(self, params: TwoSpinParams) -> ModelSpec:
        return two_spin_pt(params)

    def infinite_S(self, params: TwoSpinParams) -> InfiniteSpinOracle:
        if params.gamma_gain != params.gamma_loss:
            raise InvalidParameterError("S = ∞ oracle needs balanced gain and loss")
        return two_spin_infinite_S(params.g, params.gamma_gain)
