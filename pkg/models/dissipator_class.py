# models/dissipator_class.py
"""
General one-spin dissipator class: H = g Sx and jumps
L_μ = α_μ Sx+ + β_μ Sx- + γ_μ Sx, each at rate κ/S.
"""

from dataclasses import dataclass
from typing import Any, Dict, Iterable, Optional, Tuple

import numpy as np

from config.settings import settings
from core.errors import InvalidParameterError
from core.lindblad import ModelSpec
from core.model_family import BaseModelFamily, require_non_negative
from core.spin_algebra import (
    OperatorMatrix,
    SpinSpace,
    build_spin_operators,
    build_x_ladder,
    parity_reflection,
    x_ladder_coefficients,
)

Triple = Tuple[complex, complex, complex]

# S- = -(i/2) Sx+ - (i/2) Sx- + Sx
BTC_TRIPLE: Triple = (-0.5j, -0.5j, 1.0 + 0j)
# Sz = -(i/2) Sx+ + (i/2) Sx-
DEPHASING_TRIPLE: Triple = (-0.5j, 0.5j, 0j)


def _to_complex(value: Any) -> complex:
    """Accepts numbers, '0.5-1j' strings and [re, im] pairs"""
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, str):
        return complex(value.replace(' ', ''))
    return complex(value)


@dataclass(frozen=True)
class ClassParams:
    g: float = 1.0
    kappa: float = 1.0
    triples: Tuple[Triple, ...] = (DEPHASING_TRIPLE,)
    S: float = 1.0

    def __post_init__(self):
        require_non_negative(g=self.g, kappa=self.kappa)
        try:
            triples = tuple(tuple(_to_complex(c) for c in triple) for triple in self.triples)
        except (TypeError, ValueError) as e:
            raise InvalidParameterError(f"Bad dissipator triple in {self.triples!r}: {e}")
        if not triples:
            raise InvalidParameterError("The dissipator class needs at least one (alpha, beta, gamma) triple")
        if any(len(t) != 3 for t in triples):
            raise InvalidParameterError("Each dissipator must be an (alpha, beta, gamma) triple")
        object.__setattr__(self, 'triples', triples)

    @property
    def space(self) -> SpinSpace:
        return SpinSpace.from_spin(self.S)


def gain_loss_weights(triples: Iterable[Triple]) -> Tuple[float, float, float]:
    """(Σ|α|², Σ|β|², Σ|γ|²)"""
    triples = list(triples)
    return (
        float(sum(abs(t[0]) ** 2 for t in triples)),
        float(sum(abs(t[1]) ** 2 for t in triples)),
        float(sum(abs(t[2]) ** 2 for t in triples)),
    )


def is_balanced(params: ClassParams) -> bool:
    gain, loss, _ = gain_loss_weights(params.triples)
    return abs(gain - loss) <= settings.get_float('tolerances.balance', 1e-12) * (gain + loss)


def pt_partner(triple: Triple, theta: float = 0.0) -> Triple:
    """Coefficients of P L† P⁻¹ under the reflection parity, up to the phase e^{iθ}"""
    alpha, beta, gamma = triple
    phase = np.exp(1j * theta)
    return (complex(-phase * np.conj(beta)), complex(-phase * np.conj(alpha)), complex(phase * np.conj(gamma)))


def class_jump(space: SpinSpace, triple: Triple) -> OperatorMatrix:
    ladder = build_x_ladder(space)
    sx = build_spin_operators(space).sx
    alpha, beta, gamma = triple
    data = alpha * ladder.sx_plus.data + beta * ladder.sx_minus.data + gamma * sx.data
    return OperatorMatrix(space, data, label=f"({alpha})Sx+ + ({beta})Sx- + ({gamma})Sx")


def from_model_dissipators(model: ModelSpec, kappa: Optional[float] = None) -> Tuple[Triple, ...]:
    """
    Triples of a one-spin model's jump operators as class members at rate κ/S.

    Each triple is scaled by sqrt(rate·S/κ) so the class dissipator equals the
    model's. κ defaults to rate·S of the first open channel; closed channels
    are dropped.
    """
    if not isinstance(model.space, SpinSpace):
        raise InvalidParameterError(f"{model.label}: the dissipator class lives on one spin")
    S = model.space.S
    channels = [(rate, op) for rate, op in model.dissipators if rate > 0]
    if not channels:
        raise InvalidParameterError(f"{model.label} has no open dissipation channel")
    if kappa is None:
        kappa = channels[0][0] * S
    if kappa <= 0:
        raise InvalidParameterError(f"kappa must be > 0, got {kappa}")
    triples = []
    for rate, op in channels:
        scale = np.sqrt(rate * S / kappa)
        triples.append(tuple(complex(scale * c) for c in x_ladder_coefficients(op)))
    return tuple(triples)


def general_one_spin_class(params: ClassParams) -> ModelSpec:
    space = params.space
    sx = build_spin_operators(space).sx
    rate = params.kappa / space.S
    return ModelSpec(
        space=space,
        hamiltonian=OperatorMatrix(space, params.g * sx.data, True, 'gSx'),
        dissipators=tuple((rate, class_jump(space, t)) for t in params.triples),
        parity=parity_reflection(space),
        label=f"class g={params.g} kappa={params.kappa} n_jumps={len(params.triples)} {space.label}",
        family=DissipatorClassFamily.name,
        params=_params_echo(params),
    )


def _params_echo(params: ClassParams) -> Dict[str, Any]:
    return {
        'g': params.g,
        'kappa': params.kappa,
        'S': params.S,
        'triples': [[[c.real, c.imag] for c in t] for t in params.triples],
    }


class DissipatorClassFamily(BaseModelFamily):
    name = 'class'
    params_type = ClassParams

    def _build(self, params: ClassParams) -> ModelSpec:
        return general_one_spin_class(params)

    def is_balanced(self, params: ClassParams) -> bool:
        return is_balanced(params)
