"""PT Crystal Workbench model families"""

from typing import Dict, Type

from core.errors import ConfigError
from core.model_family import BaseModelFamily

from .one_spin_btc import OneSpinBtcFamily, OneSpinBtcParams, one_spin_btc, one_spin_btc_exact_steady
from .generalized import GeneralizedFamily, GeneralizedParams, generalized_one_spin
from .one_spin_pt import (
    LabelledEigenvalue,
    OneSpinPtFamily,
    OneSpinPtParams,
    one_spin_pt,
    one_spin_pt_exact_spectrum,
    x_lowering_mode,
)
from .dissipator_class import (
    BTC_TRIPLE,
    DEPHASING_TRIPLE,
    ClassParams,
    DissipatorClassFamily,
    from_model_dissipators,
    gain_loss_weights,
    general_one_spin_class,
    is_balanced,
    pt_partner,
)
from .two_spin import InfiniteSpinOracle, TwoSpinFamily, TwoSpinParams, two_spin_infinite_S, two_spin_pt

FAMILIES: Dict[str, Type[BaseModelFamily]] = {
    family.name: family
    for family in (OneSpinBtcFamily, GeneralizedFamily, OneSpinPtFamily, DissipatorClassFamily, TwoSpinFamily)
}


def get_family(name: str) -> BaseModelFamily:
    """Instantiate a model family by its CLI identifier"""
    try:
        return FAMILIES[name]()
    except KeyError:
        raise ConfigError(f"Unknown model '{name}', expected one of {sorted(FAMILIES)}")


__all__ = [
    'FAMILIES',
    'get_family',
    'OneSpinBtcFamily',
    'OneSpinBtcParams',
    'one_spin_btc',
    'one_spin_btc_exact_steady',
    'GeneralizedFamily',
    'GeneralizedParams',
    'generalized_one_spin',
    'LabelledEigenvalue',
    'OneSpinPtFamily',
    'OneSpinPtParams',
    'one_spin_pt',
    'one_spin_pt_exact_spectrum',
    'x_lowering_mode',
    'BTC_TRIPLE',
    'DEPHASING_TRIPLE',
    'ClassParams',
    'DissipatorClassFamily',
    'from_model_dissipators',
    'gain_loss_weights',
    'general_one_spin_class',
    'is_balanced',
    'pt_partner',
    'InfiniteSpinOracle',
    'TwoSpinFamily',
    'TwoSpinParams',
    'two_spin_infinite_S',
    'two_spin_pt',
]
