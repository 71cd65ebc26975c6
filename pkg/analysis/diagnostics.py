# analysis/diagnostics.py
"""
Stationary-state and spectral diagnostics: the PT-symmetry parameter, purity,
the two-spin symmetry parameter, BTC detection over an S-ladder, finite-size
fits and the ladder-commutator checks for the exact one-spin BTC steady state.
"""

from dataclasses import dataclass, field
from math import floor
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from config.settings import settings
from core.errors import DimensionMismatchError, InvalidParameterError, NumericalFailure
from core.lindblad import DensityMatrix, Spectrum
from core.logs import setup_logger
from core.spin_algebra import OperatorMatrix, ProductSpace, SpinSpace, build_spin_operators, embed_a, embed_b
from models.one_spin_btc import OneSpinBtcParams, one_spin_btc_exact_steady

logger = setup_logger('Analysis', 'Diagnostics')


def pt_image(rho: DensityMatrix, parity: OperatorMatrix) -> np.ndarray:
    """P conj(ρ) P⁻¹ in the basis ρ is stored in"""
    if parity.space != rho.space:
        raise DimensionMismatchError(f"Parity on {parity.space.label} vs state on {rho.space.label}")
    p = parity.data
    return p @ rho.data.conj() @ np.linalg.inv(p)


def pt_residual_matrix(rho: DensityMatrix, parity: OperatorMatrix) -> np.ndarray:
    return np.abs(rho.data - pt_image(rho, parity))


def q_pt(rho: DensityMatrix, parity: OperatorMatrix) -> float:
    """Σ|ρ - PTρPT| / Σ(|ρ| + |PTρPT|), elementwise"""
    image = pt_image(rho, parity)
    norm = float(np.sum(np.abs(rho.data)) + np.sum(np.abs(image)))
    if norm == 0:
        raise NumericalFailure("Q_PT normalization vanished", {'trace': rho.trace})
    return float(np.sum(np.abs(rho.data - image))) / norm


def purity(rho: DensityMatrix) -> float:
    return float(np.real(np.einsum('ij,ji->', rho.data, rho.data)))


def magnetization(rho: DensityMatrix) -> float:
    """⟨Sz⟩/S of a one-spin state"""
    if not isinstance(rho.space, SpinSpace):
        raise DimensionMismatchError("Magnetization is defined for one-spin states")
    sz = build_spin_operators(rho.space).sz.data
    return float(np.real(np.einsum('ij,ji->', rho.data, sz))) / rho.space.S


def symmetry_delta(rho: DensityMatrix) -> float:
    """|⟨S+A S-A - S+B S-B⟩| / ⟨S+A S-A + S+B S-B⟩ of a two-spin state"""
    if not isinstance(rho.space, ProductSpace):
        raise DimensionMismatchError("Symmetry parameter needs a two-spin state")
    ops = build_spin_operators(rho.space.factor)
    occupation = ops.splus @ ops.sminus
    n_a = float(np.real(np.einsum('ij,ji->', rho.data, embed_a(occupation).data)))
    n_b = float(np.real(np.einsum('ij,ji->', rho.data, embed_b(occupation).data)))
    if n_a + n_b <= 0:
        raise NumericalFailure("Symmetry parameter denominator vanished", {'n_a': n_a, 'n_b': n_b})
    return abs(n_a - n_b) / (n_a + n_b)


def q_pt_trend(values_by_S: Mapping[float, float]) -> bool:
    """True when the values strictly decrease as S grows"""
    ordered = [values_by_S[S] for S in sorted(values_by_S)]
    return all(later < earlier for earlier, later in zip(ordered, ordered[1:]))


@dataclass(frozen=True)
class BtcTolerances:
    im_floor: float = 1e-6
    rel_tol: float = 1e-3
    trend_slack: float = 1e-9
    min_decay_exponent: float = 0.5
    candidate_window: float = 3.0

    @classmethod
    def from_settings(cls) -> 'BtcTolerances':
        return cls(
            im_floor=settings.get_float('diagnostics.im_floor', 1e-6),
            rel_tol=settings.get_float('diagnostics.rel_tol', 1e-3),
            trend_slack=settings.get_float('diagnostics.trend_slack', 1e-9),
            min_decay_exponent=settings.get_float('diagnostics.min_decay_exponent', 0.5),
            candidate_window=settings.get_float('diagnostics.candidate_window', 3.0),
        )


@dataclass(frozen=True)
class BtcEvidence:
    S: float
    min_abs_re: float
    candidates: Tuple[float, ...] = ()


@dataclass(frozen=True)
class BtcVerdict:
    has_pure_imaginary_trend: bool
    base_frequency: Optional[float]
    commensurable: bool
    evidence: Tuple[BtcEvidence, ...] = field(default_factory=tuple)
    decay_exponent: Optional[float] = None

    @property
    def positive(self) -> bool:
        return self.has_pure_imaginary_trend and self.base_frequency is not None


def _distinct(values: np.ndarray, rel_tol: float) -> np.ndarray:
    """Collapse sorted values closer than rel_tol (relative) into their mean"""
    if values.size == 0:
        return values
    values = np.sort(values)
    groups = [[values[0]]]
    for value in values[1:]:
        if value - groups[-1][-1] <= rel_tol * max(abs(value), abs(groups[-1][-1])):
            groups[-1].append(value)
        else:
            groups.append([value])
    return np.array([np.mean(g) for g in groups])


def is_commensurable(values: Sequence[float], base: Optional[float], rel_tol: float) -> bool:
    if base is None or base <= 0 or len(values) == 0:
        return False
    for value in values:
        multiple = round(value / base)
        if multiple < 1 or abs(value - multiple * base) > rel_tol * abs(value):
            return False
    return True


def base_frequency(values: Sequence[float], rel_tol: float) -> Optional[float]:
    """Median spacing of the distinct positive frequencies, or the single one"""
    distinct = _distinct(np.asarray(values, dtype=float), rel_tol)
    if distinct.size == 0:
        return None
    if distinct.size == 1:
        return float(distinct[0])
    return float(np.median(np.diff(distinct)))


def btc_detect_values(eigenvalues_by_S: Mapping[float, Sequence[complex]],
                      tolerances: Optional[BtcTolerances] = None) -> BtcVerdict:
    """
    Decide whether an S-ladder of Liouvillian spectra shows a boundary time
    crystal: oscillating modes whose decay rate vanishes as S grows, with
    frequencies sharing a base frequency at the largest S.
    """
    tol = tolerances or BtcTolerances.from_settings()
    if len(eigenvalues_by_S) < 3:
        raise InvalidParameterError(f"BTC detection needs at least 3 distinct S values, got {len(eigenvalues_by_S)}")

    evidence: List[BtcEvidence] = []
    for S in sorted(eigenvalues_by_S):
        values = np.asarray(eigenvalues_by_S[S], dtype=complex)
        oscillating = values[np.abs(values.imag) > tol.im_floor]
        if oscillating.size == 0:
            evidence.append(BtcEvidence(S=float(S), min_abs_re=float('inf')))
            continue
        min_re = float(np.min(np.abs(oscillating.real)))
        window = oscillating[np.abs(oscillating.real) <= tol.candidate_window * min_re + tol.trend_slack]
        candidates = np.sort(window.imag[window.imag > tol.im_floor])
        evidence.append(BtcEvidence(S=float(S), min_abs_re=min_re, candidates=tuple(float(c) for c in candidates)))

    rates = np.array([e.min_abs_re for e in evidence])
    sizes = np.array([e.S for e in evidence])
    trend = False
    exponent = None
    if np.all(np.isfinite(rates)):
        decreasing = bool(np.all(np.diff(rates) < tol.trend_slack))
        if np.all(rates > 0):
            exponent = float(np.polyfit(np.log(sizes), np.log(rates), 1)[0])
            trend = decreasing and exponent <= -tol.min_decay_exponent
        else:
            trend = decreasing
        if decreasing and not trend:
            logger.debug(f"Decay rates shrink with S but only as S^{exponent:.3f}")

    base = base_frequency(evidence[-1].candidates, tol.rel_tol)
    commensurable = is_commensurable(evidence[-1].candidates, base, tol.rel_tol)
    verdict = BtcVerdict(has_pure_imaginary_trend=trend, base_frequency=base, commensurable=commensurable,
                         evidence=tuple(evidence), decay_exponent=exponent)
    logger.debug(f"BTC verdict over S={list(sizes)}: positive={verdict.positive}, base={base}")
    return verdict


def btc_detect(spectra: Sequence[Spectrum], tolerances: Optional[BtcTolerances] = None) -> BtcVerdict:
    by_S: Dict[float, np.ndarray] = {}
    for spec in spectra:
        if spec.S in by_S:
            raise InvalidParameterError(f"Duplicate spectrum for S={spec.S}")
        by_S[spec.S] = spec.eigenvalues
    return btc_detect_values(by_S, tolerances)


@dataclass(frozen=True)
class FitResult:
    """y(S) ≈ a + b/S + c/S², a being the S = ∞ extrapolation"""
    a: float
    b: float
    c: float
    residual: float

    def __call__(self, S: float) -> float:
        return self.a + self.b / S + self.c / S ** 2


def finite_size_fit(points: Sequence[Tuple[float, float]]) -> FitResult:
    sizes = np.array([float(S) for S, _ in points])
    values = np.array([float(y) for _, y in points])
    if np.unique(sizes).size < 3:
        raise InvalidParameterError(f"Quadratic 1/S fit needs 3 distinct S values, got {np.unique(sizes).size}")
    design = np.column_stack([np.ones_like(sizes), 1 / sizes, 1 / sizes ** 2])
    coeffs, *_ = np.linalg.lstsq(design, values, rcond=None)
    residual = float(np.linalg.norm(design @ coeffs - values))
    return FitResult(a=float(coeffs[0]), b=float(coeffs[1]), c=float(coeffs[2]), residual=residual)


def _scaled_ladders(S: float, ratio: float):
    space = SpinSpace.from_spin(S)
    ops = build_spin_operators(space)
    return space, ops.splus.data / space.S, ops.sminus.data / space.S, ops.sz.data / space.S


def ladder_commutator_norm(S: float, ratio: float, n: int, n_prime: int) -> float:
    """‖[(-i r S+/S)^n, (i r S-/S)^n']‖_F by direct matrix products"""
    space, splus, sminus, _ = _scaled_ladders(S, ratio)
    if not (0 <= n <= space.two_s and 0 <= n_prime <= space.two_s):
        raise InvalidParameterError(f"Powers must lie in 0..2S, got n={n}, n'={n_prime}")
    a = np.linalg.matrix_power(-1j * ratio * splus, n)
    b = np.linalg.matrix_power(1j * ratio * sminus, n_prime)
    return float(np.linalg.norm(a @ b - b @ a))


def ladder_commutator_expansion(S: float, ratio: float, n: int, n_prime: int) -> np.ndarray:
    """
    The same commutator rebuilt from S+^n S- = S- S+^n + n(n-1) S+^(n-1) + 2n S+^(n-1) Sz,
    one 1/S² sum and one 1/S sum.
    """
    space, splus, sminus, sz = _scaled_ladders(S, ratio)
    d = space.dim
    if n == 0 or n_prime == 0:
        return np.zeros((d, d), dtype=complex)

    raised = np.linalg.matrix_power(splus, n - 1)
    first = np.zeros((d, d), dtype=complex)
    second = np.zeros((d, d), dtype=complex)
    for k in range(1, n_prime + 1):
        left = np.linalg.matrix_power(sminus, k - 1)
        right = np.linalg.matrix_power(sminus, n_prime - k)
        first += left @ raised @ right
        second += left @ raised @ sz @ right

    prefactor = (-1) ** n * (1j * ratio) ** (n + n_prime)
    return prefactor * (n * (n - 1) / space.S ** 2 * first + 2 * n / space.S * second)


def steady_diag_pair(S: float, ratio: float, m: float) -> Tuple[float, float]:
    """(⟨m|ρ_ss|m⟩, ⟨-m|ρ_ss|-m⟩) of the exact one-spin BTC steady state at κ/g = ratio"""
    space = SpinSpace.from_spin(S)
    rho = one_spin_btc_exact_steady(OneSpinBtcParams(g=1.0, kappa=ratio, S=S))
    return float(rho.data[space.index(m), space.index(m)].real), float(rho.data[space.index(-m), space.index(-m)].real)


def steady_diag_asymmetry(S: float, p: float) -> Tuple[float, float]:
    """Diagonal entries at m = ±⌊pS⌋ for κ/g = 1/√(1-p²)"""
    if not 0 < p < 1:
        raise InvalidParameterError(f"p must lie in (0, 1), got {p}")
    if float(S) != int(S):
        raise InvalidParameterError(f"Integer S required so that ⌊pS⌋ is a magnetic number, got {S}")
    return steady_diag_pair(S, 1 / np.sqrt(1 - p ** 2), floor(p * S))
