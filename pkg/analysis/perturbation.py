# analysis/perturbation.py
"""
Degenerate perturbation theory in the dissipation rate κ for one-spin models
whose Hamiltonian is c·Sx.

The coherent part is diagonal on the x-basis matrix units |n⟩ₓ⟨n-q|ₓ with
eigenvalue -icq, so the unperturbed Liouvillian splits into coherence sectors
q = -2S..2S.  Inside a sector the dissipator is a real tridiagonal matrix
(first order); couplings between sectors give the second-order corrections.
"""

from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
from scipy.optimize import linear_sum_assignment

from config.settings import settings
from core.errors import CapExceededError, InvalidParameterError, NumericalFailure
from core.lindblad import ModelSpec, build_liouvillian, spectrum
from core.logs import setup_logger
from core.model_family import BaseModelFamily
from core.spin_algebra import OperatorMatrix, SpinSpace, build_spin_operators, build_x_ladder, x_ladder_coefficients
from analysis.diagnostics import FitResult, finite_size_fit


def _check_sector(space: SpinSpace, q: int):
    if int(q) != q or abs(q) > space.two_s:
        raise InvalidParameterError(f"Sector q={q} outside -2S..2S for {space.label}")


def sector_n_values(space: SpinSpace, q: int) -> np.ndarray:
    """n of the modes |n⟩ₓ⟨n-q|ₓ, descending; both n and n-q stay in [-S, S]"""
    _check_sector(space, q)
    top = space.S if q >= 0 else space.S + q
    return top - np.arange(space.dim - abs(q))


def sector_indices(space: SpinSpace, q: int) -> np.ndarray:
    """Column-stacked vec positions of the sector's matrix units in the x-basis"""
    rows = np.rint(space.S - sector_n_values(space, q)).astype(int)
    return rows + space.dim * (rows + int(q))


def sector_basis(space: SpinSpace, q: int) -> List[np.ndarray]:
    """The sector's matrix units |n⟩ₓ⟨n-q|ₓ written in the z-basis"""
    unitary = build_x_ladder(space).basis_change
    modes = []
    for n in sector_n_values(space, q):
        k = int(round(space.S - n))
        modes.append(np.outer(unitary[:, k], unitary[:, k + int(q)].conj()))
    return modes


@dataclass(frozen=True, eq=False)
class PerturbativeSplit:
    """L = -ic[Sx, ·] + κ L1, with L1 given by rated jumps per unit κ"""
    space: SpinSpace
    coupling: float
    jumps: Tuple[Tuple[float, OperatorMatrix], ...]
    weights: Optional[Tuple[float, float, float]] = None
    label: str = ''

    @classmethod
    def from_model(cls, model: ModelSpec, kappa: float) -> 'PerturbativeSplit':
        if not isinstance(model.space, SpinSpace):
            raise InvalidParameterError("Perturbative splitting needs a one-spin model")
        if kappa <= 0:
            raise InvalidParameterError(f"Reference κ must be positive, got {kappa}")
        space = model.space
        sx = build_spin_operators(space).sx.data
        h = model.hamiltonian.data
        coupling = float(np.real(np.trace(h @ sx) / np.trace(sx @ sx)))
        if np.linalg.norm(h - coupling * sx) > 1e-10 * max(1.0, np.linalg.norm(h)):
            raise InvalidParameterError(f"Hamiltonian of {model.label!r} is not proportional to Sx")

        jumps = tuple((rate / kappa, op) for rate, op in model.dissipators)
        try:
            weights = [0.0, 0.0, 0.0]
            for rate, op in jumps:
                for k, coeff in enumerate(x_ladder_coefficients(op)):
                    weights[k] += rate * space.S * abs(coeff) ** 2
            weights = tuple(weights)
        except InvalidParameterError:
            weights = None
        return cls(space=space, coupling=coupling, jumps=jumps, weights=weights, label=model.label)

    @property
    def S(self) -> float:
        return self.space.S

    def unperturbed(self, q: int) -> complex:
        return -1j * self.coupling * q


@dataclass(frozen=True, eq=False)
class SectorMatrix:
    """Real tridiagonal first-order matrix of one sector, rows ordered by descending n"""
    q: int
    space: SpinSpace
    n_values: np.ndarray
    diag: np.ndarray
    super_diag: np.ndarray
    sub_diag: np.ndarray
    cross_check: float = 0.0

    @property
    def size(self) -> int:
        return int(self.diag.size)

    def dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.super_diag, 1) + np.diag(self.sub_diag, -1)

    def is_symmetric(self, tol: float = 1e-12) -> bool:
        scale = max(1.0, float(np.max(np.abs(self.diag), initial=0.0)))
        return bool(np.all(np.abs(self.super_diag - self.sub_diag) <= tol * scale))


def sector_elements(weights: Tuple[float, float, float], space: SpinSpace, q: int) -> SectorMatrix:
    """Closed-form elements from the class weights (Σ|α|², Σ|β|², Σ|γ|²)·rate·S"""
    gain, loss, dephasing = weights
    S = space.S
    n = sector_n_values(space, q)
    raise_n = (S - n) * (S + n + 1) + (S - n + q) * (S + n - q + 1)
    lower_n = (S + n) * (S - n + 1) + (S + n - q) * (S - n + q + 1)
    diag = -(gain * raise_n + loss * lower_n) / S - dephasing * q ** 2 / S

    below = n[1:]
    above = n[:-1]
    upper = 2 * gain / S * np.sqrt(np.clip((S - below) * (S + below + 1) * (S - below + q) * (S + below - q + 1), 0, None))
    lower = 2 * loss / S * np.sqrt(np.clip((S + above) * (S - above + 1) * (S + above - q) * (S - above + q + 1), 0, None))
    return SectorMatrix(q=int(q), space=space, n_values=n, diag=diag, super_diag=upper, sub_diag=lower)


@dataclass(frozen=True, eq=False)
class FirstOrderSolution:
    """Eigenvalues sorted descending with bi-orthonormal right/left vectors (wᴴu = 1)"""
    q: int
    values: np.ndarray
    right: np.ndarray
    left: np.ndarray


@dataclass(frozen=True)
class CorrectionEntry:
    q: int
    l: int
    first_order: float
    second_order: complex


@dataclass(frozen=True)
class CorrectionTable:
    S: float
    coupling: float
    entries: Tuple[CorrectionEntry, ...]
    params: Dict[str, Any] = field(default_factory=dict)

    def sector(self, q: int) -> List[CorrectionEntry]:
        return sorted((e for e in self.entries if e.q == q), key=lambda e: e.l)

    def second_order(self, q: int) -> np.ndarray:
        return np.array([e.second_order for e in self.sector(q)], dtype=complex)

    def rows(self) -> List[Tuple[float, int, int, float, float, float]]:
        return [(self.S, e.q, e.l, e.first_order, e.second_order.real, e.second_order.imag)
                for e in sorted(self.entries, key=lambda e: (e.q, e.l))]


class PerturbationEngine:
    """First- and second-order corrections for one PerturbativeSplit"""

    def __init__(self, split: PerturbativeSplit):
        self.split = split
        self.space = split.space
        self.logger = setup_logger('Analysis', self.__class__.__name__)
        cap = settings.get_int('caps.spectrum_dim', 4096)
        if self.space.dim ** 2 > cap:
            raise CapExceededError(f"Perturbation engine needs a {self.space.dim ** 2}-dim superoperator, cap is {cap}")

    @cached_property
    def dissipator_x(self) -> np.ndarray:
        """κ-independent dissipator superoperator written on x-basis matrix units"""
        unitary = build_x_ladder(self.space).basis_change
        x_space = SpinSpace(self.space.two_s, basis='x')
        jumps = tuple(
            (rate, OperatorMatrix(x_space, unitary.conj().T @ op.data @ unitary, label=f"{op.label} (x)"))
            for rate, op in self.split.jumps
        )
        model = ModelSpec(x_space, OperatorMatrix(x_space, np.zeros((x_space.dim, x_space.dim)), True, '0'),
                          jumps, label=f"L1 of {self.split.label}")
        self.logger.debug(f"Assembling x-basis dissipator for {self.split.label}")
        return build_liouvillian(model).matrix

    def block(self, q: int, q_prime: int) -> np.ndarray:
        return self.dissipator_x[np.ix_(sector_indices(self.space, q), sector_indices(self.space, q_prime))]

    def sector_matrix(self, q: int) -> SectorMatrix:
        """Tridiagonal sector matrix, checked entry by entry against the direct inner products"""
        direct = self.block(q, q)
        if self.split.weights is None:
            if np.max(np.abs(np.triu(direct, 2)) + np.abs(np.tril(direct, -2)), initial=0.0) > 1e-12:
                raise NumericalFailure(f"Sector {q} of {self.split.label} is not tridiagonal")
            real = direct.real
            return SectorMatrix(q=int(q), space=self.space, n_values=sector_n_values(self.space, q),
                                diag=np.diag(real).copy(), super_diag=np.diag(real, 1).copy(),
                                sub_diag=np.diag(real, -1).copy())

        formula = sector_elements(self.split.weights, self.space, q)
        deviation = float(np.max(np.abs(formula.dense() - direct), initial=0.0))
        scale = max(1.0, float(np.max(np.abs(direct), initial=0.0)))
        if deviation > settings.get_float('perturbation.cross_check_tol', 1e-11) * scale:
            raise NumericalFailure(f"Sector {q} elements disagree with direct inner products",
                                   {'deviation': f"{deviation:.3e}", 'S': self.space.S})
        return replace(formula, cross_check=deviation)

    def first_order(self, q: int) -> FirstOrderSolution:
        return first_order_corrections(self.sector_matrix(q))

    def second_order(self, q: int, first: Optional[FirstOrderSolution] = None) -> np.ndarray:
        """wᴴ K u with K = Σ_{q'≠q} B(q,q') B(q',q) / (λ0_q - λ0_q')"""
        first = first or self.first_order(q)
        size = first.values.size
        kernel = np.zeros((size, size), dtype=complex)
        for q_prime in range(-self.space.two_s, self.space.two_s + 1):
            if q_prime == q:
                continue
            outgoing = self.block(q_prime, q)
            if not np.any(outgoing):
                continue
            incoming = self.block(q, q_prime)
            denominator = self.split.unperturbed(q) - self.split.unperturbed(q_prime)
            if abs(denominator) <= 1e-14 * max(1.0, abs(self.split.coupling)):
                raise NumericalFailure(f"Degenerate energy denominator between sectors {q} and {q_prime}",
                                       {'coupling': self.split.coupling})
            kernel += incoming @ outgoing / denominator
        return np.einsum('ij,ik,kj->j', first.left.conj(), kernel, first.right)

    def corrections(self, q_range: Optional[Sequence[int]] = None, second: bool = True) -> CorrectionTable:
        if q_range is None:
            q_range = range(-self.space.two_s, self.space.two_s + 1)
        entries = []
        for q in q_range:
            _check_sector(self.space, q)
            first = self.first_order(q)
            lam2 = self.second_order(q, first) if second else np.zeros(first.values.size, dtype=complex)
            for l, (value, correction) in enumerate(zip(first.values, lam2)):
                entries.append(CorrectionEntry(q=int(q), l=l, first_order=float(value), second_order=complex(correction)))
        self.logger.debug(f"{len(entries)} corrections for {self.split.label}")
        return CorrectionTable(S=self.space.S, coupling=self.split.coupling, entries=tuple(entries),
                               params={'label': self.split.label})

    def predict(self, table: CorrectionTable, kappa: float) -> np.ndarray:
        """λ0 + κλ1 + κ²λ2 for every (q, l) of the table"""
        return np.array([self.split.unperturbed(e.q) + kappa * e.first_order + kappa ** 2 * e.second_order
                         for e in table.entries])


def sector_tridiagonal(split: PerturbativeSplit, q: int) -> SectorMatrix:
    return PerturbationEngine(split).sector_matrix(q)


def first_order_corrections(sector: SectorMatrix) -> FirstOrderSolution:
    """Secular problem of one sector, eigenvalues descending"""
    size = sector.size
    if size == 1:
        one = np.ones((1, 1))
        return FirstOrderSolution(q=sector.q, values=sector.diag.copy(), right=one, left=one)

    try:
        if sector.is_symmetric():
            values, vectors = scipy.linalg.eigh_tridiagonal(sector.diag, sector.super_diag)
            right = left = vectors
        elif np.all(sector.super_diag * sector.sub_diag > 0):
            # Diagonal similarity to the symmetric tridiagonal with off-diagonal sqrt(super·sub)
            values, vectors = scipy.linalg.eigh_tridiagonal(sector.diag, np.sqrt(sector.super_diag * sector.sub_diag))
            scale = np.concatenate([[1.0], np.cumprod(np.sqrt(sector.sub_diag / sector.super_diag))])
            right = scale[:, None] * vectors
            left = vectors / scale[:, None]
        else:
            values, left, right = scipy.linalg.eig(sector.dense(), left=True, right=True)
            if np.max(np.abs(values.imag)) > 1e-9 * max(1.0, np.max(np.abs(values))):
                setup_logger('Analysis', 'Perturbation').warning(
                    f"Sector {sector.q}: complex first-order eigenvalues {values}")
            values = values.real
            left = left / np.einsum('ij,ij->j', left.conj(), right).conj()[None, :]
    except (np.linalg.LinAlgError, ValueError) as e:
        raise NumericalFailure(f"Secular problem of sector {sector.q} failed: {e}", {'size': size})

    order = np.argsort(-values, kind='stable')
    return FirstOrderSolution(q=sector.q, values=np.asarray(values[order], dtype=float),
                              right=right[:, order], left=left[:, order])


def second_order_corrections(split: PerturbativeSplit, q_range: Optional[Sequence[int]] = None) -> CorrectionTable:
    return PerturbationEngine(split).corrections(q_range)


@dataclass(frozen=True)
class SecondOrderAnalysis:
    """Per-S summaries of Im λ2 in one sector, with their 1/S extrapolations"""
    q: int
    two_difference: Dict[float, float]
    top_gap: Dict[float, float]
    max_im: Dict[float, float]
    fits: Dict[str, Optional[FitResult]]


def second_order_analysis(tables: Mapping[float, CorrectionTable], q: int) -> SecondOrderAnalysis:
    two_difference: Dict[float, float] = {}
    top_gap: Dict[float, float] = {}
    max_im: Dict[float, float] = {}
    for S in sorted(tables):
        im = tables[S].second_order(q).imag
        if im.size >= 3:
            two_difference[S] = float(np.mean(np.diff(im, n=2)))
        ranked = np.sort(im)[::-1]
        if ranked.size >= 2:
            top_gap[S] = float(ranked[0] - ranked[1])
        if ranked.size:
            max_im[S] = float(ranked[0])

    fits: Dict[str, Optional[FitResult]] = {}
    for name, series in (('two_difference', two_difference), ('top_gap', top_gap), ('max_im', max_im)):
        fits[name] = finite_size_fit(list(series.items())) if len(series) >= 3 else None
    return SecondOrderAnalysis(q=int(q), two_difference=two_difference, top_gap=top_gap, max_im=max_im, fits=fits)


@dataclass(frozen=True)
class PairingReport:
    order: int
    kappas: Tuple[float, ...]
    max_errors: Tuple[float, ...]
    unreliable: Tuple[int, ...]
    slope: Optional[float]


def perturbation_vs_exact(family: BaseModelFamily, params, kappas: Sequence[float], order: int = 1,
                          n_slow: Optional[int] = None, kappa_field: str = 'kappa') -> PairingReport:
    """
    Pair every perturbative eigenvalue with a full-Liouvillian eigenvalue at
    each κ and report the worst error and its log-log slope in κ.
    """
    if order not in (1, 2):
        raise InvalidParameterError(f"Only first and second order are available, got {order}")
    logger = setup_logger('Analysis', 'Perturbation')
    reference = family.build(replace(params, **{kappa_field: 1.0}))
    engine = PerturbationEngine(PerturbativeSplit.from_model(reference, kappa=1.0))
    table = engine.corrections(second=order == 2)
    ratio_limit = settings.get_float('perturbation.pairing_ratio', 2.0)

    max_errors = []
    unreliable = []
    for kappa in kappas:
        predicted = engine.predict(table, kappa)
        model = family.build(replace(params, **{kappa_field: float(kappa)}))
        exact = spectrum(build_liouvillian(model), with_modes=False).eigenvalues

        distances = np.abs(predicted[:, None] - exact[None, :])
        rows, cols = linear_sum_assignment(distances)
        errors = distances[rows, cols]

        tracked = rows
        if n_slow is not None:
            tracked = np.argsort(-predicted.real, kind='stable')[:n_slow]
        errors = errors[np.argsort(rows)][tracked]

        nearest = np.sort(distances, axis=1)[:, :2] if exact.size > 1 else np.zeros((predicted.size, 2))
        ambiguous = int(np.sum((nearest[:, 0] > 1e-12) & (nearest[:, 1] < ratio_limit * nearest[:, 0])))
        if ambiguous:
            logger.warning(f"κ={kappa}: {ambiguous} ambiguous pairings (nearest-neighbour ratio < {ratio_limit})")
        max_errors.append(float(np.max(errors)) if errors.size else 0.0)
        unreliable.append(ambiguous)

    usable = [(k, e) for k, e in zip(kappas, max_errors) if k > 0 and e > 1e-12]
    slope = None
    if len(usable) >= 2:
        slope = float(np.polyfit(np.log([k for k, _ in usable]), np.log([e for _, e in usable]), 1)[0])
    logger.info(f"Order-{order} perturbation vs exact for {reference.label}: slope {slope}")
    return PairingReport(order=order, kappas=tuple(float(k) for k in kappas), max_errors=tuple(max_errors),
                         unreliable=tuple(unreliable), slope=slope)
