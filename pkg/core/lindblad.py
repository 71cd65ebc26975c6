# core/lindblad.py
"""
Liouvillian superoperators for collective spin models.

Dissipators carry the factor 2 convention

    D[L]ρ = 2LρL† − L†Lρ − ρL†L

and density matrices are vectorized by column stacking, vec(ρ) = ρ.flatten('F'),
so that vec(AXB) = (Bᵀ ⊗ A) vec(X).
"""

from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
from scipy.integrate import solve_ivp
from scipy.spatial import cKDTree

from config.settings import settings
from core.errors import (
    CapExceededError,
    DegenerateSteadyStateError,
    DimensionMismatchError,
    InvalidParameterError,
    NumericalFailure,
)
from core.logs import setup_logger
from core.spin_algebra import OperatorMatrix, Space

logger = setup_logger('Lindblad', 'Core')

Dissipator = Tuple[float, OperatorMatrix]


def vec(matrix: np.ndarray) -> np.ndarray:
    return np.asarray(matrix).flatten(order='F')


def devec(vector: np.ndarray, dim: int) -> np.ndarray:
    return np.asarray(vector).reshape((dim, dim), order='F')


@dataclass(frozen=True, eq=False)
class ModelSpec:
    """Hamiltonian, rated jump operators and the parity used for PT tests"""
    space: Space
    hamiltonian: OperatorMatrix
    dissipators: Tuple[Dissipator, ...] = ()
    parity: Optional[OperatorMatrix] = None
    label: str = ''
    family: str = ''
    params: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, 'dissipators', tuple((float(rate), op) for rate, op in self.dissipators))
        self.validate()

    def validate(self):
        operators = [self.hamiltonian] + [op for _, op in self.dissipators]
        if self.parity is not None:
            operators.append(self.parity)
        for op in operators:
            if op.space != self.space:
                raise DimensionMismatchError(
                    f"Model {self.label!r}: operator {op.label!r} lives on {op.space.label}, expected {self.space.label}"
                )
        if not self.hamiltonian.is_hermitian(settings.get_float('tolerances.hermitian', 1e-12)):
            raise InvalidParameterError(f"Model {self.label!r}: Hamiltonian is not Hermitian")
        for rate, op in self.dissipators:
            if rate < 0 or not np.isfinite(rate):
                raise InvalidParameterError(f"Model {self.label!r}: negative or non-finite rate {rate} on {op.label!r}")

    @property
    def dim(self) -> int:
        return self.space.dim


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    space: Space
    data: np.ndarray
    basis: str = 'z'

    def __post_init__(self):
        data = np.array(self.data, dtype=complex)
        if data.shape != (self.space.dim, self.space.dim):
            raise DimensionMismatchError(f"Density matrix shape {data.shape} does not fit {self.space.label}")
        data.setflags(write=False)
        object.__setattr__(self, 'data', data)

    @classmethod
    def from_ket(cls, space: Space, psi: np.ndarray) -> 'DensityMatrix':
        psi = np.asarray(psi, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        return cls(space, np.outer(psi, psi.conj()))

    @classmethod
    def maximally_mixed(cls, space: Space) -> 'DensityMatrix':
        return cls(space, np.eye(space.dim) / space.dim)

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.data))

    def validate(self, tol: Optional[float] = None):
        """Hermitian, unit trace and positive within tolerance"""
        tol = tol if tol is not None else settings.get_float('tolerances.trace', 1e-10)
        if np.max(np.abs(self.data - self.data.conj().T)) > tol:
            raise InvalidParameterError("Density matrix is not Hermitian")
        if abs(self.trace - 1) > tol:
            raise InvalidParameterError(f"Density matrix trace is {self.trace}, expected 1")
        lowest = float(np.min(np.linalg.eigvalsh((self.data + self.data.conj().T) / 2)))
        if lowest < -1e-8:
            raise InvalidParameterError(f"Density matrix has eigenvalue {lowest:.3e} < 0")

    def trace_distance(self, other: 'DensityMatrix') -> float:
        delta = self.data - other.data
        return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh((delta + delta.conj().T) / 2))))


class Liouvillian:
    """Superoperator of one model; the dense matrix is assembled on first access"""

    def __init__(self, model: ModelSpec):
        self.model = model
        self.dim = model.dim
        self._hamiltonian = model.hamiltonian.data
        self._jumps = [(rate, op.data, op.data.conj().T @ op.data) for rate, op in model.dissipators]

    @property
    def superdim(self) -> int:
        return self.dim * self.dim

    @cached_property
    def matrix(self) -> np.ndarray:
        d = self.dim
        eye = np.eye(d)
        h = self._hamiltonian
        logger.debug(f"Assembling {self.superdim}x{self.superdim} Liouvillian for {self.model.label}")

        matrix = -1j * (np.kron(eye, h) - np.kron(h.T, eye))
        for rate, jump, jump_dag_jump in self._jumps:
            if rate == 0:
                continue
            matrix += rate * (2 * np.kron(jump.conj(), jump)
                              - np.kron(eye, jump_dag_jump)
                              - np.kron(jump_dag_jump.T, eye))

        leak = np.linalg.norm(vec(eye).conj() @ matrix)
        scale = max(1.0, float(np.max(np.abs(matrix))))
        if leak > 1e-10 * d * scale:
            logger.warning(f"Liouvillian of {self.model.label} leaks trace: |vec(I)†L| = {leak:.3e}")
        return matrix

    def apply(self, rho: np.ndarray) -> np.ndarray:
        """Right-hand side of the master equation by operator products"""
        h = self._hamiltonian
        out = -1j * (h @ rho - rho @ h)
        for rate, jump, jump_dag_jump in self._jumps:
            if rate == 0:
                continue
            out += rate * (2 * jump @ rho @ jump.conj().T - jump_dag_jump @ rho - rho @ jump_dag_jump)
        return out


def build_liouvillian(model: ModelSpec) -> Liouvillian:
    model.validate()
    return Liouvillian(model)


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigenvalues sorted by |Re| ascending, then Im descending, then original index"""
    eigenvalues: np.ndarray
    space: Space
    eigenmodes: Optional[np.ndarray] = None
    left_vectors: Optional[np.ndarray] = None
    gap: float = 0.0
    zero_mode_index: int = 0

    @property
    def S(self) -> float:
        return self.space.S

    def expand(self, rho0: DensityMatrix, times: Sequence[float]) -> List[np.ndarray]:
        """ρ(t) = Σ c_i e^{λ_i t} ρ_i using the bi-orthogonal left/right eigenvectors"""
        if self.eigenmodes is None or self.left_vectors is None:
            raise InvalidParameterError("Eigen-expansion needs a spectrum computed with left vectors")
        d = self.space.dim
        right = np.stack([vec(mode) for mode in self.eigenmodes], axis=1)
        left = self.left_vectors
        overlaps = np.einsum('ij,ij->j', left.conj(), right)
        coeffs = (left.conj().T @ vec(rho0.data)) / overlaps
        return [devec(right @ (coeffs * np.exp(self.eigenvalues * t)), d) for t in times]


def _sort_order(values: np.ndarray) -> np.ndarray:
    keys_re = np.round(np.abs(values.real), 10)
    return np.lexsort((np.arange(values.size), -values.imag, keys_re))


def _check_spectrum(values: np.ndarray, label: str):
    scale = max(1.0, float(np.max(np.abs(values))))
    max_re = float(np.max(values.real))
    if max_re > settings.get_float('tolerances.zero_mode', 1e-8) * scale:
        logger.warning(f"{label}: eigenvalue with Re = {max_re:.3e} > 0")

    points = np.column_stack([values.real, values.imag])
    mirrored = np.column_stack([values.real, -values.imag])
    distances, _ = cKDTree(points).query(mirrored)
    worst = float(np.max(distances))
    if worst > settings.get_float('tolerances.conjugate_pairing', 1e-8) * scale:
        logger.warning(f"{label}: eigenvalues not closed under conjugation (worst {worst:.3e})")


def spectrum(liouvillian: Liouvillian, with_modes: bool = True, with_left: bool = False) -> Spectrum:
    cap = settings.get_int('caps.spectrum_dim', 4096)
    if liouvillian.superdim > cap:
        raise CapExceededError(f"Liouvillian dimension {liouvillian.superdim} exceeds spectrum cap {cap}")

    matrix = liouvillian.matrix
    label = liouvillian.model.label
    try:
        if with_modes or with_left:
            result = scipy.linalg.eig(matrix, left=with_left, right=True)
        else:
            result = (scipy.linalg.eigvals(matrix),)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise NumericalFailure(f"Eigensolver failed for {label}: {e}",
                               {'condition': f"{np.linalg.cond(matrix):.3e}"})

    values = result[0]
    order = _sort_order(values)
    values = values[order]
    _check_spectrum(values, label)

    modes = None
    left = None
    if with_modes or with_left:
        right = result[-1][:, order]
        d = liouvillian.dim
        modes = np.stack([devec(right[:, k], d) for k in range(right.shape[1])])
        modes /= np.linalg.norm(modes, axis=(1, 2))[:, None, None]
        if with_left:
            left = result[1][:, order]

    gap = float(abs(values[1].real)) if values.size > 1 else 0.0
    logger.debug(f"Spectrum of {label}: {values.size} eigenvalues, gap {gap:.6e}")
    return Spectrum(eigenvalues=values, space=liouvillian.model.space, eigenmodes=modes,
                    left_vectors=left, gap=gap, zero_mode_index=0)


def stationary_state(liouvillian: Liouvillian, check_unique: bool = True) -> DensityMatrix:
    d = liouvillian.dim
    label = liouvillian.model.label
    matrix = liouvillian.matrix

    if check_unique:
        values = spectrum(liouvillian, with_modes=False).eigenvalues
        threshold = settings.get_float('tolerances.zero_mode', 1e-8)
        if values.size > 1 and abs(values[1].real) <= threshold:
            raise DegenerateSteadyStateError(
                f"Zero eigenvalue of {label} is degenerate; steady states coexist",
                {'second_abs_re': f"{abs(values[1].real):.3e}"},
            )

    # Replace the (0,0) equation by the trace condition
    system = matrix.copy()
    system[0, :] = vec(np.eye(d))
    rhs = np.zeros(d * d, dtype=complex)
    rhs[0] = 1.0
    try:
        solution = scipy.linalg.solve(system, rhs)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise NumericalFailure(f"Steady-state solve failed for {label}: {e}",
                               {'condition': f"{np.linalg.cond(system):.3e}"})

    rho = devec(solution, d)
    rho = (rho + rho.conj().T) / 2
    rho = rho / np.trace(rho)

    residual = float(np.linalg.norm(matrix @ vec(rho)))
    scale = max(1.0, float(np.max(np.abs(matrix))))
    if residual > settings.get_float('tolerances.steady_residual', 1e-8) * scale:
        raise NumericalFailure(f"Steady state of {label} does not solve Lρ = 0", {'residual': f"{residual:.3e}"})

    lowest = float(np.min(np.linalg.eigvalsh(rho)))
    if lowest < -settings.get_float('tolerances.negative_eigenvalue', 1e-6):
        raise NumericalFailure(f"Steady state of {label} is not positive", {'min_eigenvalue': f"{lowest:.3e}"})

    logger.debug(f"Steady state of {label}: residual {residual:.3e}")
    return DensityMatrix(liouvillian.model.space, rho)


def evolve(liouvillian: Liouvillian, rho0: DensityMatrix, times: Sequence[float]) -> List[DensityMatrix]:
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise InvalidParameterError("Time grid must be a non-empty 1D sequence")
    if times[0] < 0 or np.any(np.diff(times) < 0):
        raise InvalidParameterError("Time grid must be non-decreasing and start at t >= 0")
    if rho0.space != liouvillian.model.space:
        raise DimensionMismatchError("Initial state and Liouvillian live on different spaces")
    rho0.validate()

    d = liouvillian.dim
    space = liouvillian.model.space
    label = liouvillian.model.label

    if liouvillian.superdim <= settings.get_int('caps.expm_dim', 1024):
        logger.debug(f"Evolving {label} with matrix exponentials over {times.size} times")
        states = _evolve_expm(liouvillian.matrix, vec(rho0.data), times)
    else:
        logger.debug(f"Evolving {label} with {settings.get('evolve.method', 'DOP853')} over [0, {times[-1]}]")
        states = _evolve_ode(liouvillian, rho0.data, times)

    drift_limit = settings.get_float('evolve.trace_drift', 1e-6)
    results = []
    for t, flat in zip(times, states):
        rho = devec(flat, d)
        drift = abs(np.trace(rho) - 1)
        if drift > drift_limit:
            raise NumericalFailure(f"Trace drift while evolving {label}", {'t': t, 'drift': f"{drift:.3e}"})
        if drift > 1e-8:
            logger.warning(f"{label}: trace drift {drift:.3e} at t={t}")
        results.append(DensityMatrix(space, rho))
    return results


def _evolve_expm(matrix: np.ndarray, v0: np.ndarray, times: np.ndarray) -> List[np.ndarray]:
    propagators: Dict[float, np.ndarray] = {}
    states = []
    current = v0.copy()
    previous_t = 0.0
    for t in times:
        dt = float(t - previous_t)
        if dt > 0:
            key = round(dt, 12)
            if key not in propagators:
                propagators[key] = scipy.linalg.expm(dt * matrix)
            current = propagators[key] @ current
        states.append(current.copy())
        previous_t = t
    return states


def _evolve_ode(liouvillian: Liouvillian, rho0: np.ndarray, times: np.ndarray) -> List[np.ndarray]:
    d = liouvillian.dim
    if times[-1] == 0:
        return [vec(rho0) for _ in times]

    def rhs(_, y):
        return liouvillian.apply(y.reshape((d, d), order='F')).flatten(order='F')

    solution = solve_ivp(rhs, (0.0, float(times[-1])), vec(rho0).astype(complex), t_eval=times,
                         method=settings.get('evolve.method', 'DOP853'),
                         rtol=settings.get_float('evolve.rtol', 1e-8),
                         atol=settings.get_float('evolve.atol', 1e-10))
    if solution.status != 0:
        raise NumericalFailure(f"ODE integration failed for {liouvillian.model.label}: {solution.message}",
                               {'t_reached': float(solution.t[-1]) if solution.t.size else 0.0})
    return [solution.y[:, k] for k in range(times.size)]


def expectation(rho: DensityMatrix, obs: OperatorMatrix) -> complex:
    if rho.space != obs.space:
        raise DimensionMismatchError(f"State on {rho.space.label} vs observable {obs.label!r} on {obs.space.label}")
    return complex(np.einsum('ij,ji->', rho.data, obs.data))


def pt_transform_model(model: ModelSpec) -> ModelSpec:
    """H -> P conj(H) P⁻¹ and L -> P L† P⁻¹, rates unchanged"""
    if model.parity is None:
        raise InvalidParameterError(f"Model {model.label!r} carries no parity operator")
    p = model.parity.data
    p_inv = np.linalg.inv(p)
    space = model.space

    hamiltonian = OperatorMatrix(space, p @ model.hamiltonian.data.conj() @ p_inv, True,
                                 f"PT({model.hamiltonian.label})")
    dissipators = tuple(
        (rate, OperatorMatrix(space, p @ op.data.conj().T @ p_inv, label=f"PT'({op.label})"))
        for rate, op in model.dissipators
    )
    return ModelSpec(space, hamiltonian, dissipators, model.parity, f"PT[{model.label}]",
                     model.family, dict(model.params))


def check_liouvillian_pt(model: ModelSpec) -> float:
    """Relative Frobenius distance between the Liouvillian and its PT image"""
    original = build_liouvillian(model).matrix
    transformed = build_liouvillian(pt_transform_model(model)).matrix
    norm = np.linalg.norm(original)
    if norm == 0:
        return 0.0
    residual = float(np.linalg.norm(transformed - original) / norm)
    logger.debug(f"PT residual of {model.label}: {residual:.3e}")
    return residual


def is_pt_symmetric(model: ModelSpec) -> bool:
    return check_liouvillian_pt(model) <= settings.get_float('tolerances.pt_symmetric', 1e-12)
