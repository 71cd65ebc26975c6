# analysis/trajectory.py
"""
Quantum-jump unraveling of the master equation.

Between jumps ψ evolves under H_eff = H - iΣγ L†L without renormalization;
a jump happens when ‖ψ‖² falls to a uniform random threshold, located by
bisection, and applies one of the operators √(2γ)L chosen with probability
∝ 2γ‖Lψ‖².  The ensemble average reproduces D[L]ρ = 2LρL† - {L†L, ρ}.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from config.settings import settings
from core.errors import DimensionMismatchError, InvalidParameterError, NumericalFailure
from core.lindblad import ModelSpec
from core.logs import setup_logger
from core.spin_algebra import OperatorMatrix, SpinSpace, build_spin_operators


@dataclass(frozen=True, eq=False)
class TrajectoryRun:
    seed: int
    t_grid: np.ndarray
    samples: np.ndarray
    jump_log: Tuple[Tuple[float, int], ...] = field(default_factory=tuple)

    @property
    def n_jumps(self) -> int:
        return len(self.jump_log)


@dataclass(frozen=True, eq=False)
class EnsembleAverage:
    t_grid: np.ndarray
    mean: np.ndarray
    stderr: Optional[np.ndarray]
    n_traj: int


def default_observable(model: ModelSpec) -> OperatorMatrix:
    if not isinstance(model.space, SpinSpace):
        raise InvalidParameterError("Default observable Sz/S needs a one-spin model; pass an observable")
    sz = build_spin_operators(model.space).sz
    return OperatorMatrix(model.space, sz.data / model.space.S, True, 'Sz/S')


class TrajectoryRunner:
    """Deterministic single-trajectory propagation for one model"""

    def __init__(self, model: ModelSpec, observable: Optional[OperatorMatrix] = None):
        self.model = model
        self.logger = setup_logger('Analysis', self.__class__.__name__)
        self.observable = observable or default_observable(model)
        if self.observable.space != model.space:
            raise DimensionMismatchError(f"Observable {self.observable.label!r} does not act on {model.space.label}")
        if not self.observable.is_hermitian(settings.get_float('tolerances.hermitian', 1e-12)):
            raise InvalidParameterError(f"Observable {self.observable.label!r} is not Hermitian")

        self.bisection_tol = settings.get_float('trajectory.bisection_tol', 1e-10)
        self.norm_floor = settings.get_float('trajectory.norm_floor', 1e-14)

        h_eff = model.hamiltonian.data.astype(complex)
        jumps = []
        for rate, op in model.dissipators:
            if rate == 0:
                continue
            h_eff = h_eff - 1j * rate * (op.data.conj().T @ op.data)
            jumps.append(np.sqrt(2 * rate) * op.data)
        self.h_eff = h_eff
        self.jumps = jumps

        self._eigen = None
        values, vectors = scipy.linalg.eig(h_eff)
        condition = np.linalg.cond(vectors)
        if np.isfinite(condition) and condition <= settings.get_float('trajectory.max_condition', 1e8):
            self._eigen = (values, vectors, np.linalg.inv(vectors))
        else:
            self.logger.debug(f"H_eff eigenvectors ill-conditioned ({condition:.3e}); using expm")

    def propagate(self, psi: np.ndarray, tau: float) -> np.ndarray:
        if tau == 0:
            return psi.copy()
        if self._eigen is not None:
            values, vectors, inverse = self._eigen
            return vectors @ (np.exp(-1j * values * tau) * (inverse @ psi))
        return scipy.linalg.expm(-1j * tau * self.h_eff) @ psi

    def _jump_time(self, psi: np.ndarray, horizon: float, threshold: float) -> float:
        """Bisect for ‖U(τ)ψ‖² = threshold on [0, horizon]; the norm is non-increasing in τ"""
        lo, hi = 0.0, horizon
        while hi - lo > self.bisection_tol:
            mid = 0.5 * (lo + hi)
            trial = self.propagate(psi, mid)
            if np.vdot(trial, trial).real > threshold:
                lo = mid
            else:
                hi = mid
        return hi

    def _sample(self, psi: np.ndarray) -> float:
        return float(np.vdot(psi, self.observable.data @ psi).real / np.vdot(psi, psi).real)

    def run(self, psi0: np.ndarray, t_grid: Sequence[float], seed: int) -> TrajectoryRun:
        psi = np.asarray(psi0, dtype=complex)
        if psi.shape != (self.model.dim,):
            raise DimensionMismatchError(f"Initial state of length {psi.shape} for {self.model.space.label}")
        if abs(np.linalg.norm(psi) - 1) > 1e-10:
            raise InvalidParameterError(f"Initial state must be normalized, |ψ| = {np.linalg.norm(psi)}")
        times = np.asarray(t_grid, dtype=float)
        if times.ndim != 1 or times.size == 0 or np.any(np.diff(times) < 0):
            raise InvalidParameterError("Time grid must be a non-empty non-decreasing 1D sequence")

        rng = np.random.default_rng(seed)
        threshold = rng.random()
        t = float(times[0])
        samples = [self._sample(psi)]
        jump_log: List[Tuple[float, int]] = []

        for t_next in times[1:]:
            while True:
                candidate = self.propagate(psi, t_next - t)
                if np.vdot(candidate, candidate).real > threshold:
                    psi = candidate
                    t = float(t_next)
                    break

                tau = self._jump_time(psi, t_next - t, threshold)
                before = self.propagate(psi, tau)
                weights = np.array([np.vdot(j @ before, j @ before).real for j in self.jumps])
                total = float(weights.sum())
                if total <= self.norm_floor:
                    raise NumericalFailure("Norm decayed with no jump channel open",
                                           {'t': t + tau, 'norm2': float(np.vdot(before, before).real)})
                channel = int(np.searchsorted(np.cumsum(weights) / total, rng.random(), side='right'))
                channel = min(channel, len(self.jumps) - 1)
                after = self.jumps[channel] @ before
                psi = after / np.linalg.norm(after)
                t = t + tau
                jump_log.append((t, channel))
                threshold = rng.random()

            norm2 = np.vdot(psi, psi).real
            if norm2 < self.norm_floor:
                raise NumericalFailure("Trajectory norm collapsed between grid points", {'t': t, 'norm2': norm2})
            samples.append(self._sample(psi))

        return TrajectoryRun(seed=int(seed), t_grid=times, samples=np.array(samples), jump_log=tuple(jump_log))


def run_trajectory(model: ModelSpec, psi0: np.ndarray, t_grid: Sequence[float], seed: int,
                   observable: Optional[OperatorMatrix] = None) -> TrajectoryRun:
    return TrajectoryRunner(model, observable).run(psi0, t_grid, seed)


def ensemble_average(model: ModelSpec, psi0: np.ndarray, t_grid: Sequence[float], n_traj: int, base_seed: int,
                     observable: Optional[OperatorMatrix] = None, workers: Optional[int] = None) -> EnsembleAverage:
    """Mean and standard error over trajectories seeded base_seed + index"""
    if n_traj < 1:
        raise InvalidParameterError(f"n_traj must be >= 1, got {n_traj}")
    runner = TrajectoryRunner(model, observable)
    workers = workers or settings.get_int('workbench.workers', 1)

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        runs = list(pool.map(lambda i: runner.run(psi0, t_grid, base_seed + i), range(n_traj)))

    samples = np.stack([run.samples for run in runs])
    mean = samples.mean(axis=0)
    stderr = samples.std(axis=0, ddof=1) / np.sqrt(n_traj) if n_traj > 1 else None
    runner.logger.info(f"{n_traj} trajectories of {model.label}: {sum(r.n_jumps for r in runs)} jumps")
    return EnsembleAverage(t_grid=np.asarray(t_grid, dtype=float), mean=mean, stderr=stderr, n_traj=n_traj)
