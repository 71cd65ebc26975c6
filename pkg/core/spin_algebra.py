# core/spin_algebra.py
"""
Spin-S operator matrices, the x-ladder basis, parity operators and
two-spin tensor embeddings.

Every matrix is written in the z eigenbasis ordered m = S, S-1, ..., -S,
so row 0 is the highest-weight state and the reflection parity is the
anti-diagonal.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Tuple, Union

import numpy as np

from config.settings import settings
from core.errors import DimensionMismatchError, InvalidParameterError

SpinValue = Union[int, float, Fraction, str]


@dataclass(frozen=True)
class SpinSpace:
    """Hilbert space of a single collective spin S, stored as 2S"""
    two_s: int
    basis: str = 'z'

    def __post_init__(self):
        if int(self.two_s) != self.two_s or self.two_s < 1:
            raise InvalidParameterError(f"2S must be a positive integer, got {self.two_s}")
        object.__setattr__(self, 'two_s', int(self.two_s))

    @classmethod
    def from_spin(cls, S: SpinValue) -> 'SpinSpace':
        """Build from S given as int, float, Fraction or text such as '3/2'"""
        try:
            twice = Fraction(S) * 2
        except (TypeError, ValueError, ZeroDivisionError) as e:
            raise InvalidParameterError(f"Invalid spin value {S!r}: {e}")
        if twice.denominator != 1:
            raise InvalidParameterError(f"S must be a multiple of 1/2, got {S!r}")
        return cls(int(twice))

    @property
    def S(self) -> float:
        return self.two_s / 2

    @property
    def dim(self) -> int:
        return self.two_s + 1

    @property
    def m_values(self) -> np.ndarray:
        return self.S - np.arange(self.dim)

    @property
    def label(self) -> str:
        return f"S={self.two_s // 2}" if self.two_s % 2 == 0 else f"S={self.two_s}/2"

    def index(self, m: float) -> int:
        """Row index of |m> in the m = S..-S ordering"""
        k = self.S - m
        if abs(k - round(k)) > 1e-12 or not 0 <= round(k) < self.dim:
            raise InvalidParameterError(f"m={m} is not a valid magnetic number for {self.label}")
        return int(round(k))


@dataclass(frozen=True)
class ProductSpace:
    """A ⊗ B of two identical spins, A is the left tensor factor"""
    factor: SpinSpace

    @property
    def S(self) -> float:
        return self.factor.S

    @property
    def dim(self) -> int:
        return self.factor.dim ** 2

    @property
    def basis(self) -> str:
        return f"{self.factor.basis}x{self.factor.basis}"

    @property
    def label(self) -> str:
        return f"{self.factor.label} (A) x {self.factor.label} (B)"


Space = Union[SpinSpace, ProductSpace]


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Dense complex operator tagged with the space it acts on"""
    space: Space
    data: np.ndarray
    hermitian: bool = False
    label: str = field(default='')

    def __post_init__(self):
        data = np.array(self.data, dtype=complex)
        if data.ndim != 2 or data.shape[0] != data.shape[1]:
            raise DimensionMismatchError(f"Operator {self.label!r} is not square: {data.shape}")
        if data.shape[0] != self.space.dim:
            raise DimensionMismatchError(
                f"Operator {self.label!r} has dimension {data.shape[0]}, space {self.space.label} needs {self.space.dim}"
            )
        if self.hermitian and not _is_hermitian(data, settings.get_float('tolerances.hermitian', 1e-12)):
            raise InvalidParameterError(f"Operator {self.label!r} is flagged Hermitian but is not")
        data.setflags(write=False)
        object.__setattr__(self, 'data', data)

    @property
    def dim(self) -> int:
        return self.space.dim

    def dag(self) -> 'OperatorMatrix':
        return OperatorMatrix(self.space, self.data.conj().T, self.hermitian, f"{self.label}†")

    def conj(self) -> 'OperatorMatrix':
        return OperatorMatrix(self.space, self.data.conj(), self.hermitian, f"conj({self.label})")

    def power(self, n: int) -> 'OperatorMatrix':
        return OperatorMatrix(self.space, np.linalg.matrix_power(self.data, n), self.hermitian,
                              f"{self.label}^{n}")

    def commutator(self, other: 'OperatorMatrix') -> np.ndarray:
        self._check_space(other)
        return self.data @ other.data - other.data @ self.data

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return _is_hermitian(self.data, tol)

    def _check_space(self, other: 'OperatorMatrix'):
        if other.space != self.space:
            raise DimensionMismatchError(f"{self.label!r} on {self.space.label} vs {other.label!r} on {other.space.label}")

    def __matmul__(self, other: 'OperatorMatrix') -> 'OperatorMatrix':
        self._check_space(other)
        return OperatorMatrix(self.space, self.data @ other.data, label=f"{self.label}{other.label}")

    def __add__(self, other: 'OperatorMatrix') -> 'OperatorMatrix':
        self._check_space(other)
        return OperatorMatrix(self.space, self.data + other.data,
                              self.hermitian and other.hermitian, f"({self.label}+{other.label})")

    def __sub__(self, other: 'OperatorMatrix') -> 'OperatorMatrix':
        self._check_space(other)
        return OperatorMatrix(self.space, self.data - other.data,
                              self.hermitian and other.hermitian, f"({self.label}-{other.label})")

    def __mul__(self, scalar: complex) -> 'OperatorMatrix':
        keeps_hermitian = self.hermitian and np.isreal(scalar)
        return OperatorMatrix(self.space, scalar * self.data, bool(keeps_hermitian), f"{scalar}*{self.label}")

    __rmul__ = __mul__

    def __truediv__(self, scalar: complex) -> 'OperatorMatrix':
        return self * (1.0 / scalar)


def _is_hermitian(data: np.ndarray, tol: float) -> bool:
    scale = max(1.0, float(np.max(np.abs(data)))) if data.size else 1.0
    return float(np.max(np.abs(data - data.conj().T), initial=0.0)) <= tol * scale


@dataclass(frozen=True)
class SpinOperators:
    sx: OperatorMatrix
    sy: OperatorMatrix
    sz: OperatorMatrix
    splus: OperatorMatrix
    sminus: OperatorMatrix


@dataclass(frozen=True)
class XLadder:
    """S_x^± = S_y ± iS_z and the unitary whose columns are S_x eigenvectors (S..-S)"""
    sx_plus: OperatorMatrix
    sx_minus: OperatorMatrix
    basis_change: np.ndarray


@lru_cache(maxsize=64)
def build_spin_operators(space: SpinSpace) -> SpinOperators:
    m = space.m_values
    S = space.S
    # S+|m> = sqrt(S(S+1) - m(m+1)) |m+1>, and |m+1> sits one row above |m>
    raising = np.sqrt(S * (S + 1) - m[1:] * (m[1:] + 1))
    splus = np.diag(raising, k=1).astype(complex)
    sminus = splus.T.copy()
    sz = np.diag(m).astype(complex)
    sx = (splus + sminus) / 2
    sy = (splus - sminus) / 2j
    return SpinOperators(
        sx=OperatorMatrix(space, sx, True, 'Sx'),
        sy=OperatorMatrix(space, sy, True, 'Sy'),
        sz=OperatorMatrix(space, sz, True, 'Sz'),
        splus=OperatorMatrix(space, splus, False, 'S+'),
        sminus=OperatorMatrix(space, sminus, False, 'S-'),
    )


@lru_cache(maxsize=64)
def build_x_ladder(space: SpinSpace) -> XLadder:
    ops = build_spin_operators(space)
    sx_plus = ops.sy.data + 1j * ops.sz.data
    sx_minus = ops.sy.data - 1j * ops.sz.data

    _, vectors = np.linalg.eigh(ops.sx.data)
    unitary = vectors[:, ::-1].astype(complex)

    # Fix phases so S_x^+ has positive real matrix elements between neighbouring S_x eigenstates
    pivot = int(np.argmax(np.abs(unitary[:, 0])))
    unitary[:, 0] *= abs(unitary[pivot, 0]) / unitary[pivot, 0]
    for k in range(1, space.dim):
        element = unitary[:, k - 1].conj() @ sx_plus @ unitary[:, k]
        unitary[:, k] *= element.conjugate() / abs(element)
    unitary.setflags(write=False)

    return XLadder(
        sx_plus=OperatorMatrix(space, sx_plus, False, 'Sx+'),
        sx_minus=OperatorMatrix(space, sx_minus, False, 'Sx-'),
        basis_change=unitary,
    )


def identity(space: Space) -> OperatorMatrix:
    return OperatorMatrix(space, np.eye(space.dim), True, 'I')


def parity_reflection(space: SpinSpace) -> OperatorMatrix:
    """P|m> = |-m>"""
    return OperatorMatrix(space, np.eye(space.dim)[::-1], True, 'P')


def two_spin_embed(op_a: OperatorMatrix, op_b: OperatorMatrix) -> OperatorMatrix:
    """A ⊗ B on the product space, A is the left factor"""
    if not isinstance(op_a.space, SpinSpace) or op_a.space != op_b.space:
        raise DimensionMismatchError(
            f"Cannot embed {op_a.label!r} on {op_a.space.label} with {op_b.label!r} on {op_b.space.label}"
        )
    return OperatorMatrix(ProductSpace(op_a.space), np.kron(op_a.data, op_b.data),
                          op_a.hermitian and op_b.hermitian, f"{op_a.label}⊗{op_b.label}")


def embed_a(op: OperatorMatrix) -> OperatorMatrix:
    return two_spin_embed(op, identity(op.space))


def embed_b(op: OperatorMatrix) -> OperatorMatrix:
    return two_spin_embed(identity(op.space), op)


def swap_parity(space: SpinSpace) -> OperatorMatrix:
    """SWAP|i, j> = |j, i>"""
    d = space.dim
    swap = np.zeros((d * d, d * d))
    for i in range(d):
        for j in range(d):
            swap[j * d + i, i * d + j] = 1.0
    return OperatorMatrix(ProductSpace(space), swap, True, 'SWAP')


def spin_state(space: SpinSpace, m: float) -> np.ndarray:
    """Normalized z-basis ket |m>"""
    ket = np.zeros(space.dim, dtype=complex)
    ket[space.index(m)] = 1.0
    return ket


def x_ladder_coefficients(op: OperatorMatrix, tol: float = 1e-10) -> Tuple[complex, complex, complex]:
    """Expand op = α S_x^+ + β S_x^- + γ S_x and return (α, β, γ)"""
    if not isinstance(op.space, SpinSpace):
        raise DimensionMismatchError("x-ladder expansion needs a single-spin operator")
    ladder = build_x_ladder(op.space)
    sx = build_spin_operators(op.space).sx
    design = np.stack([ladder.sx_plus.data.ravel(), ladder.sx_minus.data.ravel(), sx.data.ravel()], axis=1)
    target = op.data.ravel()
    coeffs, *_ = np.linalg.lstsq(design, target, rcond=None)
    residual = np.linalg.norm(design @ coeffs - target)
    if residual > tol * max(1.0, np.linalg.norm(target)):
        raise InvalidParameterError(
            f"Operator {op.label!r} is not a combination of Sx+, Sx-, Sx (residual {residual:.3e})"
        )
    alpha, beta, gamma = (complex(c) for c in coeffs)
    return alpha, beta, gamma
