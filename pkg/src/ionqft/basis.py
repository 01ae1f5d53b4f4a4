"""Composite Hilbert space of a four-level ion register and truncated boson modes.

Tensor order is fixed: the 4-level register is the leftmost factor, followed by
the boson modes in declared order. Basis indices are row-major over
``(level - 1, n_1, ..., n_M)``.

The register encodes one fermion mode ``b`` and one antifermion mode ``d`` on
two qubits (antifermion qubit first, fermion qubit second). With occupation
bits ``(A, F)`` the level is ``2*A + F + 1``::

    level 1 = |A=0, F=0>   vacuum
    level 2 = |A=0, F=1>   +|f>
    level 3 = |A=1, F=0>   -|fbar>      (d^dag |vac> = -|3>)
    level 4 = |A=1, F=1>   -|f, fbar>   (b^dag d^dag |vac> = -|4>)

The signs follow from ``b^dag = I (x) s+`` and ``d^dag = s+ (x) sz`` with the
Pauli convention ``sz|empty> = -|empty>``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np
import scipy.sparse as sp

N_LEVELS = 4

# single-qubit factors in the occupation basis (|0> = empty, |1> = occupied)
_SIGMA_PLUS = sp.csr_array(np.array([[0, 0], [1, 0]], dtype=complex))
_SIGMA_MINUS = sp.csr_array(np.array([[0, 1], [0, 0]], dtype=complex))
_SIGMA_Z = sp.csr_array(np.diag([-1, 1]).astype(complex))
_I2 = sp.identity(2, dtype=complex, format="csr")


class InvalidConfigurationError(ValueError):
    """Raised for malformed spaces, configs or operator requests."""


@dataclass(frozen=True)
class BasisLabel:
    """Basis state ``|level, n_1, ..., n_M>``; levels are 1-based."""

    level: int
    occupations: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "occupations", tuple(int(n) for n in self.occupations))

    def __str__(self) -> str:
        return ",".join(str(v) for v in (self.level, *self.occupations))

    @classmethod
    def parse(cls, text: str) -> "BasisLabel":
        """Parse ``"level,n1,n2"`` as written by ``str()``."""
        parts = [int(p) for p in text.replace(" ", "").split(",") if p]
        if len(parts) < 2:
            raise InvalidConfigurationError(f"basis label needs a level and at least one occupation: {text!r}")
        return cls(parts[0], tuple(parts[1:]))


@dataclass(frozen=True)
class HilbertSpace:
    """4-level register tensored with truncated boson modes.

    Mode ``k`` keeps Fock states ``0..boson_cutoffs[k]``.
    """

    boson_cutoffs: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "boson_cutoffs", tuple(int(c) for c in self.boson_cutoffs))

    @property
    def n_levels(self) -> int:
        return N_LEVELS

    @property
    def n_modes(self) -> int:
        return len(self.boson_cutoffs)

    @property
    def shape(self) -> tuple[int, ...]:
        return (N_LEVELS, *(c + 1 for c in self.boson_cutoffs))

    @property
    def fock_dim(self) -> int:
        return int(np.prod([c + 1 for c in self.boson_cutoffs]))

    @property
    def dim(self) -> int:
        return N_LEVELS * self.fock_dim

    def index(self, label: BasisLabel) -> int:
        if not 1 <= label.level <= N_LEVELS:
            raise InvalidConfigurationError(f"level {label.level} outside 1..{N_LEVELS}")
        if len(label.occupations) != self.n_modes:
            raise InvalidConfigurationError(
                f"label has {len(label.occupations)} occupations, space has {self.n_modes} modes"
            )
        for n, c in zip(label.occupations, self.boson_cutoffs):
            if not 0 <= n <= c:
                raise InvalidConfigurationError(f"occupation {n} outside 0..{c}")
        return int(np.ravel_multi_index((label.level - 1, *label.occupations), self.shape))

    def label(self, index: int) -> BasisLabel:
        if not 0 <= index < self.dim:
            raise InvalidConfigurationError(f"index {index} outside 0..{self.dim - 1}")
        level, *occ = np.unravel_index(index, self.shape)
        return BasisLabel(int(level) + 1, tuple(int(n) for n in occ))

    def basis_state(self, label: BasisLabel) -> np.ndarray:
        psi = np.zeros(self.dim, dtype=complex)
        psi[self.index(label)] = 1.0
        return psi

    def grid(self, amplitudes: np.ndarray) -> np.ndarray:
        """View a state vector as an array indexed ``[level-1, n_1, ..., n_M]``."""
        return np.asarray(amplitudes).reshape(self.shape)


def build_space(boson_cutoffs: Sequence[int]) -> HilbertSpace:
    """Build the composite space; every cutoff must be at least 1.

    >>> build_space([15]).dim
    64
    """
    cutoffs = list(boson_cutoffs)
    if not cutoffs:
        raise InvalidConfigurationError("at least one boson mode is required")
    for c in cutoffs:
        if int(c) != c or c < 1:
            raise InvalidConfigurationError(f"boson cutoff must be an integer >= 1, got {c!r}")
    return HilbertSpace(tuple(int(c) for c in cutoffs))


def _embed(space: HilbertSpace, register_op, mode_ops: dict[int, sp.sparray] | None = None) -> sp.csr_array:
    mode_ops = mode_ops or {}
    factors = [sp.csr_array(register_op, dtype=complex)]
    for k, c in enumerate(space.boson_cutoffs):
        factors.append(mode_ops.get(k, sp.identity(c + 1, dtype=complex, format="csr")))
    op = reduce(lambda x, y: sp.kron(x, y, format="csr"), factors)
    op.eliminate_zeros()
    return sp.csr_array(op)


def _check_mode(space: HilbertSpace, mode: int):
    if not 0 <= mode < space.n_modes:
        raise InvalidConfigurationError(f"mode {mode} outside 0..{space.n_modes - 1}")


def _check_level(level: int):
    if not 1 <= level <= N_LEVELS:
        raise InvalidConfigurationError(f"level {level} outside 1..{N_LEVELS}")


def ladder(cutoff: int) -> sp.csr_array:
    """Single-mode truncated annihilation operator, ``a|n> = sqrt(n)|n-1>``."""
    return sp.csr_array(sp.diags(np.sqrt(np.arange(1, cutoff + 1)).astype(complex), 1))


def boson_annihilation(space: HilbertSpace, mode: int) -> sp.csr_array:
    _check_mode(space, mode)
    return _embed(space, sp.identity(N_LEVELS), {mode: ladder(space.boson_cutoffs[mode])})


def boson_creation(space: HilbertSpace, mode: int) -> sp.csr_array:
    return sp.csr_array(boson_annihilation(space, mode).conj().T)


def number_operator(space: HilbertSpace, mode: int) -> sp.csr_array:
    _check_mode(space, mode)
    n = sp.diags(np.arange(space.boson_cutoffs[mode] + 1).astype(complex))
    return _embed(space, sp.identity(N_LEVELS), {mode: n})


def level_matrix(i: int, j: int) -> sp.csr_array:
    """``|i><j|`` on the bare 4-level register."""
    _check_level(i)
    _check_level(j)
    m = np.zeros((N_LEVELS, N_LEVELS), dtype=complex)
    m[i - 1, j - 1] = 1.0
    return sp.csr_array(m)


def level_transition(space: HilbertSpace, i: int, j: int) -> sp.csr_array:
    """``|i><j|`` on the register, identity on every boson mode."""
    return _embed(space, level_matrix(i, j))


def level_projector(space: HilbertSpace, level: int) -> sp.csr_array:
    return level_transition(space, level, level)


def identity(space: HilbertSpace) -> sp.csr_array:
    return sp.identity(space.dim, dtype=complex, format="csr")


def register_fermion_operators() -> tuple[sp.csr_array, ...]:
    """``(b, b_dag, d, d_dag)`` as 4x4 matrices on the register alone."""
    b_dag = sp.kron(_I2, _SIGMA_PLUS, format="csr")
    b = sp.kron(_I2, _SIGMA_MINUS, format="csr")
    d_dag = sp.kron(_SIGMA_PLUS, _SIGMA_Z, format="csr")
    d = sp.kron(_SIGMA_MINUS, _SIGMA_Z, format="csr")
    return tuple(sp.csr_array(m) for m in (b, b_dag, d, d_dag))


def jordan_wigner_operators(space: HilbertSpace) -> tuple[sp.csr_array, ...]:
    """Fermion ``b, b_dag`` and antifermion ``d, d_dag`` embedded in ``space``."""
    return tuple(_embed(space, m) for m in register_fermion_operators())


def is_hermitian(op) -> bool:
    """Exact check on stored entries, no tolerance."""
    diff = sp.csr_array(op - op.conj().T)
    diff.eliminate_zeros()
    return diff.nnz == 0


def is_zero(op) -> bool:
    op = sp.csr_array(op)
    op.eliminate_zeros()
    return op.nnz == 0
