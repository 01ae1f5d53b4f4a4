"""Fixed-step RK4 integration of ``i d|psi>/dt = H(t)|psi>``."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence

import numpy as np
import scipy.sparse as sp

from .basis import HilbertSpace, InvalidConfigurationError, is_hermitian
from .model import HamiltonianTerm

# step * (fastest frequency or bound on ||H||) must stay below this
MAX_STEP_PHASE = 0.1
SATURATION_THRESHOLD = 1e-4


class StepTooLargeError(ValueError):
    pass


class CutoffSaturationWarning(RuntimeWarning):
    pass


@dataclass
class Trajectory:
    times: np.ndarray
    observables: dict[str, np.ndarray]
    states: Optional[np.ndarray] = None
    final_state: Optional[np.ndarray] = None
    norm_drift: float = 0.0
    saturated: bool = False
    warnings: list[str] = field(default_factory=list)

    def final(self, name: str) -> float:
        return float(self.observables[name][-1])


class TermStack:
    """All term operators stacked vertically so ``H(t)|psi>`` is one sparse matvec."""

    def __init__(self, terms: Sequence[HamiltonianTerm], dim: int):
        self.terms = list(terms)
        self.dim = dim
        for term in self.terms:
            if term.operator.shape != (dim, dim):
                raise InvalidConfigurationError(
                    f"term operator of shape {term.operator.shape} does not act on dimension {dim}"
                )
        if self.terms:
            self.stack = sp.csr_array(sp.vstack([t.operator for t in self.terms], format="csr"))
        else:
            self.stack = None

    def coefficients(self, t) -> np.ndarray:
        """Shape ``(n_terms,)`` for scalar ``t``, ``(n_terms, len(t))`` for arrays."""
        return np.array([term.coefficient(t) for term in self.terms], dtype=complex)

    def apply(self, t: float, psi: np.ndarray) -> np.ndarray:
        if self.stack is None:
            return np.zeros_like(psi)
        parts = (self.stack @ psi).reshape(len(self.terms), self.dim)
        return self.coefficients(t) @ parts

    def apply_many(self, times: np.ndarray, psis: np.ndarray) -> np.ndarray:
        """``H(t_j)|psi_j>`` for every row ``j`` of ``psis``."""
        if self.stack is None:
            return np.zeros_like(psis)
        parts = (self.stack @ psis.T).reshape(len(self.terms), self.dim, len(times))
        return np.einsum("kj,kdj->jd", self.coefficients(times), parts)

    def norm_bound(self) -> float:
        """Upper bound on ``max_t ||H(t)||_2``: max column sum of ``sum_k |c_k| |A_k|``."""
        if not self.terms:
            return 0.0
        absolute = sum(term.max_abs_coefficient() * abs(term.operator) for term in self.terms)
        col = np.asarray(absolute.sum(axis=0)).ravel()
        row = np.asarray(absolute.sum(axis=1)).ravel()
        return float(math.sqrt(col.max() * row.max()))

    def max_frequency(self) -> float:
        return max((abs(t.frequency) for t in self.terms), default=0.0)


def check_step(stack: TermStack, step: float):
    scale = max(stack.max_frequency(), stack.norm_bound())
    if step * scale >= MAX_STEP_PHASE:
        raise StepTooLargeError(
            f"step {step:.3g} too large: step * max(|frequency|, ||H|| bound) = {step * scale:.3g} "
            f">= {MAX_STEP_PHASE}; use step < {MAX_STEP_PHASE / scale:.3g}"
        )


def saturation(space: HilbertSpace, psi: np.ndarray) -> float:
    """Largest population found in the top two Fock levels of any mode."""
    probs = space.grid(np.abs(psi) ** 2)
    worst = 0.0
    for k in range(space.n_modes):
        top = np.take(probs, [-2, -1], axis=k + 1)
        worst = max(worst, float(top.sum()))
    return worst


def rk4_step(stack: TermStack, t: float, psi: np.ndarray, h: float) -> np.ndarray:
    k1 = -1j * stack.apply(t, psi)
    k2 = -1j * stack.apply(t + h / 2, psi + h / 2 * k1)
    k3 = -1j * stack.apply(t + h / 2, psi + h / 2 * k2)
    k4 = -1j * stack.apply(t + h, psi + h * k3)
    return psi + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def propagate(
    initial: np.ndarray,
    terms: Sequence[HamiltonianTerm],
    t0: float,
    t1: float,
    step: float,
    sample_every: float,
    observables: Mapping[str, Callable[[np.ndarray], float]] | None = None,
    space: HilbertSpace | None = None,
    store_states: bool = False,
) -> Trajectory:
    """Integrate from ``t0`` to ``t1`` and sample ``observables`` on a uniform grid.

    The sample grid has spacing at most ``sample_every`` and always ends at
    ``t1``; each sample interval is split into equal RK4 steps no longer than
    ``step``. When ``space`` is given, populations in the top two Fock levels
    are monitored and the trajectory is flagged if they exceed 1e-4.
    """
    psi = np.array(initial, dtype=complex)
    dim = psi.size
    if not t1 > t0:
        raise InvalidConfigurationError("t1 must exceed t0")
    if not 0 < step <= sample_every:
        raise InvalidConfigurationError("need 0 < step <= sample_every")
    stack = TermStack(terms, dim)
    check_step(stack, step)

    n_samples = math.ceil((t1 - t0) / sample_every - 1e-9)
    times = np.linspace(t0, t1, n_samples + 1)
    substeps = math.ceil((times[1] - times[0]) / step - 1e-9)
    h = (times[1] - times[0]) / substeps

    observables = dict(observables or {})
    values = {name: np.empty(times.size) for name in observables}
    states = np.empty((times.size, dim), dtype=complex) if store_states else None
    norm0 = np.linalg.norm(psi)
    drift = 0.0
    worst_top = 0.0

    for j, t_sample in enumerate(times):
        if j > 0:
            t = times[j - 1]
            for s in range(substeps):
                psi = rk4_step(stack, t + s * h, psi, h)
        for name, fn in observables.items():
            values[name][j] = fn(psi)
        if store_states:
            states[j] = psi
        drift = max(drift, abs(np.linalg.norm(psi) - norm0))
        if space is not None:
            worst_top = max(worst_top, saturation(space, psi))

    traj = Trajectory(times=times, observables=values, states=states, final_state=psi, norm_drift=drift)
    if worst_top > SATURATION_THRESHOLD:
        msg = (
            f"cutoff saturation: top two Fock levels hold population {worst_top:.3g} "
            f"(> {SATURATION_THRESHOLD}); raise the boson cutoff"
        )
        traj.saturated = True
        traj.warnings.append(msg)
        warnings.warn(msg, CutoffSaturationWarning, stacklevel=2)
    return traj


def expectation(state: np.ndarray, op) -> float:
    """``<psi|op|psi>`` for Hermitian ``op``."""
    if not is_hermitian(op):
        raise InvalidConfigurationError("expectation value requested for a non-Hermitian operator")
    value = np.vdot(state, op @ state)
    if abs(value.imag) >= 1e-10:
        raise ArithmeticError(f"imaginary residue {value.imag:.3g} in a Hermitian expectation value")
    return float(value.real)
