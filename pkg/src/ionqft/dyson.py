"""Finite-order Dyson series on a uniform time grid.

The order-k correction obeys ``psi_k(t) = -i int_0^t H(t') psi_{k-1}(t') dt'``
with ``psi_0(t) = psi(0)``. Each integral is a cumulative composite trapezoid
over the same grid, so order k costs one pass of ``H(t_j) psi_{k-1}(t_j)``.
Observables are evaluated on the unnormalised partial sums; a failing series
shows up as unphysical values instead of being hidden by renormalisation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from .basis import InvalidConfigurationError
from .model import HamiltonianTerm
from .propagator import TermStack, Trajectory


@dataclass
class DysonResult:
    order: int
    times: np.ndarray
    # partial_sums[k][name] is the observable on sum_{j<=k} psi_j
    partial_sums: list[dict[str, np.ndarray]]
    corrections: Optional[np.ndarray] = None
    deviation_from_exact: Optional[np.ndarray] = None

    def observable(self, name: str, order: int | None = None) -> np.ndarray:
        order = self.order if order is None else order
        try:
            return self.partial_sums[order][name]
        except KeyError:
            raise InvalidConfigurationError(f"unknown observable {name!r}") from None

    def state(self, order: int | None = None) -> np.ndarray:
        """Truncated state on the grid, shape ``(n_times, dim)``; needs ``keep_corrections``."""
        if self.corrections is None:
            raise ValueError("corrections were not kept; rerun with keep_corrections=True")
        order = self.order if order is None else order
        return self.corrections[: order + 1].sum(axis=0)


def dyson_grid(t1: float, nodes: int, omega0: float = 1.0) -> np.ndarray:
    """Uniform grid on [0, t1] with at least ``nodes`` points per period ``2 pi / omega0``."""
    spacing = 2 * np.pi / (omega0 * nodes)
    n = math.ceil(t1 / spacing - 1e-9)
    return np.linspace(0.0, t1, n + 1)


def dyson_evolve(
    initial: np.ndarray,
    terms: Sequence[HamiltonianTerm],
    order: int,
    nodes: int,
    t1: float,
    observables: Mapping[str, Callable[[np.ndarray], float]] | None = None,
    omega0: float = 1.0,
    keep_corrections: bool = False,
) -> DysonResult:
    """Dyson partial sums through ``order`` on a grid of ``nodes`` points per ``2 pi / omega0``.

    Parameters
    ----------
    initial : ndarray
        State at ``t = 0``.
    terms : sequence of HamiltonianTerm
        Interaction-picture Hamiltonian.
    order : int
        Highest order kept. Order 0 returns the constant initial state.
    nodes : int
        Quadrature points per period of the reference frequency, at least 10.
    t1 : float
        End of the integration window.
    observables : mapping, optional
        Functions of the (unnormalised) state vector evaluated on every partial sum.
    """
    if order < 0:
        raise InvalidConfigurationError("order must be >= 0")
    if nodes < 10:
        raise InvalidConfigurationError("nodes must be >= 10")
    if not t1 > 0:
        raise InvalidConfigurationError("t1 must be positive")
    psi0 = np.asarray(initial, dtype=complex)
    stack = TermStack(terms, psi0.size)
    times = dyson_grid(t1, nodes, omega0)
    h = np.diff(times)

    corrections = np.empty((order + 1, times.size, psi0.size), dtype=complex)
    corrections[0] = psi0
    for k in range(1, order + 1):
        f = -1j * stack.apply_many(times, corrections[k - 1])
        corrections[k, 0] = 0.0
        corrections[k, 1:] = np.cumsum(0.5 * h[:, None] * (f[:-1] + f[1:]), axis=0)

    observables = dict(observables or {})
    partial = np.zeros((times.size, psi0.size), dtype=complex)
    partial_sums = []
    for k in range(order + 1):
        partial += corrections[k]
        partial_sums.append(
            {name: np.array([fn(psi) for psi in partial]) for name, fn in observables.items()}
        )
    return DysonResult(
        order=order,
        times=times,
        partial_sums=partial_sums,
        corrections=corrections if keep_corrections else None,
    )


def compare(dyson: DysonResult, exact: Trajectory, observable: str, order: int | None = None) -> np.ndarray:
    """Pointwise ``|dyson - exact|`` on the Dyson grid.

    The exact trajectory is linearly interpolated onto the Dyson times when
    the grids differ. The result is also stored on ``dyson.deviation_from_exact``
    when comparing the top order.
    """
    if observable not in exact.observables:
        raise InvalidConfigurationError(f"unknown observable {observable!r} in exact trajectory")
    approx = dyson.observable(observable, order)
    if exact.times.shape == dyson.times.shape and np.array_equal(exact.times, dyson.times):
        reference = exact.observables[observable]
    else:
        reference = np.interp(dyson.times, exact.times, exact.observables[observable])
    deviation = np.abs(approx - reference)
    if order is None or order == dyson.order:
        dyson.deviation_from_exact = deviation
    return deviation
