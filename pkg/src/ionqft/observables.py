"""Named observables on state vectors.

Column names used in CSV output:

``mean_boson[k]``
    mean occupation of boson mode ``k``
``pop[level,c_1,...,c_M]``
    population of ``level`` with per-mode Fock constraints; ``c`` is an
    integer ``n`` (exactly n), ``*`` (any) or ``!n`` (anything but n)
``pop_vac_indirect``
    ``|2, n_x=0, n_y=0>`` population from the two-mode set relation
"""
from __future__ import annotations

import re
from typing import Callable, Sequence, Union

import numpy as np

from .basis import HilbertSpace, InvalidConfigurationError, N_LEVELS

ANY = "*"
Constraint = Union[int, str]

_POP_NAME = re.compile(r"^pop\[(\d+),([^\]]+)\]$")
_MEAN_NAME = re.compile(r"^mean_boson\[(\d+)\]$")


def _probabilities(space: HilbertSpace, state) -> np.ndarray:
    psi = np.asarray(state)
    if psi.shape != (space.dim,):
        raise InvalidConfigurationError(f"state of shape {psi.shape} does not fit a space of dimension {space.dim}")
    return space.grid(np.abs(psi) ** 2)


def mean_boson_number(space: HilbertSpace, state, mode: int) -> float:
    """``<a_k^dag a_k>``; ``state`` need not be normalised."""
    if not 0 <= mode < space.n_modes:
        raise InvalidConfigurationError(f"mode {mode} outside 0..{space.n_modes - 1}")
    probs = _probabilities(space, state)
    other = tuple(ax for ax in range(probs.ndim) if ax != mode + 1)
    marginal = probs.sum(axis=other)
    return float(np.dot(np.arange(marginal.size), marginal))


def _mode_mask(constraint: Constraint, cutoff: int) -> np.ndarray:
    n = np.arange(cutoff + 1)
    if constraint == ANY:
        return np.ones(cutoff + 1, dtype=bool)
    if isinstance(constraint, str) and constraint.startswith("!"):
        value = int(constraint[1:])
        mask = n != value
    else:
        value = int(constraint)
        mask = n == value
    if not 0 <= value <= cutoff:
        raise InvalidConfigurationError(f"Fock constraint {constraint!r} outside 0..{cutoff}")
    return mask


def parse_constraint(text: str) -> Constraint:
    text = text.strip()
    if text == ANY or text.startswith("!"):
        if text.startswith("!"):
            int(text[1:])
        return text
    try:
        return int(text)
    except ValueError:
        raise InvalidConfigurationError(f"invalid Fock constraint {text!r}") from None


def population(space: HilbertSpace, state, level: int, fock_pattern: Sequence[Constraint]) -> float:
    """Sum of ``|amplitude|^2`` over labels at ``level`` matching ``fock_pattern``."""
    if not 1 <= level <= N_LEVELS:
        raise InvalidConfigurationError(f"level {level} outside 1..{N_LEVELS}")
    if len(fock_pattern) != space.n_modes:
        raise InvalidConfigurationError(f"pattern has {len(fock_pattern)} entries, space has {space.n_modes} modes")
    probs = _probabilities(space, state)[level - 1]
    for ax, (c, cutoff) in enumerate(zip(fock_pattern, space.boson_cutoffs)):
        mask = _mode_mask(c, cutoff)
        probs = np.compress(mask, probs, axis=ax)
    return float(probs.sum())


def indirect_vacuum_mode_population(p_x0: float, p_x0_ynonzero: float) -> tuple[float, bool]:
    """``P(2, n_x=0, n_y=0) = P(2, n_x=0) - P(2, n_x=0, n_y != 0)``.

    Returns ``(value, clamped)``; shot noise can push the difference outside
    [0, 1], in which case it is clamped and ``clamped`` is True.
    """
    value = p_x0 - p_x0_ynonzero
    clamped_value = min(max(value, 0.0), 1.0)
    return clamped_value, clamped_value != value


def fock_distribution(space: HilbertSpace, state, mode: int = 0) -> np.ndarray:
    """Boson-number distribution of one mode with the register and other modes traced out."""
    probs = _probabilities(space, state)
    other = tuple(ax for ax in range(probs.ndim) if ax != mode + 1)
    return probs.sum(axis=other)


def pop_name(level: int, pattern: Sequence[Constraint]) -> str:
    return f"pop[{level},{','.join(str(c) for c in pattern)}]"


def observable_from_name(space: HilbertSpace, name: str) -> Callable[[np.ndarray], float]:
    """Resolve a CSV column name to a function of the state vector."""
    if name == "pop_vac_indirect":
        if space.n_modes != 2:
            raise InvalidConfigurationError("pop_vac_indirect needs exactly two boson modes")

        def indirect(psi):
            p_x0 = population(space, psi, 2, (0, ANY))
            p_x0_y = population(space, psi, 2, (0, "!0"))
            return indirect_vacuum_mode_population(p_x0, p_x0_y)[0]

        return indirect
    m = _MEAN_NAME.match(name)
    if m:
        mode = int(m.group(1))
        if not 0 <= mode < space.n_modes:
            raise InvalidConfigurationError(f"unknown observable {name!r}: mode out of range")
        return lambda psi: mean_boson_number(space, psi, mode)
    m = _POP_NAME.match(name)
    if m:
        level = int(m.group(1))
        pattern = tuple(parse_constraint(c) for c in m.group(2).split(","))
        # validate eagerly so bad names fail before a long run
        population(space, np.zeros(space.dim), level, pattern)
        return lambda psi: population(space, psi, level, pattern)
    raise InvalidConfigurationError(f"unknown observable {name!r}")


def standard_observable_names(space: HilbertSpace) -> list[str]:
    """Columns written for every scenario, in output order."""
    names = [f"mean_boson[{k}]" for k in range(space.n_modes)]
    vacuum = (0,) * space.n_modes
    names += [pop_name(level, vacuum) for level in range(1, N_LEVELS + 1)]
    names += [pop_name(level, (ANY,) * space.n_modes) for level in range(1, N_LEVELS + 1)]
    if space.n_modes == 2:
        names += [pop_name(2, (0, ANY)), pop_name(2, (0, "!0")), "pop_vac_indirect"]
    return names


def standard_observables(space: HilbertSpace, names: Sequence[str] | None = None) -> dict[str, Callable]:
    names = standard_observable_names(space) if names is None else names
    return {name: observable_from_name(space, name) for name in names}
