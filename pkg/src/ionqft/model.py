"""Interaction-picture Hamiltonian of a fermion/antifermion pair coupled to boson modes.

In the register basis of :mod:`ionqft.basis` the Hamiltonian reads::

    H(t) = g1 (|1><1| + 2|2><2| + |4><4|) a_k exp(-i w_k t)
         - g(t) |1><4| a_0^dag exp(-i delta t)
         - g(t) |1><4| a_0 exp(-i (2 w_0 + delta) t)      + h.c.

    g(t) = g2 exp(-(t - T/2)^2 / (2 sigma_t^2))

The displacement term is repeated for every boson mode ``k``; the pair terms
act on mode 0 only.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp

from .basis import (
    BasisLabel,
    HilbertSpace,
    InvalidConfigurationError,
    boson_annihilation,
    boson_creation,
    level_transition,
)

ION_OP_LABELS = ("displacement", "red-sideband", "blue-sideband", "h.c.-partner")

TWO_PI = 2 * np.pi


@dataclass
class ScenarioConfig:
    """Physical and numerical parameters of one simulation run.

    Frequencies are in units of ``omega0`` and times in units of ``1/omega0``.
    ``T`` defaults to ``6 * sigma_t`` and ``t_final`` to ``T``; call
    :meth:`resolved` to materialise every default.
    """

    g1: float = 0.1
    g2: float = 0.0
    omega0: float = 1.0
    omega_modes: Optional[list[float]] = None
    delta: float = 0.0
    sigma_t: float = 3.0
    T: Optional[float] = None
    t_final: Optional[float] = None
    boson_cutoffs: list[int] = field(default_factory=lambda: [15])
    initial_state: BasisLabel = field(default_factory=lambda: BasisLabel(2, (0,)))
    integrator_step: Optional[float] = None
    sample_every: Optional[float] = None
    dyson_order: int = 6
    dyson_nodes: int = 200
    run_dyson: bool = False
    rng_seed: int = 0
    shots: int = 200
    misclassification: float = 0.0

    def resolved(self) -> "ScenarioConfig":
        """Copy with all ``None`` defaults filled in, validated."""
        cfg = dataclasses.replace(self)
        cfg.boson_cutoffs = [int(c) for c in cfg.boson_cutoffs]
        if cfg.omega_modes is None:
            cfg.omega_modes = [cfg.omega0] * len(cfg.boson_cutoffs)
        cfg.omega_modes = [float(w) for w in cfg.omega_modes]
        if cfg.T is None:
            cfg.T = 6.0 * cfg.sigma_t
        if cfg.t_final is None:
            cfg.t_final = cfg.T
        if cfg.integrator_step is None:
            cfg.integrator_step = TWO_PI / (cfg.omega0 * 1000)
        if cfg.sample_every is None:
            cfg.sample_every = TWO_PI / (cfg.omega0 * 100)
        cfg.validate()
        return cfg

    def validate(self):
        if self.g1 < 0 or self.g2 < 0:
            raise InvalidConfigurationError("couplings g1, g2 must be non-negative")
        if self.omega0 <= 0:
            raise InvalidConfigurationError("omega0 must be positive")
        for name in ("sigma_t", "T", "t_final", "integrator_step", "sample_every"):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise InvalidConfigurationError(f"{name} must be positive, got {value}")
        if self.omega_modes is not None and len(self.omega_modes) != len(self.boson_cutoffs):
            raise InvalidConfigurationError(
                f"{len(self.omega_modes)} mode frequencies for {len(self.boson_cutoffs)} boson cutoffs"
            )
        if len(self.initial_state.occupations) != len(self.boson_cutoffs):
            raise InvalidConfigurationError("initial_state occupations do not match the number of modes")
        if self.dyson_order < 0 or self.dyson_nodes < 10:
            raise InvalidConfigurationError("dyson_order must be >= 0 and dyson_nodes >= 10")
        if self.shots < 1:
            raise InvalidConfigurationError("shots must be >= 1")
        if not 0 <= self.misclassification <= 1:
            raise InvalidConfigurationError("misclassification must lie in [0, 1]")


@dataclass(frozen=True)
class Envelope:
    """Unit-height Gaussian ``exp(-(t - center)^2 / (2 width^2))``."""

    center: float
    width: float

    def __call__(self, t):
        return np.exp(-((np.asarray(t, dtype=float) - self.center) ** 2) / (2 * self.width**2))


@dataclass(frozen=True)
class HamiltonianTerm:
    """``amplitude * envelope(t) * exp(-i frequency t) * operator``."""

    operator: sp.csr_array
    amplitude: complex
    frequency: float
    envelope: Optional[Envelope] = None
    ion_op_label: str = "displacement"

    def coefficient(self, t):
        c = self.amplitude * np.exp(-1j * self.frequency * np.asarray(t, dtype=float))
        if self.envelope is not None:
            c = c * self.envelope(t)
        return c

    def max_abs_coefficient(self) -> float:
        return abs(self.amplitude)

    def hc(self) -> "HamiltonianTerm":
        return HamiltonianTerm(
            operator=sp.csr_array(self.operator.conj().T),
            amplitude=np.conj(self.amplitude),
            frequency=-self.frequency,
            envelope=self.envelope,
            ion_op_label="h.c.-partner",
        )


def envelope_value(t, cfg: ScenarioConfig):
    """Pair-creation coupling ``g(t) = g2 exp(-(t - T/2)^2 / (2 sigma_t^2))``."""
    T = cfg.T if cfg.T is not None else 6.0 * cfg.sigma_t
    return cfg.g2 * Envelope(T / 2, cfg.sigma_t)(t)


def _check_space(cfg: ScenarioConfig, space: HilbertSpace):
    if list(space.boson_cutoffs) != [int(c) for c in cfg.boson_cutoffs]:
        raise InvalidConfigurationError(
            f"space cutoffs {list(space.boson_cutoffs)} do not match config {list(cfg.boson_cutoffs)}"
        )


def build_hamiltonian(cfg: ScenarioConfig, space: HilbertSpace) -> list[HamiltonianTerm]:
    cfg = cfg.resolved()
    _check_space(cfg, space)
    terms: list[HamiltonianTerm] = []

    if cfg.g1 != 0:
        weights = level_transition(space, 1, 1) + 2 * level_transition(space, 2, 2) + level_transition(space, 4, 4)
        for k, omega_k in enumerate(cfg.omega_modes):
            op = sp.csr_array(weights @ boson_annihilation(space, k))
            term = HamiltonianTerm(op, cfg.g1, omega_k, None, "displacement")
            terms += [term, term.hc()]

    if cfg.g2 != 0:
        env = Envelope(cfg.T / 2, cfg.sigma_t)
        flip = level_transition(space, 1, 4)
        red = HamiltonianTerm(
            sp.csr_array(flip @ boson_creation(space, 0)), -cfg.g2, cfg.delta, env, "red-sideband"
        )
        blue = HamiltonianTerm(
            sp.csr_array(flip @ boson_annihilation(space, 0)),
            -cfg.g2,
            2 * cfg.omega_modes[0] + cfg.delta,
            env,
            "blue-sideband",
        )
        terms += [red, red.hc(), blue, blue.hc()]

    return terms


def evaluate_hamiltonian(terms: Sequence[HamiltonianTerm], t: float, dim: int | None = None) -> sp.csr_array:
    """Instantiate ``H(t)`` as a sparse matrix.

    ``dim`` is only needed when ``terms`` is empty (zero Hamiltonian).
    """
    if not terms:
        if dim is None:
            raise InvalidConfigurationError("an empty term list needs an explicit dimension")
        return sp.csr_array((dim, dim), dtype=complex)
    H = sum(complex(term.coefficient(t)) * term.operator for term in terms)
    return sp.csr_array(H)


def hermitian_part_is_exact(terms: Sequence[HamiltonianTerm]) -> bool:
    """Every term must have a partner with conjugate amplitude and operator and opposite frequency."""
    unmatched = list(range(len(terms)))
    while unmatched:
        i = unmatched.pop(0)
        a = terms[i]
        for j in unmatched:
            b = terms[j]
            same_env = a.envelope == b.envelope
            if (
                same_env
                and b.frequency == -a.frequency
                and b.amplitude == np.conj(a.amplitude)
                and (a.operator.conj().T != b.operator).nnz == 0
            ):
                unmatched.remove(j)
                break
        else:
            # a term may be its own partner (Hermitian operator, real coefficient)
            if not (a.frequency == 0 and np.isreal(a.amplitude) and (a.operator.conj().T != a.operator).nnz == 0):
                return False
    return True
