"""Emulated sideband readout and maximum-likelihood Fock-state reconstruction."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .basis import HilbertSpace, InvalidConfigurationError, N_LEVELS

SidebandKind = Literal["blue", "red", "carrier"]

DEFAULT_TIMES = np.arange(0.0, 251.0)
# one base Rabi period spans 20 points of the default 1-step sweep
DEFAULT_BASE_RABI = 2 * np.pi / 20
DEFAULT_SHOTS = 200

MLE_TOL = 1e-10
MLE_MAX_ITER = 100_000


class NonIdentifiableError(ValueError):
    """The likelihood is flat along some direction of the probability simplex."""


@dataclass(frozen=True)
class FockDistribution:
    probabilities: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise InvalidConfigurationError("Fock distribution must be a non-empty vector")
        if np.any(p < 0) or abs(p.sum() - 1) > 1e-9:
            raise InvalidConfigurationError(f"not a probability vector: sum={p.sum()!r}, min={p.min()!r}")
        object.__setattr__(self, "probabilities", p)

    @property
    def n_max(self) -> int:
        return self.probabilities.size - 1

    def mean(self) -> float:
        return float(np.dot(np.arange(self.probabilities.size), self.probabilities))

    @classmethod
    def from_unnormalised(cls, weights) -> "FockDistribution":
        w = np.clip(np.asarray(weights, dtype=float), 0, None)
        return cls(w / w.sum())


@dataclass
class SidebandRecord:
    """Bright counts per probe time.

    ``bright_counts`` holds integers for sampled records; noiseless records
    from :func:`expected_record` carry the exact expected (fractional) counts.
    """

    times: np.ndarray
    kind: SidebandKind
    bright_counts: np.ndarray
    shots_per_point: int = DEFAULT_SHOTS

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.bright_counts = np.asarray(self.bright_counts)
        if self.times.shape != self.bright_counts.shape:
            raise InvalidConfigurationError("times and bright_counts differ in length")
        if self.times.size and np.any(np.diff(self.times) <= 0):
            raise InvalidConfigurationError("record times must be strictly increasing")
        if np.any(self.bright_counts < 0) or np.any(self.bright_counts > self.shots_per_point):
            raise InvalidConfigurationError("bright counts must lie in [0, shots]")

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["time", "bright_count", "shots"])
            for t, c in zip(self.times, self.bright_counts):
                writer.writerow([f"{t:.12g}", f"{c:.12g}", self.shots_per_point])

    @classmethod
    def from_csv(cls, path, kind: SidebandKind = "blue") -> "SidebandRecord":
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        shots = {int(r["shots"]) for r in rows} or {DEFAULT_SHOTS}
        if len(shots) != 1:
            raise InvalidConfigurationError("a record must use one shot count for every point")
        counts = np.array([float(r["bright_count"]) for r in rows])
        if np.all(counts == np.round(counts)):
            counts = counts.astype(int)
        return cls(np.array([float(r["time"]) for r in rows]), kind, counts, shots.pop())


def rabi_frequencies(kind: SidebandKind, base_rabi: float, n_max: int) -> np.ndarray:
    n = np.arange(n_max + 1)
    if kind == "blue":
        return base_rabi * np.sqrt(n + 1)
    if kind == "red":
        return base_rabi * np.sqrt(n)
    if kind == "carrier":
        return np.full(n_max + 1, float(base_rabi))
    raise InvalidConfigurationError(f"unknown sideband kind {kind!r}")


def signal_basis(kind: SidebandKind, base_rabi: float, times, n_max: int, misclassification: float = 0.0) -> np.ndarray:
    """``B[t, n]``: bright probability at time ``t`` for Fock state ``n``."""
    if not base_rabi > 0:
        raise InvalidConfigurationError("base_rabi must be positive")
    omega = rabi_frequencies(kind, base_rabi, n_max)
    basis = np.sin(np.outer(np.asarray(times, dtype=float), omega) / 2) ** 2
    if misclassification:
        basis = misclassification + (1 - 2 * misclassification) * basis
    return basis


def sideband_signal(dist: FockDistribution, kind: SidebandKind, base_rabi: float, times, misclassification: float = 0.0) -> np.ndarray:
    """Bright probability ``sum_n p_n sin^2(Omega_n t / 2)``."""
    return signal_basis(kind, base_rabi, times, dist.n_max, misclassification) @ dist.probabilities


def sample_shots(signal, shots: int, seed: int, times=None, kind: SidebandKind = "blue") -> SidebandRecord:
    """Binomial bright counts per point from a generator seeded with ``seed``."""
    if shots < 1:
        raise InvalidConfigurationError("shots must be >= 1")
    signal = np.clip(np.asarray(signal, dtype=float), 0.0, 1.0)
    times = np.arange(signal.size, dtype=float) if times is None else times
    rng = np.random.default_rng(seed)
    counts = rng.binomial(shots, signal)
    return SidebandRecord(times, kind, counts, shots)


def expected_record(signal, shots: int, times=None, kind: SidebandKind = "blue") -> SidebandRecord:
    """Noiseless record: counts equal to ``shots * signal`` exactly."""
    signal = np.asarray(signal, dtype=float)
    times = np.arange(signal.size, dtype=float) if times is None else times
    return SidebandRecord(times, kind, shots * signal, shots)


def log_likelihood(counts, shots, prob) -> float:
    prob = np.asarray(prob)
    with np.errstate(divide="ignore", invalid="ignore"):
        bright = np.where(counts > 0, counts * np.log(prob), 0.0)
        dark = np.where(shots - counts > 0, (shots - counts) * np.log1p(-prob), 0.0)
    return float(np.sum(bright + dark))


def _em_update(p, basis, counts, shots):
    prob = basis @ p
    with np.errstate(divide="ignore", invalid="ignore"):
        w_bright = np.where(counts > 0, counts / prob, 0.0)
        w_dark = np.where(shots - counts > 0, (shots - counts) / (1 - prob), 0.0)
    new = p * (basis.T @ w_bright + (1 - basis).T @ w_dark) / (shots * counts.size)
    return new / new.sum()


def _check_identifiable(basis: np.ndarray):
    n_max = basis.shape[1] - 1
    # mixtures are affine in p, so the columns must be affinely independent
    directions = basis[:, 1:] - basis[:, :1]
    sv = np.linalg.svd(directions, compute_uv=False)
    rank = int(np.sum(sv > 1e-9 * max(1.0, sv.max(initial=0.0))))
    if rank < n_max:
        raise NonIdentifiableError(
            f"likelihood is flat: signal basis has affine rank {rank} < n_max={n_max} "
            f"(singular values {np.array2string(sv, precision=3)}); "
            "use more or later probe times, or lower n_max"
        )


def mle_fit(
    record: SidebandRecord,
    base_rabi: float,
    n_max: int,
    misclassification: float = 0.0,
    tol: float = MLE_TOL,
    max_iter: int = MLE_MAX_ITER,
) -> FockDistribution:
    """Maximum-likelihood Fock distribution from a sideband time scan.

    Maximises ``sum_t c_t ln P_t + (N - c_t) ln(1 - P_t)`` over the simplex by
    expectation-maximisation (multiplicative updates that stay on the
    simplex), with SQUAREM extrapolation to speed up the linear tail. Stops
    when an iteration gains less than ``tol`` in log-likelihood.
    """
    if n_max < 1:
        raise InvalidConfigurationError("n_max must be >= 1")
    if record.times.size == 0:
        raise InvalidConfigurationError("empty sideband record")
    counts = np.asarray(record.bright_counts, dtype=float)
    shots = float(record.shots_per_point)
    basis = signal_basis(record.kind, base_rabi, record.times, n_max, misclassification)
    _check_identifiable(basis)

    def ll(q):
        return log_likelihood(counts, shots, basis @ q)

    p = np.full(n_max + 1, 1.0 / (n_max + 1))
    current = ll(p)
    for _ in range(max_iter):
        p1 = _em_update(p, basis, counts, shots)
        p2 = _em_update(p1, basis, counts, shots)
        r = p1 - p
        v = p2 - 2 * p1 + p
        candidate = p2
        if np.dot(v, v) > 0:
            alpha = -np.sqrt(np.dot(r, r) / np.dot(v, v))
            while alpha < -1:
                trial = p - 2 * alpha * r + alpha**2 * v
                if np.all(trial >= 0):
                    trial = _em_update(trial / trial.sum(), basis, counts, shots)
                    if ll(trial) >= ll(p2):
                        candidate = trial
                        break
                alpha = (alpha - 1) / 2
        new = ll(candidate)
        gain = new - current
        p, current = candidate, new
        if gain < tol:
            break
    return FockDistribution.from_unnormalised(p)


def vacuum_zero_population_protocol(space: HilbertSpace, state, misclassification: float = 0.0) -> float:
    """Emulate the four-step readout of the ``|1, n=0>`` population.

    1. detection collapses the register; the dark (level 1) branch is kept
    2. a uniform red sideband moves ``|1, n>`` to ``|3, n-1>`` for ``n >= 1``
    3. a carrier pulse swaps levels 1 and 3
    4. detection returns the bright population, which is the original ``|1, 0>`` weight
    """
    if space.n_modes != 1:
        raise InvalidConfigurationError(
            "single-mode protocol; for two modes use the sequential readout with indirect_vacuum_mode_population"
        )
    amp = space.grid(np.asarray(state, dtype=complex))
    # 1: keep the dark branch, unnormalised so weights stay absolute probabilities
    dark = np.zeros_like(amp)
    dark[0] = amp[0]
    # 2: uniform red sideband, |1,n> -> |3,n-1>
    after_red = np.zeros_like(dark)
    after_red[0, 0] = dark[0, 0]
    after_red[2, :-1] = dark[0, 1:]
    # 3: carrier swap of levels 1 and 3
    swapped = after_red[[2, 1, 0, 3]]
    # 4: bright = every level except 1
    probs = np.abs(swapped) ** 2
    bright = float(probs[1:N_LEVELS].sum())
    dark_total = float(probs[0].sum())
    return (1 - misclassification) * bright + misclassification * dark_total
