import dataclasses

import numpy as np
import pytest

from ionqft.basis import build_space
from ionqft.model import build_hamiltonian
from ionqft.scenarios import preset, simulate

# criterion number -> (passed, message); filled by test_acceptance
ACCEPTANCE_RESULTS = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS):
        ok, msg = ACCEPTANCE_RESULTS[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {key}: {msg}")


def setup(name, **changes):
    """Resolved preset config, its space, Hamiltonian terms and initial state."""
    cfg = dataclasses.replace(preset(name), **changes).resolved()
    space = build_space(cfg.boson_cutoffs)
    terms = build_hamiltonian(cfg, space)
    return cfg, space, terms, space.basis_state(cfg.initial_state)


@pytest.fixture(scope="session")
def preset_runs():
    """Exact runs of every preset at default numerical settings, computed once."""
    return {name: simulate(preset(name)) for name in ("fig3a", "fig3b", "fig3c", "fig3d")}


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)
