"""Trapped-ion simulation of fermion/antifermion scattering mediated by boson modes."""
from .basis import BasisLabel, HilbertSpace, InvalidConfigurationError, build_space
from .dyson import DysonResult, compare, dyson_evolve
from .model import HamiltonianTerm, ScenarioConfig, build_hamiltonian, envelope_value, evaluate_hamiltonian
from .propagator import Trajectory, expectation, propagate
from .scenarios import PRESETS, preset, run_scenario, sweep

__version__ = "0.1.0"
