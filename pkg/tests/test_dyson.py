import dataclasses

import numpy as np
import pytest

from ionqft.basis import BasisLabel, InvalidConfigurationError, build_space
from ionqft.dyson import compare, dyson_evolve, dyson_grid
from ionqft.model import build_hamiltonian
from ionqft.observables import standard_observables
from ionqft.propagator import Trajectory, propagate
from ionqft.scenarios import preset

from conftest import setup

OBS = "mean_boson[0]"


def exact_on_grid(cfg, space, terms, psi0, times):
    """Exact trajectory sampled on the Dyson grid so no interpolation enters the comparison."""
    return propagate(
        psi0, terms, 0.0, times[-1], cfg.integrator_step, times[1] - times[0],
        standard_observables(space, [OBS]), space=space,
    )


def dyson_and_exact(name, order=6, nodes=200, **changes):
    cfg, space, terms, psi0 = setup(name, **changes)
    dy = dyson_evolve(psi0, terms, order, nodes, cfg.t_final, standard_observables(space, [OBS]))
    exact = exact_on_grid(cfg, space, terms, psi0, dy.times)
    assert np.allclose(exact.times, dy.times, rtol=0, atol=1e-12)
    return cfg, dy, exact


def test_order_zero_is_constant():
    cfg, space, terms, psi0 = setup("fig3c")
    dy = dyson_evolve(psi0, terms, 0, 50, cfg.t_final, keep_corrections=True)
    assert len(dy.partial_sums) == 1
    assert np.all(dy.state(0) == psi0)


def test_partial_sums_length():
    cfg, space, terms, psi0 = setup("fig3a")
    dy = dyson_evolve(psi0, terms, 4, 20, 3.0, standard_observables(space, [OBS]))
    assert len(dy.partial_sums) == 5


def test_grid_density():
    times = dyson_grid(18.0, 200)
    assert times[-1] == 18.0
    assert times[1] - times[0] <= 2 * np.pi / 200


def test_first_order_amplitude_matches_integral():
    # -i 2 g1 int_0^t e^{i t'} dt' = -(2 g1)(e^{it} - 1) on |2, n=1>
    cfg, space, terms, psi0 = setup("fig3a")
    dy = dyson_evolve(psi0, terms, 1, 200, cfg.t_final, keep_corrections=True)
    amp = dy.corrections[1][:, space.index(BasisLabel(2, (1,)))]
    analytic = -(2 * cfg.g1) * (np.exp(1j * dy.times) - 1)
    assert np.max(np.abs(amp - analytic)) < 1e-4


@pytest.mark.parametrize("lam", [0.5])
def test_order_k_scales_as_lambda_k(lam):
    cfg, space, terms, psi0 = setup("fig3c", boson_cutoffs=[8])
    scaled_cfg, _, scaled_terms, _ = setup("fig3c", boson_cutoffs=[8], g1=lam * 0.01, g2=lam * 0.21)
    ref = dyson_evolve(psi0, terms, 5, 50, cfg.t_final, keep_corrections=True)
    low = dyson_evolve(psi0, scaled_terms, 5, 50, cfg.t_final, keep_corrections=True)
    for k in range(1, 6):
        a, b = low.corrections[k], lam**k * ref.corrections[k]
        assert np.max(np.abs(a - b)) <= 1e-3 * np.max(np.abs(b))


def test_perturbative_preset_agrees_with_exact():
    cfg, dy, exact = dyson_and_exact("fig3c")
    assert np.max(compare(dy, exact, OBS)) < 0.02


def test_convergence_with_order_in_perturbative_regime():
    cfg, dy, exact = dyson_and_exact("fig3c", order=8)
    dev = [compare(dy, exact, OBS, order=k).max() for k in range(9)]
    # the bosonic signal is carried by odd orders: steps of two shrink strictly
    for k in range(1, 7):
        assert dev[k + 2] < dev[k]
    # order 1 overshoots (pulse area squared > 1), so monotonicity starts there; an extra
    # even order may add a small counter-rotating two-boson contribution
    for k in range(1, 8):
        assert dev[k + 1] <= dev[k] + 1e-3


@pytest.mark.parametrize("name", ["fig3a", "fig3b", "fig3c"])
def test_node_refinement_perturbative(name):
    cfg, space, terms, psi0 = setup(name)
    obs = standard_observables(space, [OBS])
    coarse = dyson_evolve(psi0, terms, 6, 200, cfg.t_final, obs)
    fine = dyson_evolve(psi0, terms, 6, 400, cfg.t_final, obs)
    # the fine grid contains every coarse node
    assert np.allclose(fine.times[::2], coarse.times, atol=1e-12)
    assert np.max(np.abs(fine.observable(OBS)[::2] - coarse.observable(OBS))) < 1e-3


def test_node_refinement_nonperturbative_relative():
    # the truncated series grows to ~1e6 here, so refinement is judged relative to its size
    cfg, space, terms, psi0 = setup("fig3d")
    obs = standard_observables(space, [OBS])
    coarse = dyson_evolve(psi0, terms, 6, 200, cfg.t_final, obs).observable(OBS)
    fine = dyson_evolve(psi0, terms, 6, 400, cfg.t_final, obs).observable(OBS)[::2]
    assert np.max(np.abs(fine - coarse)) < 1e-3 * np.max(np.abs(fine))


def test_nonperturbative_divergence():
    cfg, dy, exact = dyson_and_exact("fig3d")
    dev = compare(dy, exact, OBS)
    late = dy.times > cfg.T / 2 - cfg.sigma_t
    assert dev[late].max() > 0.5
    assert dy.deviation_from_exact is dev


def test_compare_identical_is_zero():
    cfg, space, terms, psi0 = setup("fig3a")
    dy = dyson_evolve(psi0, terms, 2, 50, 3.0, standard_observables(space, [OBS]))
    fake = Trajectory(times=dy.times, observables={OBS: dy.observable(OBS)})
    assert np.all(compare(dy, fake, OBS) == 0)
    with pytest.raises(InvalidConfigurationError):
        compare(dy, fake, "pop[9,0]")


def test_compare_interpolates_other_grids():
    cfg, space, terms, psi0 = setup("fig3a")
    dy = dyson_evolve(psi0, terms, 6, 200, cfg.t_final, standard_observables(space, [OBS]))
    coarse = Trajectory(times=dy.times[::4], observables={OBS: dy.observable(OBS)[::4]})
    dev = compare(dy, coarse, OBS)
    assert dev.shape == dy.times.shape
    assert np.all(dev[::4] == 0)


def test_invalid_arguments():
    cfg, space, terms, psi0 = setup("fig3a")
    with pytest.raises(InvalidConfigurationError):
        dyson_evolve(psi0, terms, 2, 5, 1.0)
    with pytest.raises(InvalidConfigurationError):
        dyson_evolve(psi0, terms, -1, 50, 1.0)
