"""Max deviation of the order-N Dyson series from exact dynamics as the pair coupling grows.

    python scripts/dyson_breakdown.py [--order 6] [--sigma 3]
"""
import argparse
from dataclasses import replace

import numpy as np

from ionqft.basis import build_space
from ionqft.dyson import compare, dyson_evolve
from ionqft.model import build_hamiltonian
from ionqft.observables import standard_observables
from ionqft.propagator import propagate
from ionqft.scenarios import preset

p = argparse.ArgumentParser()
p.add_argument("--order", type=int, default=6)
p.add_argument("--sigma", type=float, default=3.0)
p.add_argument("--g2", type=float, nargs="*", default=[0.05, 0.1, 0.21, 0.3, 0.5, 0.75, 1.0])
args = p.parse_args()

print(f"{'g2':>6} {'pulse area':>10} {'max dev':>12}")
for g2 in args.g2:
    cfg = replace(preset("fig3c"), g2=g2, sigma_t=args.sigma, boson_cutoffs=[30]).resolved()
    space = build_space(cfg.boson_cutoffs)
    terms = build_hamiltonian(cfg, space)
    psi0 = space.basis_state(cfg.initial_state)
    obs = standard_observables(space, ["mean_boson[0]"])
    dy = dyson_evolve(psi0, terms, args.order, cfg.dyson_nodes, cfg.t_final, obs)
    exact = propagate(psi0, terms, 0, cfg.t_final, cfg.integrator_step, dy.times[1] - dy.times[0], obs, space=space)
    dev = compare(dy, exact, "mean_boson[0]")
    print(f"{g2:6.2f} {np.sqrt(2 * np.pi) * g2 * args.sigma:10.3f} {dev.max():12.4g}")
