"""Run the four presets, print headline numbers, and leave CSVs under results/.

    python scripts/reproduce_fig3.py [--out results] [--plot]
"""
import argparse
import subprocess
import sys
from pathlib import Path

from ionqft.observables import pop_name
from ionqft.scenarios import run_scenario

p = argparse.ArgumentParser()
p.add_argument("--out", default="results")
p.add_argument("--plot", action="store_true", help="also execute each plot.script (needs matplotlib)")
args = p.parse_args()

for name in ("fig3a", "fig3b", "fig3c", "fig3d"):
    result = run_scenario(name, out_dir=Path(args.out) / name)
    traj = result.trajectory
    n = traj.observables["mean_boson[0]"]
    pair_vacuum = pop_name(4, (0,) * len(result.config.boson_cutoffs))
    line = f"{name}: peak n0={n.max():.4f} final n0={n[-1]:.4f} final P(4,vac)={result.summary[pair_vacuum]:.4f}"
    if "pop_vac_indirect" in traj.observables:
        line += f" final P(2,0,0)={result.summary['pop_vac_indirect']:.4f}"
    if "dyson_max_deviation" in result.summary:
        line += f" max|dyson-exact|={result.summary['dyson_max_deviation']:.3g}"
    line += f" MLE n0={result.summary['mle_mean_boson[0]']:.3f}"
    print(line)
    for w in result.warnings:
        print(f"  warning: {w}", file=sys.stderr)
    if args.plot:
        subprocess.run([sys.executable, str(Path(args.out) / name / "plot.script")], check=True)
