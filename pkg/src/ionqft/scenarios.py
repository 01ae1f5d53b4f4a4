"""Scenario presets, the ``key = value`` config format, and the run/sweep drivers.

Config files are INI-style: one ``[section]`` per scenario, one ``key = value``
per line. Keys are the :class:`~ionqft.model.ScenarioConfig` field names; list
values are comma separated and ``initial_state`` is ``level,n_1,...,n_M``::

    [pair]
    g1 = 0.01
    g2 = 0.21
    sigma_t = 3.0
    boson_cutoffs = 15
    initial_state = 4,0

Unset keys take their defaults. ``scenario.resolved.cfg`` written by a run
lists every key, so feeding it back as a custom config reproduces the run.
"""
from __future__ import annotations

import configparser
import csv
import dataclasses
import io
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import measurement
from .basis import BasisLabel, InvalidConfigurationError, build_space
from .dyson import compare, dyson_evolve
from .model import ScenarioConfig, build_hamiltonian
from .observables import fock_distribution, standard_observable_names, standard_observables
from .propagator import Trajectory, propagate

PRESETS: dict[str, ScenarioConfig] = {
    # self-interaction, g1 = 0.1 branch
    "fig3a": ScenarioConfig(g1=0.1, g2=0.0, sigma_t=3.0, boson_cutoffs=[15], initial_state=BasisLabel(2, (0,))),
    # self-interaction with two modes, w = (w0, 0.9 w0)
    "fig3b": ScenarioConfig(
        g1=0.1,
        g2=0.0,
        sigma_t=3.0,
        omega_modes=[1.0, 0.9],
        boson_cutoffs=[15, 15],
        initial_state=BasisLabel(2, (0, 0)),
    ),
    # pair annihilation
    "fig3c": ScenarioConfig(g1=0.01, g2=0.21, sigma_t=3.0, boson_cutoffs=[15], initial_state=BasisLabel(4, (0,))),
    # nonperturbative pair process, with the order-6 Dyson comparison
    "fig3d": ScenarioConfig(
        g1=0.1, g2=1.0, sigma_t=4.0, boson_cutoffs=[30], initial_state=BasisLabel(4, (0,)), run_dyson=True
    ),
}
SCENARIOS = (*PRESETS, "custom")

DYSON_OBSERVABLE = "mean_boson[0]"
MLE_N_MAX = 8

_FLOAT = {"g1", "g2", "omega0", "delta", "sigma_t", "T", "t_final", "integrator_step", "sample_every", "misclassification"}
_INT = {"dyson_order", "dyson_nodes", "rng_seed", "shots"}
FIELDS = tuple(f.name for f in dataclasses.fields(ScenarioConfig))


class UnknownScenarioError(KeyError):
    pass


class OutputDirectoryError(OSError):
    pass


def preset(name: str) -> ScenarioConfig:
    try:
        return dataclasses.replace(PRESETS[name])
    except KeyError:
        raise UnknownScenarioError(f"unknown scenario {name!r}; choose from {', '.join(SCENARIOS)}") from None


def parse_value(key: str, text: str) -> Any:
    """Parse one config value according to the field it belongs to."""
    text = text.strip()
    if key not in FIELDS:
        raise InvalidConfigurationError(f"unknown config key {key!r}")
    if text.lower() in ("", "none") and key in ("T", "t_final", "integrator_step", "sample_every", "omega_modes"):
        return None
    try:
        if key in _FLOAT:
            return float(text)
        if key in _INT:
            return int(text)
        if key == "run_dyson":
            return {"true": True, "1": True, "yes": True, "false": False, "0": False, "no": False}[text.lower()]
        if key == "omega_modes":
            return [float(v) for v in text.split(",")]
        if key == "boson_cutoffs":
            return [int(v) for v in text.split(",")]
        if key == "initial_state":
            return BasisLabel.parse(text)
    except (ValueError, KeyError):
        raise InvalidConfigurationError(f"cannot parse {key} = {text!r}") from None
    raise InvalidConfigurationError(f"unhandled config key {key!r}")


def format_value(value: Any) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return ", ".join(format_value(v) for v in value)
    return str(value)


def load_config(path, section: str | None = None) -> tuple[str, ScenarioConfig]:
    """Read one scenario section; with no ``section`` the file must hold exactly one."""
    parser = configparser.ConfigParser()
    parser.optionxform = str
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except configparser.Error as exc:
        raise InvalidConfigurationError(f"{path}: {exc}") from None
    sections = parser.sections()
    if section is None:
        if len(sections) != 1:
            raise InvalidConfigurationError(
                f"{path} has sections {sections}; pick one with an explicit section name"
            )
        section = sections[0]
    if section not in parser:
        raise InvalidConfigurationError(f"{path} has no section [{section}]")
    values = {key: parse_value(key, text) for key, text in parser[section].items()}
    return section, ScenarioConfig(**values)


def dump_config(cfg: ScenarioConfig, section: str) -> str:
    buf = io.StringIO()
    buf.write(f"[{section}]\n")
    for name in FIELDS:
        buf.write(f"{name} = {format_value(getattr(cfg, name))}\n")
    return buf.getvalue()


def apply_overrides(cfg: ScenarioConfig, **overrides) -> ScenarioConfig:
    """Replace config fields; ``cutoff`` sets every boson cutoff at once."""
    changes = {k: v for k, v in overrides.items() if v is not None}
    if "cutoff" in changes:
        changes["boson_cutoffs"] = [int(changes.pop("cutoff"))] * len(cfg.boson_cutoffs)
    unknown = set(changes) - set(FIELDS)
    if unknown:
        raise InvalidConfigurationError(f"unknown config field(s): {', '.join(sorted(unknown))}")
    return dataclasses.replace(cfg, **changes)


def write_csv(path, columns: dict[str, np.ndarray]):
    """Header row then rows of ``%.12g`` values; names holding commas are quoted."""
    names = list(columns)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(names)
        for row in zip(*(columns[n] for n in names)):
            writer.writerow([f"{float(v):.12g}" for v in row])


def plot_script(name: str, columns: Sequence[str], with_dyson: bool) -> str:
    lines = [
        "# plots trajectory.csv written next to this file; run with python",
        "import csv, pathlib",
        "import matplotlib.pyplot as plt",
        "",
        "here = pathlib.Path(__file__).resolve().parent",
        "",
        "def read(name):",
        "    with open(here / name) as fh:",
        "        rows = list(csv.DictReader(fh))",
        "    return {k: [float(r[k]) for r in rows] for k in rows[0]} if rows else {}",
        "",
        "traj = read('trajectory.csv')",
        "fig, (top, bottom) = plt.subplots(2, 1, sharex=True, figsize=(7, 6))",
        f"for col in {[c for c in columns if c.startswith('mean_boson')]!r}:",
        "    top.plot(traj['time'], traj[col], label=col)",
        f"for col in {[c for c in columns if c.startswith('pop')]!r}:",
        "    bottom.plot(traj['time'], traj[col], label=col)",
    ]
    if with_dyson:
        lines += [
            "dyson = read('dyson.csv')",
            "orders = [k for k in dyson if '@order' in k]",
            "if orders:",
            "    top.plot(dyson['time'], dyson[orders[-1]], ':', label=orders[-1])",
            "# the truncated series can run off by orders of magnitude; keep the exact curve readable",
            "exact_max = max(max(traj[c]) for c in traj if c.startswith('mean_boson'))",
            "top.set_ylim(-0.05, 1.5 * exact_max + 0.1)",
        ]
    lines += [
        "top.set_ylabel('mean boson number')",
        "bottom.set_ylabel('population')",
        "bottom.set_xlabel('time [1/omega0]')",
        "top.legend(); bottom.legend(fontsize='small')",
        f"top.set_title({name!r})",
        "fig.tight_layout()",
        "fig.savefig(here / 'plot.png', dpi=150)",
        "",
    ]
    return "\n".join(lines)


@dataclass
class RunResult:
    name: str
    config: ScenarioConfig
    trajectory: Trajectory
    files: list[Path] = field(default_factory=list)
    summary: dict[str, float] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)
    exit_status: int = 0


def prepare_out_dir(out_dir) -> Path:
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write-test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise OutputDirectoryError(f"cannot write to {out}: {exc}") from None
    return out


def simulate(cfg: ScenarioConfig) -> tuple[ScenarioConfig, Trajectory, Any]:
    """Resolve ``cfg`` and run the exact propagation (and Dyson series when enabled)."""
    cfg = cfg.resolved()
    space = build_space(cfg.boson_cutoffs)
    terms = build_hamiltonian(cfg, space)
    psi0 = space.basis_state(cfg.initial_state)
    traj = propagate(
        psi0,
        terms,
        0.0,
        cfg.t_final,
        cfg.integrator_step,
        cfg.sample_every,
        standard_observables(space),
        space=space,
        store_states=False,
    )
    dyson = None
    if cfg.run_dyson:
        dyson = dyson_evolve(
            psi0,
            terms,
            cfg.dyson_order,
            cfg.dyson_nodes,
            cfg.t_final,
            standard_observables(space, [DYSON_OBSERVABLE]),
            omega0=cfg.omega0,
        )
        compare(dyson, traj, DYSON_OBSERVABLE)
    return cfg, traj, dyson


def run_scenario(name: str, config_path=None, out_dir=".", section: str | None = None, **overrides) -> RunResult:
    """Run a preset (or ``custom`` from ``config_path``) and write its output files.

    Writes ``trajectory.csv``, ``scenario.resolved.cfg``, ``plot.script`` and
    ``sideband.csv`` (seeded blue-sideband record of the final mode-0 Fock
    distribution); with Dyson enabled also ``dyson.csv``.
    """
    if name == "custom":
        if config_path is None:
            raise InvalidConfigurationError("the custom scenario needs a config file")
        section, cfg = load_config(config_path, section)
    else:
        cfg = preset(name)
        if config_path is not None:
            _, cfg = load_config(config_path, section)
        section = name
    cfg = apply_overrides(cfg, **overrides)
    out = prepare_out_dir(out_dir)

    cfg, traj, dyson = simulate(cfg)
    space = build_space(cfg.boson_cutoffs)
    result = RunResult(name=section, config=cfg, trajectory=traj, warnings=list(traj.warnings))

    columns = {"time": traj.times, **traj.observables}
    write_csv(out / "trajectory.csv", columns)
    (out / "scenario.resolved.cfg").write_text(dump_config(cfg, section))
    (out / "plot.script").write_text(plot_script(section, list(traj.observables), dyson is not None))
    result.files += [out / "trajectory.csv", out / "scenario.resolved.cfg", out / "plot.script"]
    result.summary = {key: float(values[-1]) for key, values in traj.observables.items()}

    dist = measurement.FockDistribution.from_unnormalised(fock_distribution(space, traj.final_state, 0))
    times = measurement.DEFAULT_TIMES
    signal = measurement.sideband_signal(
        dist, "blue", measurement.DEFAULT_BASE_RABI, times, cfg.misclassification
    )
    record = measurement.sample_shots(signal, cfg.shots, cfg.rng_seed, times, "blue")
    record.to_csv(out / "sideband.csv")
    result.files.append(out / "sideband.csv")
    n_fit = min(MLE_N_MAX, cfg.boson_cutoffs[0])
    fit = measurement.mle_fit(record, measurement.DEFAULT_BASE_RABI, n_fit, cfg.misclassification)
    result.summary["mle_mean_boson[0]"] = fit.mean()

    if dyson is not None:
        exact = np.interp(dyson.times, traj.times, traj.observables[DYSON_OBSERVABLE])
        dcols = {"time": dyson.times, f"exact:{DYSON_OBSERVABLE}": exact}
        for k, sums in enumerate(dyson.partial_sums):
            dcols[f"{DYSON_OBSERVABLE}@order{k}"] = sums[DYSON_OBSERVABLE]
        dcols["deviation"] = dyson.deviation_from_exact
        write_csv(out / "dyson.csv", dcols)
        result.files.append(out / "dyson.csv")
        result.summary["dyson_max_deviation"] = float(dyson.deviation_from_exact.max())
    return result


def _sweep_one(args):
    name, config_path, section, sub, overrides = args
    result = run_scenario(name, config_path, sub, section=section, **overrides)
    return result.summary, result.warnings


def sweep(
    param: str,
    values: Sequence[Any],
    name: str = "custom",
    config_path=None,
    out_dir=".",
    section: str | None = None,
    jobs: int = 1,
    **overrides,
) -> Path:
    """Run one scenario per value of ``param``; each gets its own sub-directory.

    Writes ``index.csv`` with the swept value and the final observables of
    every run, one row per value in the given order.
    """
    if param not in FIELDS:
        raise InvalidConfigurationError(f"cannot sweep unknown parameter {param!r}; choose from {', '.join(FIELDS)}")
    out = prepare_out_dir(out_dir)
    if name == "custom":
        if config_path is None:
            raise InvalidConfigurationError("the custom scenario needs a config file")
        _, base = load_config(config_path, section)
    else:
        base = preset(name)
        if config_path is not None:
            _, base = load_config(config_path, section)
    base = apply_overrides(base, **overrides)
    base_space = build_space(base.boson_cutoffs)
    header = [param, "directory", *standard_observable_names(base_space), "mle_mean_boson[0]"]
    if base.run_dyson:
        header.append("dyson_max_deviation")

    tasks = []
    for value in values:
        if isinstance(value, str):
            value = parse_value(param, value)
        sub = out / f"{param}={format_value(value).replace(', ', ',')}"
        tasks.append((name, config_path, section, sub, {**overrides, param: value}))

    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_sweep_one, tasks))
    else:
        outcomes = [_sweep_one(t) for t in tasks]

    with open(out / "index.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for task, (summary, _) in zip(tasks, outcomes):
            value = task[4][param]
            cells = [format_value(value), task[3].name]
            cells += [f"{summary[h]:.12g}" if h in summary else "" for h in header[2:]]
            writer.writerow(cells)
    return out / "index.csv"


def default_out_dir(explicit=None):
    return explicit or os.environ.get("QFS_OUT_DIR")
