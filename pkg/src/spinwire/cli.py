"""Command-line front end.

Every command writes plot-ready files under the ``--out`` prefix; each file
starts with ``#`` lines holding the resolved configuration, the seed, the
tolerances and the network, so it can be read on its own.

Exit codes: 0 success, 1 configuration error, 2 numerical invariant
violation, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from .config import default_tolerances
from .controller import (
    arrival_weights,
    build_phantom_system,
    choose_time,
    derive_controls,
    replay_controls,
    shadow_residual,
    uncontrolled_baseline,
)
from .csvio import atomic_write_text, column, read_csv, write_csv, write_trajectory_csv
from .encoder import (
    ControlSubspaceProjector,
    best_time,
    fidelity_bounds,
    optimal_encoding,
    singular_value_curves,
)
from .entanglement import LeakSpec, verify_concurrence_identity
from .errors import ConfigError, NumericalInvariantError
from .network import SpinNetwork, chain_spec_of, load_network
from .propagator import diagonalize, sample_trajectory
from .subspace import restrict_hamiltonian

log = logging.getLogger("spinwire")

COMMANDS = (
    "sweep",
    "encode",
    "evolve",
    "derive-controls",
    "simulate-controls",
    "concurrence-check",
    "baseline",
)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3


@dataclass
class RunConfig:
    command: str
    out: str
    network: str | None = None
    t_grid: str | None = None
    t: float | None = None
    steps: int = 2000
    phantom: int = 20
    k: int | None = None
    seed: int | None = None
    n: int = 1
    which: int = 1
    refine: bool = False
    amplitudes: bool = False
    schedule: str | None = None
    cb: list[float] = field(default_factory=list)
    sweep: str | None = None
    t_max: float = 1000.0
    t_step: float = 0.25


def parse_grid(text: str) -> np.ndarray:
    """``"a:b:step"`` to an inclusive uniform grid."""
    try:
        a, b, step = (float(x) for x in text.split(":"))
    except ValueError:
        raise ConfigError(f"--t-grid must look like a:b:step, got {text!r}") from None
    if step <= 0 or b < a:
        raise ConfigError(f"bad time grid {text!r}")
    n = int(np.floor((b - a) / step + 1e-9)) + 1
    return a + step * np.arange(n)


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit with status 2
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="spinwire", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, network=True):
        if network:
            p.add_argument("--network", required=True, help="network description (JSON)")
        p.add_argument("--seed", type=int, default=None, help="seed for random-coupling chains")
        p.add_argument("--out", required=True, help="output path prefix")

    p = sub.add_parser("sweep", help="top-k singular values over a time grid")
    common(p)
    p.add_argument("--t-grid", dest="t_grid", required=True)
    p.add_argument("--k", type=int, default=None, help="singular values to report (default: up to 4)")
    p.add_argument("--n", type=int, default=1, help="excitation count")

    p = sub.add_parser("encode", help="optimal encoding amplitudes at one time")
    common(p)
    p.add_argument("--t", type=float)
    p.add_argument("--t-grid", dest="t_grid", help="pick T maximising s1 on this grid")
    p.add_argument("--refine", action="store_true")
    p.add_argument("--which", type=int, default=1, help="1-based singular vector index")
    p.add_argument("--n", type=int, default=1)

    p = sub.add_parser("evolve", help="evolve an optimal encoding over a time grid")
    common(p)
    p.add_argument("--t", type=float, required=True, help="communication time of the encoding")
    p.add_argument("--t-grid", dest="t_grid", required=True, help="evolution times")
    p.add_argument("--which", type=int, default=1)
    p.add_argument("--amplitudes", action="store_true")

    p = sub.add_parser("derive-controls", help="boundary control functions for an XY chain")
    common(p)
    p.add_argument("--t", type=float)
    p.add_argument("--t-grid", dest="t_grid", help="pick T maximising s1 on this grid")
    p.add_argument("--steps", type=int, default=2000)
    p.add_argument("--phantom", type=int, default=20)

    p = sub.add_parser("simulate-controls", help="replay a control schedule on a chain")
    common(p)
    p.add_argument("--schedule", required=True, help="CSV written by derive-controls")

    p = sub.add_parser("concurrence-check", help="entanglement and fidelity envelope from C_B")
    common(p, network=False)
    p.add_argument("--cb", type=float, action="append", default=[])
    p.add_argument("--sweep", help="CSV written by sweep; C_B = s1**2")

    p = sub.add_parser("baseline", help="best C_B of the uncontrolled chain")
    common(p)
    p.add_argument("--t-max", dest="t_max", type=float, default=1000.0)
    p.add_argument("--t-step", dest="t_step", type=float, default=0.25)
    return parser


def config_from_args(argv: Sequence[str] | None) -> RunConfig:
    ns = build_parser().parse_args(argv)
    known = RunConfig.__dataclass_fields__
    return RunConfig(**{k: v for k, v in vars(ns).items() if k in known})


def _header(config: RunConfig, network: SpinNetwork | None, **extra: Any) -> dict[str, Any]:
    h: dict[str, Any] = {
        "spinwire": __version__,
        "command": config.command,
        "seed": config.seed,
        "config": asdict(config),
        "tolerances": asdict(default_tolerances()),
    }
    if network is not None:
        h["network"] = network.to_dict()
    h.update(extra)
    return h


def _h1_setup(network: SpinNetwork, n: int = 1):
    h = restrict_hamiltonian(network, n)
    p = diagonalize(h)
    pa = ControlSubspaceProjector.for_sites(h.basis, network.alice_sites)
    pb = ControlSubspaceProjector.for_sites(h.basis, network.bob_sites)
    return p, pa, pb


def _resolve_time(config: RunConfig, chooser) -> float:
    if config.t is not None:
        return float(config.t)
    if config.t_grid is None:
        raise ConfigError("give --t or --t-grid")
    t, _ = chooser(parse_grid(config.t_grid))
    return t


def _cmd_sweep(config: RunConfig, network: SpinNetwork) -> None:
    grid = parse_grid(config.t_grid)
    p, pa, pb = _h1_setup(network, config.n)
    k = config.k if config.k is not None else min(4, pa.size, pb.size)
    curves = singular_value_curves(p, pa, pb, grid, k)
    cols = ["T"] + [f"s{j + 1}" for j in range(k)]
    rows = ([t, *s] for t, s in zip(grid, curves))
    write_csv(f"{config.out}.csv", _header(config, network), cols, rows)


def _cmd_encode(config: RunConfig, network: SpinNetwork) -> None:
    p, pa, pb = _h1_setup(network, config.n)
    t = _resolve_time(config, lambda g: best_time(p, pa, pb, g, refine=config.refine))
    sol = optimal_encoding(p, pa, pb, t, config.which)
    w = sol.encoding(config.which - 1)
    header = _header(config, network, T=t, singular_values=[float(s) for s in sol.singular_values])
    label = "site" if config.n == 1 else "index"
    rows = ([j, w[j].real, w[j].imag] for j in range(w.size))
    write_csv(f"{config.out}.csv", header, [label, "re", "im"], rows)


def _cmd_evolve(config: RunConfig, network: SpinNetwork) -> None:
    p, pa, pb = _h1_setup(network)
    sol = optimal_encoding(p, pa, pb, config.t, config.which)
    traj = sample_trajectory(p, sol.encoding(config.which - 1), parse_grid(config.t_grid))
    header = _header(config, network, s=float(sol.singular_values[config.which - 1]))
    write_trajectory_csv(f"{config.out}.csv", traj, header, amplitudes=config.amplitudes)


def _cmd_derive(config: RunConfig, network: SpinNetwork) -> None:
    ext = build_phantom_system(chain_spec_of(network), config.phantom)
    t = _resolve_time(config, lambda g: choose_time(ext, g))
    schedule = derive_controls(ext, t, config.steps)
    summary = schedule.summary()
    header = _header(config, network, dt=schedule.dt, summary=summary)
    rows = ([t_k, a, b] for t_k, a, b in zip(schedule.step_times, schedule.j_a, schedule.j_b))
    write_csv(f"{config.out}.csv", header, ["t", "J_A", "J_B"], rows)
    atomic_write_text(f"{config.out}.summary.json", json.dumps(summary, indent=2, sort_keys=True) + "\n")
    log.info("C_B=%.8f residual=%.3e", schedule.achieved_c_b, shadow_residual(schedule))


def _cmd_simulate(config: RunConfig, network: SpinNetwork) -> None:
    chain = chain_spec_of(network)
    sched_header, cols, table = read_csv(config.schedule)
    t = column(cols, table, "t")
    if "dt" in sched_header:
        dt = float(sched_header["dt"])
    elif len(t) > 1:
        dt = float(t[1] - t[0])
    else:
        raise ConfigError("cannot infer the step length from the schedule")
    traj = replay_controls(chain, column(cols, table, "J_A"), column(cols, table, "J_B"), dt)
    end, pair = arrival_weights(traj)
    summary = {"T": float(traj.times[-1]), "n_steps": len(t), "c_b": end, "c_b_pair": pair}
    header = _header(config, network, summary=summary)
    write_trajectory_csv(f"{config.out}.csv", traj, header)
    atomic_write_text(f"{config.out}.summary.json", json.dumps(summary, indent=2, sort_keys=True) + "\n")


def _cmd_concurrence(config: RunConfig) -> None:
    if config.sweep:
        _, cols, table = read_csv(config.sweep)
        times = column(cols, table, "T")
        cbs = np.clip(column(cols, table, "s1") ** 2, 0.0, 1.0)
    elif config.cb:
        cbs = np.asarray(config.cb, dtype=float)
        times = np.full(cbs.size, np.nan)
    else:
        raise ConfigError("give --cb or --sweep")
    rows = []
    for t, c_b in zip(times, cbs):
        check = verify_concurrence_identity(float(c_b), LeakSpec(0.0))
        lo, hi = fidelity_bounds(float(c_b))
        rows.append([float(t), float(c_b), check.entanglement, lo, hi])
    cols = ["T", "c_b", "E", "F_bar_lower", "F_bar_upper"]
    write_csv(f"{config.out}.csv", _header(config, None), cols, rows)


def _cmd_baseline(config: RunConfig, network: SpinNetwork) -> None:
    chain = chain_spec_of(network)
    grid = np.arange(0.0, config.t_max + 1e-9, config.t_step)
    best = uncontrolled_baseline(chain, config.t_max, grid)
    record = {"header": _header(config, network), "max_c_b": best}
    atomic_write_text(f"{config.out}.json", json.dumps(record, indent=2, sort_keys=True) + "\n")


def run(config: RunConfig) -> int:
    """Execute one command; returns the process exit status."""
    try:
        if config.command == "concurrence-check":
            _cmd_concurrence(config)
            return EXIT_OK
        if config.network is None:
            raise ConfigError("--network is required")
        try:
            network = load_network(config.network, seed=config.seed)
        except FileNotFoundError as exc:
            raise ConfigError(f"network file not found: {exc.filename}") from None
        handlers = {
            "sweep": _cmd_sweep,
            "encode": _cmd_encode,
            "evolve": _cmd_evolve,
            "derive-controls": _cmd_derive,
            "simulate-controls": _cmd_simulate,
            "baseline": _cmd_baseline,
        }
        if config.command not in handlers:
            raise ConfigError(f"unknown command {config.command!r}")
        handlers[config.command](config, network)
        return EXIT_OK
    except ConfigError as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except NumericalInvariantError as exc:
        log.error("numerical invariant violated: %s", exc)
        return EXIT_NUMERIC
    except OSError as exc:
        log.error("I/O failure: %s", exc)
        return EXIT_IO


def main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    try:
        config = config_from_args(argv)
    except ConfigError as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
