import json
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from spinwire import build_network  # noqa: E402
from spinwire.network import Edge, SpinNetwork, CouplingKind  # noqa: E402

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = ROOT / "configs"

KINDS = [CouplingKind.HEISENBERG, CouplingKind.XY, CouplingKind.ISING_Z]


def random_network(rng, n_sites: int, *, fields: bool = True) -> SpinNetwork:
    """Connected random graph: a random spanning tree plus extra edges, mixed kinds."""
    order = rng.permutation(n_sites)
    pairs = {tuple(sorted((int(order[k]), int(order[rng.integers(k)])))) for k in range(1, n_sites)}
    for _ in range(rng.integers(0, n_sites)):
        i, j = sorted(rng.choice(n_sites, size=2, replace=False).tolist())
        pairs.add((i, j))
    edges = tuple(
        Edge(i, j, KINDS[rng.integers(3)], float(rng.uniform(0.2, 1.5))) for i, j in sorted(pairs)
    )
    z = tuple(rng.uniform(-0.5, 0.5, n_sites).tolist()) if fields else (0.0,) * n_sites
    n_a = int(rng.integers(1, max(2, n_sites // 2)))
    n_b = int(rng.integers(1, n_sites - n_a + 1))
    sites = rng.permutation(n_sites).tolist()
    return SpinNetwork(n_sites, edges, z, tuple(sorted(sites[:n_a])), tuple(sorted(sites[n_a : n_a + n_b])))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def load_config(name: str) -> dict:
    return json.loads((CONFIGS / name).read_text())


@pytest.fixture(scope="session")
def config_network():
    return lambda name: build_network(load_config(name))


@pytest.fixture(scope="session")
def controlled():
    """``controlled(config, n_phantom, t_or_grid, n_steps)``, cached across tests."""
    from functools import lru_cache

    from spinwire import build_phantom_system, derive_controls
    from spinwire.controller import choose_time
    from spinwire.network import chain_spec_of

    @lru_cache(maxsize=None)
    def run(name: str, n_phantom: int, t, n_steps: int):
        ext = build_phantom_system(chain_spec_of(build_network(load_config(name))), n_phantom)
        if isinstance(t, tuple):
            t, _ = choose_time(ext, np.arange(t[0], t[1] + 1e-9, t[2]))
        return derive_controls(ext, float(t), n_steps)

    return run


# acceptance report: one line per criterion, printed after the run
_ACCEPTANCE: dict[str, list[tuple[str, str]]] = {}


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    if "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if not name.startswith("test_criterion_"):
        return
    key = name.split("[")[0].split("_")[2]
    measured = dict(report.user_properties).get("measured", "")
    _ACCEPTANCE.setdefault(key, []).append((name, report.outcome, measured))


def _part_label(name: str) -> str:
    if "[" in name:
        return name[name.index("[") + 1 : -1]
    base = name.split("_", 3)
    return base[3] if len(base) > 3 else "all"


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_ACCEPTANCE, key=int):
        parts = _ACCEPTANCE[key]
        ok = all(outcome == "passed" for _, outcome, _ in parts)
        detail = "; ".join(
            f"{_part_label(n)}: {o}{' [' + m + ']' if m else ''}"
            for n, o, m in parts
        )
        terminalreporter.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'} -- {detail}")
