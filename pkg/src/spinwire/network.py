"""Spin networks whose Hamiltonians commute with total z-spin.

A network is a set of spin-1/2 sites, a list of two-site couplings and an
optional z-field on each site.  Computational basis states use ``|0>`` for
spin down and ``|1>`` for spin up, so ``sigma^z = diag(1, -1)``.  Site 0 is
the leftmost tensor factor: in the full ``2**N`` space the basis index of a
configuration is ``sum(bit_j << (N - 1 - j))``.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from functools import reduce
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import NetworkError

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY = np.eye(2, dtype=complex)

FULL_SPACE_MAX_SITES = 14


class CouplingKind(enum.Enum):
    """Two-site interactions that conserve total z-spin."""

    HEISENBERG = "heisenberg"
    XY = "xy"
    ISING_Z = "ising_z"

    @classmethod
    def parse(cls, value: Any) -> CouplingKind:
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("-", "_")
        aliases = {"isingz": "ising_z", "zz": "ising_z", "ising": "ising_z"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise NetworkError(f"unknown coupling kind {value!r}") from None

    @property
    def has_hopping(self) -> bool:
        return self is not CouplingKind.ISING_Z

    @property
    def has_zz(self) -> bool:
        return self is not CouplingKind.XY

    def pair_operator(self) -> np.ndarray:
        """The 4x4 operator on (site i, site j) for unit strength."""
        xx = np.kron(SIGMA_X, SIGMA_X)
        yy = np.kron(SIGMA_Y, SIGMA_Y)
        zz = np.kron(SIGMA_Z, SIGMA_Z)
        if self is CouplingKind.HEISENBERG:
            return xx + yy + zz
        if self is CouplingKind.XY:
            return xx + yy
        return zz


@dataclass(frozen=True)
class Edge:
    i: int
    j: int
    kind: CouplingKind
    strength: float

    def as_list(self) -> list:
        return [self.i, self.j, self.kind.value, self.strength]


@dataclass(frozen=True)
class SpinNetwork:
    """Immutable, validated description of a Z-total conserving spin network.

    Edges are stored with ``i < j``; each edge contributes
    ``strength * pair_operator`` to the Hamiltonian, with no extra factor 1/2.
    """

    n_sites: int
    edges: tuple[Edge, ...]
    z_fields: tuple[float, ...]
    alice_sites: tuple[int, ...]
    bob_sites: tuple[int, ...]

    def __post_init__(self) -> None:
        n = self.n_sites
        if not isinstance(n, (int, np.integer)) or n < 1:
            raise NetworkError(f"n_sites must be a positive integer, got {n!r}")
        seen = set()
        for e in self.edges:
            if not isinstance(e.kind, CouplingKind):
                raise NetworkError(f"unknown coupling kind {e.kind!r}")
            for s in (e.i, e.j):
                if not 0 <= s < n:
                    raise NetworkError(f"site index {s} out of range for {n} sites")
            if e.i == e.j:
                raise NetworkError(f"self-coupling on site {e.i}")
            if e.i > e.j:
                raise NetworkError("edges must be normalised with i < j")
            if (e.i, e.j) in seen:
                raise NetworkError(f"duplicate edge ({e.i}, {e.j})")
            seen.add((e.i, e.j))
            if not np.isfinite(e.strength):
                raise NetworkError(f"non-finite strength on edge ({e.i}, {e.j})")
        if len(self.z_fields) != n:
            raise NetworkError(f"expected {n} z-fields, got {len(self.z_fields)}")
        for name, sites in (("alice_sites", self.alice_sites), ("bob_sites", self.bob_sites)):
            if not sites:
                raise NetworkError(f"{name} must be non-empty")
            if len(set(sites)) != len(sites):
                raise NetworkError(f"{name} has repeated sites")
            for s in sites:
                if not 0 <= s < n:
                    raise NetworkError(f"{name} index {s} out of range for {n} sites")
        overlap = set(self.alice_sites) & set(self.bob_sites)
        if overlap:
            raise NetworkError(f"overlapping control sets: {sorted(overlap)}")

    def to_dict(self) -> dict:
        return {
            "n_sites": int(self.n_sites),
            "edges": [e.as_list() for e in self.edges],
            "z_fields": [float(h) for h in self.z_fields],
            "alice_sites": [int(s) for s in self.alice_sites],
            "bob_sites": [int(s) for s in self.bob_sites],
        }


@dataclass(frozen=True)
class ChainSpec:
    """Open 1-D chain; ``couplings[j]`` joins sites ``j`` and ``j + 1``."""

    n_sites: int
    couplings: tuple[float, ...]
    kind: CouplingKind = CouplingKind.XY

    def __post_init__(self) -> None:
        if self.n_sites < 2:
            raise NetworkError("a chain needs at least 2 sites")
        if len(self.couplings) != self.n_sites - 1:
            raise NetworkError(
                f"{self.n_sites}-site chain needs {self.n_sites - 1} couplings, "
                f"got {len(self.couplings)}"
            )

    @classmethod
    def from_couplings(cls, couplings: Sequence[float], kind: Any = CouplingKind.XY) -> ChainSpec:
        couplings = tuple(float(c) for c in couplings)
        return cls(len(couplings) + 1, couplings, CouplingKind.parse(kind))

    def to_network(self, n_alice: int, n_bob: int) -> SpinNetwork:
        n = self.n_sites
        if n_alice < 1 or n_bob < 1 or n_alice + n_bob > n:
            raise NetworkError(
                f"overlapping or empty control sets: n_alice={n_alice}, n_bob={n_bob}, N={n}"
            )
        edges = tuple(Edge(j, j + 1, self.kind, c) for j, c in enumerate(self.couplings))
        return SpinNetwork(
            n_sites=n,
            edges=edges,
            z_fields=(0.0,) * n,
            alice_sites=tuple(range(n_alice)),
            bob_sites=tuple(range(n - n_bob, n)),
        )


def chain_from_couplings(
    couplings: Sequence[float], kind: Any, n_alice: int, n_bob: int
) -> SpinNetwork:
    """Path-graph network: Alice holds the first ``n_alice`` sites, Bob the last ``n_bob``."""
    if len(couplings) < 1:
        raise NetworkError("need at least one coupling")
    return ChainSpec.from_couplings(couplings, kind).to_network(n_alice, n_bob)


def random_chain_couplings(
    n_sites: int,
    low: float,
    high: float,
    seed: int,
    *,
    fixed_ends: bool = True,
) -> tuple[float, ...]:
    """Couplings drawn uniformly from ``[low, high)`` with NumPy's PCG64 generator.

    With ``fixed_ends`` the first and last link (the ones Alice and Bob modulate
    under dynamic control) are set to 1 and only the bulk is random.  The draw is
    ``np.random.default_rng(seed).uniform(low, high, size)`` so the instance is
    reproducible across machines.
    """
    if n_sites < 2 or (fixed_ends and n_sites < 4):
        raise NetworkError(f"chain too short for random couplings: {n_sites}")
    rng = np.random.default_rng(seed)
    if fixed_ends:
        bulk = rng.uniform(low, high, n_sites - 3)
        return (1.0, *map(float, bulk), 1.0)
    return tuple(map(float, rng.uniform(low, high, n_sites - 1)))


def _int_list(value: Any, name: str) -> list[int]:
    if not isinstance(value, (list, tuple)):
        raise NetworkError(f"{name} must be a list")
    out = []
    for v in value:
        if isinstance(v, bool) or not isinstance(v, (int, np.integer)):
            raise NetworkError(f"{name} entries must be integers, got {v!r}")
        out.append(int(v))
    return out


def build_network(description: Mapping[str, Any], *, seed: int | None = None) -> SpinNetwork:
    """Validate a parsed network description (see ``docs/network_schema.md``).

    Two layouts are accepted.  The explicit one has ``n_sites``, ``edges`` as
    ``[i, j, kind, strength]`` rows, optional ``z_fields``, ``alice_sites`` and
    ``bob_sites``.  The chain shorthand has ``kind``, ``n_alice``, ``n_bob`` and
    one of ``couplings``, ``random_couplings: {n_sites, low, high, seed,
    fixed_ends}`` or ``n_sites`` with an optional uniform ``strength``;
    ``seed`` here overrides the one in the file.
    """
    if not isinstance(description, Mapping):
        raise NetworkError("network description must be a mapping")
    if "edges" in description:
        return _build_explicit(description)
    if "kind" in description:
        return _build_chain(description, seed)
    raise NetworkError("description has neither 'edges' nor chain shorthand 'kind'")


def _build_explicit(d: Mapping[str, Any]) -> SpinNetwork:
    try:
        n = int(d["n_sites"])
    except (KeyError, TypeError, ValueError):
        raise NetworkError("explicit network needs an integer n_sites") from None
    edges = []
    for row in d["edges"]:
        if not isinstance(row, (list, tuple)) or len(row) != 4:
            raise NetworkError(f"edge must be [i, j, kind, strength], got {row!r}")
        i, j, kind, strength = row
        i, j = _int_list([i, j], "edge sites")
        i, j = min(i, j), max(i, j)
        edges.append(Edge(i, j, CouplingKind.parse(kind), float(strength)))
    z = d.get("z_fields")
    z_fields = (0.0,) * n if z is None else tuple(float(h) for h in z)
    return SpinNetwork(
        n_sites=n,
        edges=tuple(edges),
        z_fields=z_fields,
        alice_sites=tuple(_int_list(d.get("alice_sites", []), "alice_sites")),
        bob_sites=tuple(_int_list(d.get("bob_sites", []), "bob_sites")),
    )


def _build_chain(d: Mapping[str, Any], seed: int | None) -> SpinNetwork:
    kind = CouplingKind.parse(d["kind"])
    try:
        n_alice, n_bob = int(d["n_alice"]), int(d["n_bob"])
    except (KeyError, TypeError, ValueError):
        raise NetworkError("chain shorthand needs integer n_alice and n_bob") from None
    if "couplings" in d:
        couplings = [float(c) for c in d["couplings"]]
    elif "random_couplings" in d:
        r = d["random_couplings"]
        use_seed = seed if seed is not None else r.get("seed")
        if use_seed is None:
            raise NetworkError("random_couplings needs a seed")
        couplings = list(
            random_chain_couplings(
                int(r["n_sites"]),
                float(r.get("low", 0.95)),
                float(r.get("high", 1.05)),
                int(use_seed),
                fixed_ends=bool(r.get("fixed_ends", True)),
            )
        )
    elif "n_sites" in d:
        couplings = [float(d.get("strength", 1.0))] * (int(d["n_sites"]) - 1)
    else:
        raise NetworkError("chain shorthand needs couplings, random_couplings or n_sites")
    return chain_from_couplings(couplings, kind, n_alice, n_bob)


def load_network(path: str | Path, *, seed: int | None = None) -> SpinNetwork:
    with open(path, encoding="utf-8") as fh:
        try:
            description = json.load(fh)
        except json.JSONDecodeError as exc:
            raise NetworkError(f"{path}: not valid JSON ({exc})") from None
    return build_network(description, seed=seed)


def dumps_network(network: SpinNetwork) -> str:
    return json.dumps(network.to_dict(), indent=2)


def chain_spec_of(network: SpinNetwork) -> ChainSpec:
    """Recover the ChainSpec of a path-graph network with a single coupling kind."""
    n = network.n_sites
    by_pair = {(e.i, e.j): e for e in network.edges}
    if len(by_pair) != n - 1 or any((j, j + 1) not in by_pair for j in range(n - 1)):
        raise NetworkError("network is not an open chain")
    kinds = {e.kind for e in network.edges}
    if len(kinds) != 1:
        raise NetworkError("chain mixes coupling kinds")
    if any(h != 0.0 for h in network.z_fields):
        raise NetworkError("chain has z-fields")
    return ChainSpec(n, tuple(by_pair[(j, j + 1)].strength for j in range(n - 1)), kinds.pop())


def _site_operator(n: int, site: int, op: np.ndarray) -> sp.csr_matrix:
    factors = [sp.identity(2, format="csr", dtype=complex)] * n
    factors[site] = sp.csr_matrix(op)
    return reduce(lambda a, b: sp.kron(a, b, format="csr"), factors)


def full_hamiltonian(network: SpinNetwork) -> np.ndarray:
    """Dense ``2**N`` Hamiltonian built from Kronecker products of Pauli matrices."""
    n = network.n_sites
    if n > FULL_SPACE_MAX_SITES:
        raise NetworkError(f"full-space Hamiltonian refused for {n} > {FULL_SPACE_MAX_SITES} sites")
    dim = 2**n
    h = sp.csr_matrix((dim, dim), dtype=complex)
    paulis = {"x": SIGMA_X, "y": SIGMA_Y, "z": SIGMA_Z}
    ops = {(s, a): _site_operator(n, s, m) for s in range(n) for a, m in paulis.items()}
    for e in network.edges:
        terms = []
        if e.kind.has_hopping:
            terms += ["x", "y"]
        if e.kind.has_zz:
            terms.append("z")
        for a in terms:
            h = h + e.strength * (ops[(e.i, a)] @ ops[(e.j, a)])
    for s, field in enumerate(network.z_fields):
        if field:
            h = h + field * ops[(s, "z")]
    return h.toarray()


def z_total(n_sites: int) -> np.ndarray:
    """Diagonal of ``Z^tot`` in the full computational basis."""
    idx = np.arange(2**n_sites)
    ups = np.zeros_like(idx)
    for s in range(n_sites):
        ups += (idx >> (n_sites - 1 - s)) & 1
    return (n_sites - 2 * ups).astype(float)
