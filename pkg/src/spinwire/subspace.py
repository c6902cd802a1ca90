"""Fixed-excitation subspaces and Hamiltonians restricted to them.

The n-excitation subspace is spanned by the ``C(N, n)`` configurations with
exactly ``n`` spins up.  Configurations are identified with the sorted tuple
of excited sites and ranked in colexicographic order, so for ``n = 1`` the
dense index of a configuration is simply its site.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from math import comb
from typing import Sequence

import numpy as np

from .errors import ConfigError
from .network import SpinNetwork


def colex_rank(subset: Sequence[int]) -> int:
    """Rank of a sorted subset: ``sum(C(s_i, i + 1))``."""
    return sum(comb(s, i + 1) for i, s in enumerate(subset))


def colex_unrank(rank: int, n_excitations: int) -> tuple[int, ...]:
    out = []
    r = rank
    for i in range(n_excitations, 0, -1):
        # largest c with C(c, i) <= r
        c = i - 1
        while comb(c + 1, i) <= r:
            c += 1
        out.append(c)
        r -= comb(c, i)
    return tuple(reversed(out))


@dataclass(frozen=True, eq=True)
class ExcitationBasis:
    n_sites: int
    n_excitations: int

    def __post_init__(self) -> None:
        if self.n_sites < 1:
            raise ConfigError("n_sites must be positive")
        if not 0 <= self.n_excitations <= self.n_sites:
            raise ConfigError(
                f"excitation count {self.n_excitations} out of range for {self.n_sites} sites"
            )

    @property
    def dimension(self) -> int:
        return comb(self.n_sites, self.n_excitations)

    def rank(self, subset: Sequence[int]) -> int:
        s = tuple(sorted(subset))
        if len(s) != self.n_excitations or len(set(s)) != len(s):
            raise ConfigError(f"{subset!r} is not a {self.n_excitations}-subset")
        if s and not (0 <= s[0] and s[-1] < self.n_sites):
            raise ConfigError(f"{subset!r} has sites outside 0..{self.n_sites - 1}")
        return colex_rank(s)

    def unrank(self, k: int) -> tuple[int, ...]:
        if not 0 <= k < self.dimension:
            raise ConfigError(f"index {k} out of range for dimension {self.dimension}")
        return colex_unrank(k, self.n_excitations)

    @cached_property
    def subsets(self) -> tuple[tuple[int, ...], ...]:
        return tuple(
            sorted(combinations(range(self.n_sites), self.n_excitations), key=lambda s: s[::-1])
        )

    @cached_property
    def occupation(self) -> np.ndarray:
        """Boolean ``(dimension, n_sites)`` table of excited sites."""
        occ = np.zeros((self.dimension, self.n_sites), dtype=bool)
        for k, s in enumerate(self.subsets):
            occ[k, list(s)] = True
        return occ

    def ranks(self, occupation: np.ndarray) -> np.ndarray:
        """Vectorised colex rank of the rows of a boolean occupation table."""
        occupation = np.asarray(occupation, dtype=bool)
        count = np.cumsum(occupation, axis=1)
        table = self._binomial_table
        q = np.broadcast_to(np.arange(self.n_sites), occupation.shape)
        terms = np.where(occupation, table[q, np.minimum(count, self.n_excitations)], 0)
        return terms.sum(axis=1)

    @cached_property
    def _binomial_table(self) -> np.ndarray:
        # entries that occur in valid ranks are < dimension; clip the rest to fit int64
        cap = 2**62
        return np.array(
            [[min(comb(q, r), cap) for r in range(self.n_excitations + 1)] for q in range(self.n_sites)],
            dtype=np.int64,
        )

    @cached_property
    def full_indices(self) -> np.ndarray:
        """Position of each basis state in the ``2**N`` computational basis (N <= 62)."""
        if self.n_sites > 62:
            raise ConfigError("full-space indices need n_sites <= 62")
        weights = 1 << np.arange(self.n_sites - 1, -1, -1, dtype=np.int64)
        return self.occupation.astype(np.int64) @ weights


@dataclass(frozen=True, eq=False)
class RestrictedHamiltonian:
    """The block of H acting on one excitation subspace.

    For the admitted coupling kinds every entry is real, so ``matrix`` is
    stored as float64.
    """

    basis: ExcitationBasis
    matrix: np.ndarray = field(repr=False)


def restrict_hamiltonian(network: SpinNetwork, n: int) -> RestrictedHamiltonian:
    """Matrix elements ``<r|H|s>`` between n-excitation configurations.

    Hopping terms (XY, Heisenberg) move one excitation across an edge with
    amplitude ``2 * strength``; the ``sigma^z sigma^z`` parts and z-fields are
    diagonal.
    """
    if not 0 <= n <= network.n_sites:
        raise ConfigError(f"excitation count {n} out of range for {network.n_sites} sites")
    basis = ExcitationBasis(network.n_sites, n)
    occ = basis.occupation
    z = np.where(occ, -1.0, 1.0)  # sigma^z eigenvalue per site
    dim = basis.dimension
    h = np.zeros((dim, dim))
    diag = z @ np.asarray(network.z_fields, dtype=float)
    for e in network.edges:
        if e.kind.has_zz:
            diag = diag + e.strength * z[:, e.i] * z[:, e.j]
        if e.kind.has_hopping:
            movers = np.nonzero(occ[:, e.i] != occ[:, e.j])[0]
            if movers.size:
                moved = occ[movers].copy()
                moved[:, [e.i, e.j]] = ~moved[:, [e.i, e.j]]
                targets = basis.ranks(moved)
                h[targets, movers] += 2.0 * e.strength
    h[np.diag_indices(dim)] += diag
    return RestrictedHamiltonian(basis, h)


def isometry(basis: ExcitationBasis) -> np.ndarray:
    """``2**N x dim`` matrix whose columns are the embedded basis states."""
    v = np.zeros((2**basis.n_sites, basis.dimension))
    v[basis.full_indices, np.arange(basis.dimension)] = 1.0
    return v


def embed_state(basis: ExcitationBasis, amplitudes: np.ndarray) -> np.ndarray:
    """Place subspace amplitudes into a full ``2**N`` state vector (small N only)."""
    amplitudes = np.asarray(amplitudes)
    if amplitudes.shape != (basis.dimension,):
        raise ConfigError(
            f"amplitude vector has shape {amplitudes.shape}, basis dimension is {basis.dimension}"
        )
    out = np.zeros(2**basis.n_sites, dtype=complex)
    out[basis.full_indices] = amplitudes
    return out
