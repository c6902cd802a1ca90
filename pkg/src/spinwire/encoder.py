"""Optimal encodings from the SVD of the projected propagator.

For a communication time T the block of ``U(T)`` that maps Alice's
excitation subspace into Bob's is decomposed as ``V S W^dagger``.  The first
right singular vector is the encoding that maximises the arrival weight
``C_B(T)``, which then equals ``s_1**2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .config import Tolerances, default_tolerances
from .errors import ConfigError, NumericalInvariantError
from .network import SpinNetwork
from .propagator import SpectralPropagator, Trajectory, diagonalize, evolve
from .subspace import ExcitationBasis, restrict_hamiltonian

DEFAULT_T_STEP = 0.25
DEFAULT_DIMENSION_CAP = 20_000


@dataclass(frozen=True, eq=False)
class ControlSubspaceProjector:
    """Diagonal 0/1 projector onto configurations excited only inside ``sites``.

    The all-zero configuration is never kept, so for ``n = 0`` the projector
    is empty.
    """

    basis: ExcitationBasis
    sites: tuple[int, ...]
    kept_indices: np.ndarray = field(repr=False)

    @classmethod
    def for_sites(cls, basis: ExcitationBasis, sites: Sequence[int]) -> ControlSubspaceProjector:
        sites = tuple(int(s) for s in sites)
        if any(not 0 <= s < basis.n_sites for s in sites):
            raise ConfigError(f"control sites {sites} out of range")
        if basis.n_excitations == 0:
            kept = np.zeros(0, dtype=int)
        else:
            inside = np.zeros(basis.n_sites, dtype=bool)
            inside[list(sites)] = True
            outside = basis.occupation & ~inside
            kept = np.nonzero(~outside.any(axis=1))[0]
        return cls(basis, sites, kept)

    @property
    def size(self) -> int:
        return len(self.kept_indices)

    def matrix(self) -> np.ndarray:
        d = np.zeros(self.basis.dimension)
        d[self.kept_indices] = 1.0
        return np.diag(d)

    def weight_outside(self, state: np.ndarray) -> float:
        mask = np.ones(self.basis.dimension, dtype=bool)
        mask[self.kept_indices] = False
        return float(np.sum(np.abs(state[mask]) ** 2))


def _check_bases(p: SpectralPropagator, *projectors: ControlSubspaceProjector) -> None:
    for pr in projectors:
        if pr.basis.dimension != p.dimension or (p.basis is not None and pr.basis != p.basis):
            raise ConfigError("projector and propagator act on different bases")


def projected_propagator(
    p: SpectralPropagator,
    pa: ControlSubspaceProjector,
    pb: ControlSubspaceProjector,
    t: float,
) -> np.ndarray:
    """Nonzero block of ``P_B U(t) P_A``, shape ``(|kept_B|, |kept_A|)``."""
    _check_bases(p, pa, pb)
    return p.block(pb.kept_indices, pa.kept_indices, t)


@dataclass(frozen=True, eq=False)
class EncodingSolution:
    """Top singular triplets at one time.

    ``right_vectors[j]`` and ``left_vectors[j]`` are full-basis coordinate
    vectors (zero outside Alice's, respectively Bob's, kept indices).  The phase
    of each pair is fixed so the largest-magnitude entry of ``w_j`` is real and
    positive.
    """

    time: float
    singular_values: np.ndarray
    right_vectors: np.ndarray = field(repr=False)
    left_vectors: np.ndarray = field(repr=False)
    subspace_n: int

    @property
    def s1(self) -> float:
        return float(self.singular_values[0]) if len(self.singular_values) else 0.0

    @property
    def c_b(self) -> float:
        return self.s1**2

    def encoding(self, j: int = 0) -> np.ndarray:
        return self.right_vectors[j]


def _fix_phase(w: np.ndarray, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    k = int(np.argmax(np.abs(w)))
    if abs(w[k]) == 0:
        return w, v
    phase = abs(w[k]) / w[k]
    return w * phase, v * phase


def solution_from_block(
    block: np.ndarray,
    pa: ControlSubspaceProjector,
    pb: ControlSubspaceProjector,
    t: float,
    k: int,
    tolerances: Tolerances | None = None,
) -> EncodingSolution:
    """SVD of a projected-propagator block, lifted back to basis coordinates."""
    tol = tolerances or default_tolerances()
    limit = min(pa.size, pb.size)
    if not 0 <= k <= limit:
        raise ConfigError(f"k={k} exceeds min(|A kept|, |B kept|) = {limit}")
    dim = pa.basis.dimension
    if k == 0:
        empty = np.zeros((0, dim), dtype=complex)
        return EncodingSolution(float(t), np.zeros(0), empty, empty.copy(), pa.basis.n_excitations)
    u, s, wh = np.linalg.svd(block, full_matrices=False)
    if s[0] > 1.0 + tol.contraction:
        raise NumericalInvariantError(f"singular value {s[0]!r} exceeds 1")
    right = np.zeros((k, dim), dtype=complex)
    left = np.zeros((k, dim), dtype=complex)
    for j in range(k):
        w, v = _fix_phase(wh[j].conj(), u[:, j])
        right[j, pa.kept_indices] = w
        left[j, pb.kept_indices] = v
    return EncodingSolution(float(t), s[:k].copy(), right, left, pa.basis.n_excitations)


def optimal_encoding(
    p: SpectralPropagator,
    pa: ControlSubspaceProjector,
    pb: ControlSubspaceProjector,
    t: float,
    k: int = 1,
    tolerances: Tolerances | None = None,
) -> EncodingSolution:
    """Top ``k`` singular triplets of the projected propagator at time ``t``."""
    return solution_from_block(projected_propagator(p, pa, pb, t), pa, pb, t, k, tolerances)


def sweep_times(
    p: SpectralPropagator,
    pa: ControlSubspaceProjector,
    pb: ControlSubspaceProjector,
    t_grid: Sequence[float],
    k: int = 1,
) -> list[EncodingSolution]:
    t_grid = np.asarray(t_grid, dtype=float).reshape(-1)
    if t_grid.size > 1 and np.any(np.diff(t_grid) <= 0):
        raise ConfigError("time grid must be increasing")
    return [optimal_encoding(p, pa, pb, t, k) for t in t_grid]


def singular_value_curves(
    p: SpectralPropagator,
    pa: ControlSubspaceProjector,
    pb: ControlSubspaceProjector,
    t_grid: Sequence[float],
    k: int = 1,
) -> np.ndarray:
    """``(len(t_grid), k)`` array of the top singular values, no vectors."""
    _check_bases(p, pa, pb)
    limit = min(pa.size, pb.size)
    if not 0 <= k <= limit:
        raise ConfigError(f"k={k} exceeds min(|A kept|, |B kept|) = {limit}")
    t_grid = np.asarray(t_grid, dtype=float).reshape(-1)
    va = p.eigenvectors[pa.kept_indices].conj().T
    vb = p.eigenvectors[pb.kept_indices]
    out = np.zeros((t_grid.size, k))
    for i, t in enumerate(t_grid):
        block = (vb * np.exp(-1j * p.eigenvalues * t)) @ va
        out[i] = np.linalg.svd(block, compute_uv=False)[:k]
    return out


def time_grid(t_start: float, t_stop: float, step: float = DEFAULT_T_STEP) -> np.ndarray:
    """Inclusive uniform grid ``t_start, t_start + step, ..., <= t_stop``."""
    if step <= 0:
        raise ConfigError("grid step must be positive")
    n = int(np.floor((t_stop - t_start) / step + 1e-9)) + 1
    return t_start + step * np.arange(max(n, 0))


def refine_maximum(f, t_grid: np.ndarray, values: np.ndarray, *, n_peaks: int = 1) -> tuple[float, float]:
    """Polish the best coarse samples of ``f`` with a bounded scalar search.

    The ``n_peaks`` largest coarse samples are each refined inside the
    neighbouring grid cells; the best refined value is returned as ``(t, f(t))``.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    values = np.asarray(values, dtype=float)
    if t_grid.size == 0:
        raise ConfigError("empty grid")
    best_t, best_v = float(t_grid[np.argmax(values)]), float(values.max())
    for i in np.argsort(values)[::-1][:n_peaks]:
        lo = t_grid[max(i - 1, 0)]
        hi = t_grid[min(i + 1, t_grid.size - 1)]
        if hi <= lo:
            continue
        res = minimize_scalar(lambda t: -f(t), bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-8})
        if -res.fun > best_v:
            best_t, best_v = float(res.x), float(-res.fun)
    return best_t, best_v


def best_time(
    p: SpectralPropagator,
    pa: ControlSubspaceProjector,
    pb: ControlSubspaceProjector,
    t_grid: Sequence[float],
    *,
    refine: bool = False,
) -> tuple[float, float]:
    """``(T, s_1(T))`` maximising the top singular value over the grid."""
    t_grid = np.asarray(t_grid, dtype=float)
    s1 = singular_value_curves(p, pa, pb, t_grid, 1)[:, 0]
    if not refine:
        i = int(np.argmax(s1))
        return float(t_grid[i]), float(s1[i])
    f = lambda t: float(singular_value_curves(p, pa, pb, [t], 1)[0, 0])  # noqa: E731
    return refine_maximum(f, t_grid, s1)


def multi_subspace_optimum(
    network: SpinNetwork,
    t: float,
    n_max: int | None = None,
    *,
    cap: int = DEFAULT_DIMENSION_CAP,
) -> tuple[EncodingSolution, int]:
    """Best encoding over the subspaces with 1..n_max excitations.

    Each subspace is solved independently; the one whose top singular value is
    largest wins (ties go to the smaller excitation count).
    """
    n_alice = len(network.alice_sites)
    n_max = n_alice if n_max is None else n_max
    if not 1 <= n_max <= n_alice:
        raise ConfigError(f"n_max must lie in 1..{n_alice}, got {n_max}")
    best: tuple[EncodingSolution, int] | None = None
    for n in range(1, n_max + 1):
        basis = ExcitationBasis(network.n_sites, n)
        if basis.dimension > cap:
            raise ConfigError(f"subspace n={n} has dimension {basis.dimension} > cap {cap}")
        pa = ControlSubspaceProjector.for_sites(basis, network.alice_sites)
        pb = ControlSubspaceProjector.for_sites(basis, network.bob_sites)
        k = 1 if min(pa.size, pb.size) else 0
        p = diagonalize(restrict_hamiltonian(network, n))
        sol = optimal_encoding(p, pa, pb, t, k)
        if best is None or sol.s1 > best[0].s1:
            best = (sol, n)
    assert best is not None
    return best


@dataclass(frozen=True, eq=False)
class TransferOutcome:
    c_b: float
    arrival_state: np.ndarray | None = field(repr=False)
    leak_norm: float


def transfer_outcome(
    p: SpectralPropagator,
    pa: ControlSubspaceProjector,
    pb: ControlSubspaceProjector,
    initial_state,
    t: float,
    tolerances: Tolerances | None = None,
) -> TransferOutcome:
    """Weight of the evolved encoding that lands on Bob's excited configurations.

    ``arrival_state`` is the normalised projection in Bob's kept coordinates,
    or None when ``c_b`` is too small for its direction to mean anything.
    """
    tol = tolerances or default_tolerances()
    _check_bases(p, pa, pb)
    state = np.asarray(initial_state, dtype=complex)
    if state.shape != (p.dimension,):
        raise ConfigError(f"state has shape {state.shape}, expected ({p.dimension},)")
    if abs(np.linalg.norm(state) - 1.0) > tol.state_norm:
        raise ConfigError("initial state is not normalised")
    if pa.weight_outside(state) > tol.support:
        raise ConfigError("initial state has weight outside Alice's control subspace")
    arrived = evolve(p, state, t)[pb.kept_indices]
    c_b = min(float(np.vdot(arrived, arrived).real), 1.0)
    arrival = arrived / np.sqrt(c_b) if c_b >= tol.arrival_absent else None
    return TransferOutcome(c_b, arrival, 1.0 - c_b)


class FidelityBounds(NamedTuple):
    lower: float
    upper: float


def _check_cb(c_b: float) -> float:
    c_b = float(c_b)
    if not 0.0 <= c_b <= 1.0:
        raise ConfigError(f"C_B must lie in [0, 1], got {c_b!r}")
    return c_b


def average_fidelity(c_b: float) -> float:
    """Message-averaged fidelity ``1/2 + sqrt(C)/3 + C/6``.

    Exact for single-excitation encodings, a lower bound otherwise.
    """
    c_b = _check_cb(c_b)
    # one division keeps the endpoints exact (0.5 and 1.0)
    return float((3.0 + 2.0 * np.sqrt(c_b) + c_b) / 6.0)


def fidelity_bounds(c_b: float) -> FidelityBounds:
    c_b = _check_cb(c_b)
    return FidelityBounds(average_fidelity(c_b), float((2.0 + np.sqrt(c_b)) / 3.0))


def pulse_centroid(traj: Trajectory, positions: Sequence[float] | None = None) -> np.ndarray:
    prob = traj.probabilities
    x = np.arange(prob.shape[1]) if positions is None else np.asarray(positions, dtype=float)
    return (prob @ x) / prob.sum(axis=1)


def group_velocity(
    traj: Trajectory,
    window: tuple[float, float] | None = None,
    positions: Sequence[float] | None = None,
) -> float:
    """Least-squares slope of the pulse centroid against time (site spacing 1).

    ``positions`` maps basis indices to coordinates; by default index ``j`` sits
    at ``j``, which is the site itself for single-excitation trajectories.
    """
    t = np.asarray(traj.times)
    mask = np.ones(t.size, dtype=bool) if window is None else (t >= window[0]) & (t <= window[1])
    if mask.sum() < 3:
        raise ConfigError("velocity fit needs at least 3 samples in the window")
    c = pulse_centroid(traj, positions)[mask]
    slope, _ = np.polyfit(t[mask], c, 1)
    return float(slope)
