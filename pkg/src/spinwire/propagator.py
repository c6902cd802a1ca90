"""Time evolution under restricted Hamiltonians.

Static evolution reuses one Hermitian eigendecomposition for every time;
piecewise-constant evolution takes an exact exponential of each frozen
step matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .config import Tolerances, default_tolerances
from .errors import ConfigError, NumericalInvariantError
from .subspace import ExcitationBasis, RestrictedHamiltonian


def _matrix_of(h) -> np.ndarray:
    return h.matrix if isinstance(h, RestrictedHamiltonian) else np.asarray(h)


def check_hermitian(m: np.ndarray, tol: float) -> None:
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ConfigError(f"expected a square matrix, got shape {m.shape}")
    scale = max(1.0, float(np.abs(m).max(initial=0.0)))
    dev = float(np.abs(m - m.conj().T).max(initial=0.0))
    if dev > tol * scale:
        raise NumericalInvariantError(f"matrix is not Hermitian (deviation {dev:.3e})")


@dataclass(frozen=True, eq=False)
class SpectralPropagator:
    """Eigendecomposition ``H = V diag(lam) V^dagger`` giving ``U(t) = e^{-iHt}``."""

    eigenvalues: np.ndarray = field(repr=False)
    eigenvectors: np.ndarray = field(repr=False)
    source: RestrictedHamiltonian | None = field(default=None, repr=False)

    @property
    def dimension(self) -> int:
        return self.eigenvalues.shape[0]

    @property
    def basis(self) -> ExcitationBasis | None:
        return None if self.source is None else self.source.basis

    def unitary(self, t: float) -> np.ndarray:
        v = self.eigenvectors
        return (v * np.exp(-1j * self.eigenvalues * t)) @ v.conj().T

    def block(self, rows: np.ndarray, cols: np.ndarray, t: float) -> np.ndarray:
        """``U(t)[rows][:, cols]`` without forming the full unitary."""
        v = self.eigenvectors
        return (v[rows] * np.exp(-1j * self.eigenvalues * t)) @ v[cols].conj().T


def diagonalize(h, tolerances: Tolerances | None = None) -> SpectralPropagator:
    """Eigendecomposition of a Hermitian matrix or RestrictedHamiltonian.

    Eigenvalues come back ascending.
    """
    tol = tolerances or default_tolerances()
    m = _matrix_of(h)
    check_hermitian(m, tol.hermitian)
    lam, vec = np.linalg.eigh(m)
    source = h if isinstance(h, RestrictedHamiltonian) else None
    return SpectralPropagator(lam, vec, source)


def _as_state(p: SpectralPropagator, state) -> np.ndarray:
    state = np.asarray(state, dtype=complex)
    if state.shape != (p.dimension,):
        raise ConfigError(f"state has shape {state.shape}, propagator dimension is {p.dimension}")
    return state


def evolve(p: SpectralPropagator, state, t: float) -> np.ndarray:
    state = _as_state(p, state)
    v = p.eigenvectors
    return v @ (np.exp(-1j * p.eigenvalues * t) * (v.conj().T @ state))


@dataclass(frozen=True, eq=False)
class Trajectory:
    """States sampled at increasing times; ``states[k]`` is the state at ``times[k]``."""

    times: np.ndarray
    states: np.ndarray = field(repr=False)
    basis: ExcitationBasis | None = field(default=None, repr=False)

    def __len__(self) -> int:
        return len(self.times)

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.states) ** 2

    def max_norm_error(self) -> float:
        if not len(self):
            return 0.0
        return float(np.abs(np.linalg.norm(self.states, axis=1) - 1.0).max())


def _check_times(times) -> np.ndarray:
    times = np.asarray(times, dtype=float).reshape(-1)
    if times.size > 1 and np.any(np.diff(times) <= 0):
        raise ConfigError("times must be strictly increasing")
    return times


def sample_trajectory(p: SpectralPropagator, state0, times: Sequence[float]) -> Trajectory:
    times = _check_times(times)
    state0 = _as_state(p, state0)
    v = p.eigenvectors
    coeffs = v.conj().T @ state0
    phases = np.exp(-1j * np.outer(times, p.eigenvalues))
    states = (phases * coeffs) @ v.T
    return Trajectory(times, states, p.basis)


def step_exponential(m: np.ndarray, dt: float, tol: float) -> np.ndarray:
    """``e^{-i m dt}`` for a Hermitian matrix, via a fresh eigendecomposition."""
    check_hermitian(m, tol)
    lam, v = np.linalg.eigh(m)
    return (v * np.exp(-1j * lam * dt)) @ v.conj().T


def step_piecewise(
    h_of_step: Callable[[int, np.ndarray], object],
    state0,
    dt: float,
    n_steps: int,
    *,
    t0: float = 0.0,
    basis: ExcitationBasis | None = None,
    tolerances: Tolerances | None = None,
) -> Trajectory:
    """Integrate with the Hamiltonian frozen over each step.

    ``h_of_step(k, state)`` receives the step index and the state at the start
    of the step and returns that step's matrix (or RestrictedHamiltonian), so
    feedback control can read the current state.  The update is
    ``state_{k+1} = exp(-i H_k dt) state_k`` with an exact exponential.
    """
    if dt <= 0:
        raise ConfigError("dt must be positive")
    if n_steps < 0:
        raise ConfigError("n_steps must be non-negative")
    tol = tolerances or default_tolerances()
    state = np.asarray(state0, dtype=complex).copy()
    states = np.empty((n_steps + 1, state.size), dtype=complex)
    states[0] = state
    for k in range(n_steps):
        m = _matrix_of(h_of_step(k, state))
        if m.shape != (state.size, state.size):
            raise ConfigError(f"step {k}: matrix shape {m.shape} does not match state")
        state = step_exponential(m, dt, tol.hermitian) @ state
        states[k + 1] = state
    times = t0 + dt * np.arange(n_steps + 1)
    return Trajectory(times, states, basis)
