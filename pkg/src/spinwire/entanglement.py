"""Entanglement carried through the channel, measured by Wootters concurrence.

Two-qubit matrices use the basis order |00>, |01>, |10>, |11> with Alice's
additional (non-interacting) spin first and Bob's decoded spin second.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .config import Tolerances, default_tolerances
from .errors import ConfigError, NumericalInvariantError

SIGMA_YY = np.kron(np.array([[0, -1j], [1j, 0]]), np.array([[0, -1j], [1j, 0]]))


@dataclass(frozen=True, eq=False)
class TwoQubitState:
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        tol = default_tolerances().psd
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (4, 4):
            raise ConfigError(f"two-qubit state must be 4x4, got {m.shape}")
        if np.abs(m - m.conj().T).max() > tol:
            raise ConfigError("density matrix is not Hermitian")
        if abs(np.trace(m).real - 1.0) > tol:
            raise ConfigError("density matrix does not have unit trace")
        if np.linalg.eigvalsh(m).min() < -tol:
            raise ConfigError("density matrix is not positive semidefinite")
        object.__setattr__(self, "matrix", m)


@dataclass(frozen=True)
class LeakSpec:
    """``<0|rho_tilde|0>`` of the decoded leak state."""

    rho_tilde_11: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.rho_tilde_11 <= 1.0:
            raise ConfigError(f"rho_tilde_11 must lie in [0, 1], got {self.rho_tilde_11!r}")


def decoded_joint_state(
    c_b: float, leak: LeakSpec, rho_tilde_offdiag: complex | None = None
) -> TwoQubitState:
    """Joint state of Alice's spare spin and Bob's decoded spin.

    ``rho_tilde_offdiag`` is ``<0|rho_tilde|1>``; the default leaves the leak
    state diagonal.
    """
    if not 0.0 <= c_b <= 1.0:
        raise ConfigError(f"C_B must lie in [0, 1], got {c_b!r}")
    r = leak.rho_tilde_11
    z = 0.0 if rho_tilde_offdiag is None else complex(rho_tilde_offdiag)
    if abs(z) ** 2 > r * (1.0 - r) + default_tolerances().psd:
        raise ConfigError("off-diagonal element makes rho_tilde non-positive")
    rho_tilde = np.array([[r, z], [np.conj(z), 1.0 - r]], dtype=complex)
    rho = np.zeros((4, 4), dtype=complex)
    rho[2:, 2:] = (1.0 - c_b) * rho_tilde
    rho[0, 0] += 1.0
    rho[3, 3] += c_b
    rho[0, 3] += np.sqrt(c_b)
    rho[3, 0] += np.sqrt(c_b)
    return TwoQubitState(rho / 2.0)


def _matrix(rho) -> np.ndarray:
    return rho.matrix if isinstance(rho, TwoQubitState) else np.asarray(rho, dtype=complex)


def wootters_singular_values(rho, tolerances: Tolerances | None = None) -> np.ndarray:
    """``sqrt(lambda_j)`` in nonincreasing order.

    With ``rho = Psi Psi^dagger`` these are the singular values of
    ``Psi^T (sigma_y x sigma_y) Psi``; working with them directly avoids taking
    square roots of eigenvalues that are zero up to round-off.
    """
    tol = tolerances or default_tolerances()
    m = _matrix(rho)
    w, v = np.linalg.eigh(m)
    if w.min() < -tol.psd:
        raise ConfigError(f"density matrix has eigenvalue {w.min():.3e} < 0")
    psi = v * np.sqrt(np.clip(w, 0.0, None))
    return np.linalg.svd(psi.T @ SIGMA_YY @ psi, compute_uv=False)


def wootters_lambdas(rho, tolerances: Tolerances | None = None) -> np.ndarray:
    """Eigenvalues of ``rho (sy x sy) rho* (sy x sy)``, nonincreasing."""
    return wootters_singular_values(rho, tolerances) ** 2


def concurrence(rho, tolerances: Tolerances | None = None) -> float:
    mu = wootters_singular_values(rho, tolerances)
    return float(max(0.0, mu[0] - mu[1:].sum()))


def closed_form_lambdas(c_b: float, rho_tilde_11: float) -> np.ndarray:
    a = np.sqrt(rho_tilde_11 * c_b + 1.0 - rho_tilde_11)
    s = np.sqrt(c_b)
    return np.array([(a + s) ** 2 / 4.0, (a - s) ** 2 / 4.0, 0.0, 0.0])


class ConcurrenceCheck(NamedTuple):
    entanglement: float
    lambda1: float
    lambda2: float


def verify_concurrence_identity(
    c_b: float,
    leak: LeakSpec,
    rho_tilde_offdiag: complex | None = None,
    *,
    identity_tol: float = 1e-8,
    lambda_tol: float = 1e-9,
) -> ConcurrenceCheck:
    """Check that the transmitted concurrence equals ``sqrt(C_B)``.

    Returns the concurrence with the closed-form ``lambda_1, lambda_2``.  A
    mismatch raises NumericalInvariantError, which would indicate a bug.
    """
    rho = decoded_joint_state(c_b, leak, rho_tilde_offdiag)
    e = concurrence(rho)
    lam = wootters_lambdas(rho)
    expected = closed_form_lambdas(c_b, leak.rho_tilde_11)
    if abs(e - np.sqrt(c_b)) > identity_tol:
        raise NumericalInvariantError(f"concurrence {e!r} differs from sqrt(C_B) = {np.sqrt(c_b)!r}")
    if np.abs(lam - expected).max() > lambda_tol:
        raise NumericalInvariantError(f"lambdas {lam} differ from closed form {expected}")
    return ConcurrenceCheck(e, float(expected[0]), float(expected[1]))
