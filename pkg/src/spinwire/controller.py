"""Boundary control of an XY chain by shadowing a phantom-extended chain.

The physical chain has N sites; Alice modulates the coupling on link (0, 1)
and Bob the one on link (N-2, N-1).  A static modified chain adds ``N_P``
phantom sites at each end with unit couplings (the two modulated links are
also fixed to 1), so physical site ``j`` is extended site ``j + N_P``.  The
optimal single-excitation encoding on the modified chain defines a target
trajectory ``psi``; the controls ``J_A = psi_0 / phi_0`` and
``J_B = psi_{N-1} / phi_{N-1}`` (physical labels) make the physical
trajectory ``phi``, started from one excitation on site 0, follow ``psi`` over
the bulk.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .config import Tolerances, default_tolerances
from .encoder import (
    ControlSubspaceProjector,
    EncodingSolution,
    projected_propagator,
    refine_maximum,
    solution_from_block,
    time_grid,
)
from .errors import ConfigError, NetworkError, NumericalInvariantError
from .network import ChainSpec, CouplingKind, SpinNetwork
from .propagator import (
    SpectralPropagator,
    Trajectory,
    diagonalize,
    sample_trajectory,
    step_piecewise,
)
from .subspace import restrict_hamiltonian

# Magnetic-field controls are only needed for non-XY couplings; those are not
# derived here, so the four field schedules are identically zero.
FIELD_CONTROLS = ("B_A1", "B_A2", "B_B1", "B_B2")


@dataclass(frozen=True)
class PhantomExtension:
    physical: ChainSpec
    n_phantom: int
    extended: ChainSpec

    @property
    def n_physical(self) -> int:
        return self.physical.n_sites

    @property
    def alice_sites(self) -> tuple[int, ...]:
        """Modified Alice: the first ``N_P + 1`` extended sites."""
        return tuple(range(self.n_phantom + 1))

    @property
    def bob_sites(self) -> tuple[int, ...]:
        m = self.extended.n_sites
        return tuple(range(m - self.n_phantom - 1, m))

    def extended_index(self, physical_site: int) -> int:
        return physical_site + self.n_phantom

    def extended_network(self) -> SpinNetwork:
        return self.extended.to_network(self.n_phantom + 1, self.n_phantom + 1)


def build_phantom_system(physical: ChainSpec, n_phantom: int) -> PhantomExtension:
    if physical.kind is not CouplingKind.XY:
        raise NetworkError("dynamic control is only derived for XY chains")
    if physical.n_sites < 4:
        raise NetworkError("the physical chain needs at least 4 sites")
    if n_phantom < 1:
        raise ConfigError("need at least one phantom site per side")
    bulk = physical.couplings[1:-1]
    ones = (1.0,) * (n_phantom + 1)
    extended = ChainSpec(physical.n_sites + 2 * n_phantom, ones + bulk + ones, CouplingKind.XY)
    return PhantomExtension(physical, n_phantom, extended)


def parity_gauge(n_sites: int, origin: int) -> np.ndarray:
    """``i**(j - origin)``; multiplying an XY single-excitation state by it makes it real.

    Starting from a real amplitude on ``origin``, each hop multiplies by ``-i``,
    so amplitudes are ``(-i)**(j - origin)`` times real numbers.
    """
    return 1j ** (np.mod(np.arange(n_sites) - origin, 4))


def parity_residual(states: np.ndarray, origin: int) -> float:
    """Largest deviation from the alternating real / imaginary structure."""
    states = np.atleast_2d(states)
    g = parity_gauge(states.shape[1], origin)
    return float(np.abs((states * g).imag).max(initial=0.0))


def real_gauge_encoding(
    p: SpectralPropagator,
    pa: ControlSubspaceProjector,
    pb: ControlSubspaceProjector,
    t: float,
    origin: int,
    tolerances: Tolerances | None = None,
) -> EncodingSolution:
    """Top singular triplet computed in the real change of variables.

    For a bipartite XY chain the projected propagator becomes real after the
    parity gauge, so its singular vectors can be taken real there.  Doing the
    SVD on that real matrix keeps the alternating structure exact even when
    ``s_1`` is nearly degenerate, where a complex SVD may mix the pair.
    """
    tol = tolerances or default_tolerances()
    block = projected_propagator(p, pa, pb, t)
    g = parity_gauge(p.dimension, origin)
    real_block = g[pb.kept_indices][:, None] * block / g[pa.kept_indices][None, :]
    imag = float(np.abs(real_block.imag).max(initial=0.0))
    if imag > tol.imag_residue * max(1.0, float(np.abs(real_block).max(initial=0.0))):
        raise NumericalInvariantError(f"gauged propagator is not real (residue {imag:.2e})")
    sol = solution_from_block(real_block.real, pa, pb, t, 1, tol)
    w = sol.right_vectors[0] / g
    v = sol.left_vectors[0] / g
    return EncodingSolution(sol.time, sol.singular_values, w[None, :], v[None, :], 1)


@dataclass(frozen=True, eq=False)
class ControlSchedule:
    """Derived couplings for each step ``k`` (applied on ``[k dt, (k+1) dt)``)."""

    dt: float
    j_a: np.ndarray
    j_b: np.ndarray
    achieved_c_b: float  # |phi_{N-1}(T)|^2: the message read from Bob's end spin
    achieved_c_b_pair: float  # weight on Bob's two sites at T
    psi_traj: Trajectory = field(repr=False)  # extended chain, n_steps + 1 samples
    phi_traj: Trajectory = field(repr=False)  # physical chain, n_steps + 1 samples
    n_phantom: int
    static_c_b: float  # s_1**2 of the modified chain
    clamp_count: int
    held_count: int
    max_imag_residue: float
    encoding: EncodingSolution | None = field(default=None, repr=False)

    @property
    def n_steps(self) -> int:
        return len(self.j_a)

    @property
    def t_total(self) -> float:
        return self.dt * self.n_steps

    @property
    def step_times(self) -> np.ndarray:
        return self.dt * np.arange(self.n_steps)

    @property
    def field_controls(self) -> dict[str, np.ndarray]:
        return {name: np.zeros(self.n_steps) for name in FIELD_CONTROLS}

    def physical_psi(self) -> np.ndarray:
        """Target amplitudes on the physical sites, ``(n_steps + 1, N)``."""
        n = self.phi_traj.states.shape[1]
        return self.psi_traj.states[:, self.n_phantom : self.n_phantom + n]

    def summary(self) -> dict:
        return {
            "T": self.t_total,
            "n_steps": self.n_steps,
            "n_phantom": self.n_phantom,
            "achieved_c_b": self.achieved_c_b,
            "achieved_c_b_pair": self.achieved_c_b_pair,
            "static_c_b": self.static_c_b,
            "shadow_residual": shadow_residual(self),
            "clamp_count": self.clamp_count,
            "held_count": self.held_count,
            "max_imag_residue": self.max_imag_residue,
        }


class _ChainStepper:
    """Single-excitation Hamiltonian of the physical chain with variable end links."""

    def __init__(self, physical: ChainSpec):
        n = physical.n_sites
        bulk = (0.0, *physical.couplings[1:-1], 0.0)
        self.static = restrict_hamiltonian(ChainSpec(n, bulk, physical.kind).to_network(1, 1), 1).matrix
        self.left = self._unit_link(n, 0, physical.kind)
        self.right = self._unit_link(n, n - 2, physical.kind)

    @staticmethod
    def _unit_link(n: int, link: int, kind: CouplingKind) -> np.ndarray:
        couplings = [0.0] * (n - 1)
        couplings[link] = 1.0
        return restrict_hamiltonian(ChainSpec(n, tuple(couplings), kind).to_network(1, 1), 1).matrix

    def matrix(self, j_a: float, j_b: float) -> np.ndarray:
        return self.static + j_a * self.left + j_b * self.right


def _control_value(
    target: complex, actual: complex, previous: float, tol: Tolerances
) -> tuple[float, bool, float]:
    """``(value, held, imaginary residue)`` for one ratio ``target / actual``."""
    if abs(actual) < tol.zero_ratio:
        return previous, True, 0.0
    ratio = target / actual
    residue = abs(ratio.imag)
    if residue > tol.imag_abort:
        raise NumericalInvariantError(
            f"control ratio has imaginary part {residue:.2e}; the chain is not XY-structured"
        )
    return float(ratio.real), False, residue


def derive_controls(
    ext: PhantomExtension,
    t_total: float,
    n_steps: int,
    tolerances: Tolerances | None = None,
) -> ControlSchedule:
    """Derive ``J_A(t)``, ``J_B(t)`` on a grid of ``n_steps`` equal steps.

    Each step's couplings come from the trajectories at the start of the step,
    are projected to their real part, clipped to [-1, 1], and then held fixed
    while ``phi`` is advanced by an exact exponential.  When the physical
    boundary amplitude is below ``tolerances.zero_ratio`` the ratio is a 0/0
    case and the previous value is kept (Bob's starts from the nominal coupling).
    """
    if n_steps < 1:
        raise ConfigError("n_steps must be at least 1")
    if t_total <= 0:
        raise ConfigError("t_total must be positive")
    tol = tolerances or default_tolerances()
    n = ext.n_physical
    npad = ext.n_phantom
    h_ext = restrict_hamiltonian(ext.extended_network(), 1)
    p_ext = diagonalize(h_ext, tol)
    pa = ControlSubspaceProjector.for_sites(h_ext.basis, ext.alice_sites)
    pb = ControlSubspaceProjector.for_sites(h_ext.basis, ext.bob_sites)
    sol = real_gauge_encoding(p_ext, pa, pb, t_total, origin=npad, tolerances=tol)
    w1 = sol.encoding(0)

    dt = t_total / n_steps
    psi = sample_trajectory(p_ext, w1, dt * np.arange(n_steps + 1))
    result = shadow_controls(ext.physical, psi.states[:, npad : npad + n], dt, tol)
    final = result.phi.states[-1]
    return ControlSchedule(
        dt=dt,
        j_a=result.j_a,
        j_b=result.j_b,
        achieved_c_b=float(abs(final[n - 1]) ** 2),
        achieved_c_b_pair=float(abs(final[n - 1]) ** 2 + abs(final[n - 2]) ** 2),
        psi_traj=psi,
        phi_traj=result.phi,
        n_phantom=npad,
        static_c_b=sol.c_b,
        clamp_count=result.clamp_count,
        held_count=result.held_count,
        max_imag_residue=result.max_imag_residue,
        encoding=sol,
    )


@dataclass(frozen=True, eq=False)
class ShadowResult:
    j_a: np.ndarray
    j_b: np.ndarray
    phi: Trajectory
    clamp_count: int
    held_count: int
    max_imag_residue: float


def shadow_controls(
    physical: ChainSpec,
    targets: np.ndarray,
    dt: float,
    tolerances: Tolerances | None = None,
) -> ShadowResult:
    """Feedback loop forcing the physical chain to follow ``targets``.

    ``targets[k]`` holds the desired amplitudes on the N physical sites at
    ``t = k dt``; ``len(targets) - 1`` steps are taken from one excitation on
    site 0.  See :func:`derive_controls` for the update rule.
    """
    tol = tolerances or default_tolerances()
    targets = np.asarray(targets, dtype=complex)
    n = physical.n_sites
    if targets.ndim != 2 or targets.shape[1] != n or targets.shape[0] < 2:
        raise ConfigError(f"targets must have shape (n_steps + 1, {n}), got {targets.shape}")
    n_steps = targets.shape[0] - 1
    stepper = _ChainStepper(physical)
    j_a = np.empty(n_steps)
    j_b = np.empty(n_steps)
    counters = {"clamp": 0, "held": 0, "imag": 0.0}
    prev = [1.0, float(physical.couplings[-1])]

    def h_of_step(k: int, phi: np.ndarray) -> np.ndarray:
        values = []
        for slot, site in ((0, 0), (1, n - 1)):
            value, held, residue = _control_value(targets[k, site], phi[site], prev[slot], tol)
            counters["held"] += held
            counters["imag"] = max(counters["imag"], residue)
            if abs(value) > 1.0:
                counters["clamp"] += abs(value) > 1.0 + tol.control_bound
                value = float(np.clip(value, -1.0, 1.0))
            prev[slot] = value
            values.append(value)
        j_a[k], j_b[k] = values
        return stepper.matrix(*values)

    phi0 = np.zeros(n, dtype=complex)
    phi0[0] = 1.0
    phi = step_piecewise(h_of_step, phi0, dt, n_steps, tolerances=tol)
    return ShadowResult(j_a, j_b, phi, counters["clamp"], counters["held"], float(counters["imag"]))


def shadow_residual(schedule: ControlSchedule) -> float:
    """Max over samples and bulk sites 1..N-2 of ``|phi_j - psi_j|``."""
    phi = schedule.phi_traj.states
    psi = schedule.physical_psi()
    return float(np.abs(phi[:, 1:-1] - psi[:, 1:-1]).max(initial=0.0))


def boundary_partition_error(schedule: ControlSchedule) -> float:
    """Largest mismatch between the phantom-side weights of ``psi`` and ``|phi|^2`` at the ends."""
    npad = schedule.n_phantom
    psi = schedule.psi_traj.states
    phi = schedule.phi_traj.states
    left = np.sum(np.abs(psi[:, : npad + 1]) ** 2, axis=1) - np.abs(phi[:, 0]) ** 2
    right = np.sum(np.abs(psi[:, -(npad + 1) :]) ** 2, axis=1) - np.abs(phi[:, -1]) ** 2
    return float(max(np.abs(left).max(), np.abs(right).max()))


def choose_time(
    ext: PhantomExtension,
    t_grid: Sequence[float],
    *,
    refine: bool = False,
) -> tuple[float, float]:
    """``(T, s_1)`` maximising the modified chain's top singular value over ``t_grid``."""
    from .encoder import best_time

    h_ext = restrict_hamiltonian(ext.extended_network(), 1)
    p = diagonalize(h_ext)
    pa = ControlSubspaceProjector.for_sites(h_ext.basis, ext.alice_sites)
    pb = ControlSubspaceProjector.for_sites(h_ext.basis, ext.bob_sites)
    return best_time(p, pa, pb, t_grid, refine=refine)


def replay_controls(
    physical: ChainSpec, j_a: Sequence[float], j_b: Sequence[float], dt: float
) -> Trajectory:
    """Run a control schedule on a (possibly perturbed) chain from one excitation on site 0."""
    j_a = np.asarray(j_a, dtype=float)
    j_b = np.asarray(j_b, dtype=float)
    if j_a.shape != j_b.shape:
        raise ConfigError("J_A and J_B schedules differ in length")
    if physical.kind is not CouplingKind.XY:
        raise NetworkError("control replay is only defined for XY chains")
    stepper = _ChainStepper(physical)
    phi0 = np.zeros(physical.n_sites, dtype=complex)
    phi0[0] = 1.0
    return step_piecewise(lambda k, _s: stepper.matrix(j_a[k], j_b[k]), phi0, dt, len(j_a))


def arrival_weights(traj: Trajectory) -> tuple[float, float]:
    """``(|phi_{N-1}|^2, |phi_{N-2}|^2 + |phi_{N-1}|^2)`` at the last sample."""
    final = traj.states[-1]
    end = float(abs(final[-1]) ** 2)
    return end, end + float(abs(final[-2]) ** 2)


def uncontrolled_baseline(
    physical: ChainSpec,
    t_max: float,
    t_grid: Sequence[float] | None = None,
    *,
    refine: bool = True,
    n_peaks: int = 8,
) -> float:
    """Best ``C_B(t)`` with static couplings, one excitation injected on site 0.

    Bob holds the last two sites (only the last one for a 2-site chain).  The
    coarse grid (default step 0.25 on ``[0, t_max]``) is refined around its
    ``n_peaks`` best samples, since the arrival peaks can be much narrower
    than the grid.
    """
    if t_grid is None:
        t_grid = time_grid(0.0, t_max)
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.size == 0:
        raise ConfigError("empty time grid")
    if t_grid.min() < 0 or t_grid.max() > t_max + 1e-12:
        raise ConfigError("time grid must lie within [0, t_max]")
    n = physical.n_sites
    n_bob = min(2, n - 1)
    p = diagonalize(restrict_hamiltonian(physical.to_network(1, n_bob), 1))
    rows = np.arange(n - n_bob, n)
    left = p.eigenvectors[rows] * p.eigenvectors[0].conj()

    def c_b(times) -> np.ndarray:
        amp = left @ np.exp(-1j * np.outer(p.eigenvalues, np.atleast_1d(times)))
        return np.sum(np.abs(amp) ** 2, axis=0)

    values = c_b(t_grid)
    if not refine or t_grid.size < 2:
        return float(values.max())
    _, best = refine_maximum(lambda t: float(c_b(t)[0]), t_grid, values, n_peaks=n_peaks)
    return best
