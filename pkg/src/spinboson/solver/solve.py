# Copyright 2024 Jacob Baumbach
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Restarted relaxation iteration and selection of the ground state"""
import logging
import time
from collections import deque
from dataclasses import dataclass, field
from functools import partial
from multiprocessing import Pool
from typing import Any, Deque, Dict, List, Optional, Sequence, Tuple, cast

import numpy as np
import pandas as pd

from spinboson.ansatz.kernels import compute_kernels, energy_from_kernels
from spinboson.ansatz.operator import SpinBlockHamiltonian
from spinboson.ansatz.state import VariationalState, displacement_width, random_state
from spinboson.exception.configuration_error import ConfigurationError
from spinboson.exception.numerics_error import NonConvergenceError, SpinBosonError
from spinboson.model.bath import DiscretizedBath
from spinboson.model.spec import ModelSpec
from spinboson.observables import (
    ObservableSet,
    compute_observables,
    relabel_to_source_frame,
    spin_expectations,
)
from spinboson.solver.config import SolverConfig
from spinboson.solver.iteration import (
    AnnealingSchedule,
    parameter_residual,
    relax_and_anneal,
    update_targets,
)
from spinboson.solver.variance import energy_variance

logger = logging.getLogger(__name__)

TRAJECTORY_COLUMNS = ["restart", "sweep", "E", "stage", "factor"]
STRUCTURED_KINDS = ("free", "delocalized", "localized")
SEED_NOISE = 0.05
ORDER_FLOOR = 1e-6
"""order parameters smaller than this carry no sign"""


def restart_rng(seed: int, restart: int) -> np.random.Generator:
    """Random stream of one restart, independent of how restarts are scheduled"""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(restart,)))


def classical_displacement(bath: DiscretizedBath, delta: float, cap: float = 5.0) -> np.ndarray:
    """``-(c_k + i d_k) / (w_k + |Delta| / 2)``, clipped in magnitude at ``cap``"""
    shift = -(bath.diagonal + 1j * bath.off_diagonal) / (bath.omega + abs(delta) / 2.0)
    magnitude = np.abs(shift)
    return np.where(magnitude > cap, shift * cap / np.maximum(magnitude, cap), shift)


def structured_state(
    kind: str,
    rng: np.random.Generator,
    bath: DiscretizedBath,
    spec: ModelSpec,
    multiplicity: int,
    real: bool = False,
) -> VariationalState:
    """Noisy copy of a free, delocalized (``f = -g``) or localized (``f = g``) guess

    Raises:
        ConfigurationError: unknown ``kind``
    """
    if kind not in STRUCTURED_KINDS:
        raise ConfigurationError(f"unknown seed {kind!r}, expected one of {STRUCTURED_KINDS}")
    N, M = multiplicity, bath.num_modes
    shift = classical_displacement(bath, spec.delta)
    if kind == "free":
        guess = VariationalState.free(N, M, spec.delta)
        A, B, f, g = guess.A, guess.B, guess.f, guess.g
    else:
        root = np.sqrt(0.5 / N)
        A = np.full(N, root, dtype=complex)
        B = np.full(N, root if spec.delta >= 0 else -root, dtype=complex)
        f = np.tile(shift, (N, 1))
        g = -f if kind == "delocalized" else f.copy()
    scale = SEED_NOISE * np.maximum(np.abs(shift), SEED_NOISE)
    noisy = random_state(rng, N, scale, real=real)
    return VariationalState(
        A + SEED_NOISE * noisy.A,
        B + SEED_NOISE * noisy.B,
        f + noisy.f,
        g + noisy.g,
    )


def initial_state(
    restart: int,
    spec: ModelSpec,
    bath: DiscretizedBath,
    config: SolverConfig,
) -> VariationalState:
    """Starting point of restart ``restart``

    The first ``structured_fraction`` of the restarts cycle through the
    structured guesses; the rest are random.
    """
    rng = restart_rng(config.seed, restart)
    structured = int(round(config.structured_fraction * config.restarts))
    if restart < structured:
        kind = STRUCTURED_KINDS[restart % len(STRUCTURED_KINDS)]
        return structured_state(
            kind, rng, bath, spec, config.multiplicity, config.real_mode
        )
    width = displacement_width(
        bath.diagonal, bath.omega, spec.delta, config.init_scale, eta=bath.eta
    )
    return random_state(rng, config.multiplicity, width, real=config.real_mode)


@dataclass(frozen=True, eq=False)
class TrajectoryResult:
    """Outcome of one restart

    Attributes:
        restart (int): restart index
        state (Optional[VariationalState]): last state, normalized
        energy (float): its energy, ``nan`` when the trajectory failed
        sweeps (int): sweeps used
        converged (bool): both tolerances met
        residual (float): last ``max |x_next - x|``
        frozen (int): near-singular components skipped over all sweeps
        error (Optional[str]): why the trajectory was abandoned
        log (List[Tuple[int, int, float, int, float]]): rows of
            ``TRAJECTORY_COLUMNS`` when verbose
    """

    restart: int
    state: Optional[VariationalState]
    energy: float
    sweeps: int
    converged: bool
    residual: float
    frozen: int = 0
    error: Optional[str] = None
    log: List[Tuple[int, int, float, int, float]] = field(default_factory=list)


def run_trajectory(
    spec: ModelSpec,
    bath: DiscretizedBath,
    config: SolverConfig,
    restart: int,
    start: Optional[VariationalState] = None,
) -> TrajectoryResult:
    """Iterate one restart until the windowed energy change and the
    parameter drift are both below tolerance, or the sweep budget runs out.

    Numerical failures end the trajectory and are reported in the result,
    never raised.
    """
    hamiltonian = SpinBlockHamiltonian.from_model(spec, bath)
    state = start if start is not None else initial_state(restart, spec, bath, config)
    schedule = AnnealingSchedule(config)
    energies: Deque[float] = deque(maxlen=config.window + 1)
    log: List[Tuple[int, int, float, int, float]] = []
    frozen_total, residual, E = 0, np.inf, np.nan
    sweep = 0
    try:
        for sweep in range(1, config.max_sweeps + 1):
            kernels = compute_kernels(state, bath, spec, hamiltonian)
            current = energy_from_kernels(state, kernels)
            state = state.scaled(1.0 / np.sqrt(current.norm))
            E = current.E
            targets, frozen = update_targets(state, kernels, bath, E)
            frozen_total += frozen
            residual = parameter_residual(state, targets)
            energies.append(E)
            change = np.inf
            if len(energies) == energies.maxlen:
                change = abs(E - energies[0]) / max(abs(E), np.finfo(float).tiny)
            if config.verbose and sweep % config.window == 0:
                log.append((restart, sweep, E, schedule.stage, schedule.factor))
            if change < config.energy_tolerance and residual < config.parameter_tolerance:
                logger.info(f"restart {restart} converged after {sweep} sweeps, E = {E:.12f}")
                return TrajectoryResult(
                    restart, state, E, sweep, True, residual, frozen_total, log=log
                )
            schedule.tick(change)
            state = relax_and_anneal(state, targets, schedule, config.real_mode)
    except (ValueError, SpinBosonError) as error:
        logger.warning(f"restart {restart} abandoned at sweep {sweep}: {error}")
        return TrajectoryResult(
            restart, None, np.nan, sweep, False, residual, frozen_total, str(error), log
        )
    if frozen_total:
        logger.info(f"restart {restart} skipped {frozen_total} near-singular components")
    logger.info(
        f"restart {restart} hit the sweep budget, E = {E:.12f}, residual = {residual:.3e}"
    )
    return TrajectoryResult(restart, state, E, sweep, False, residual, frozen_total, log=log)


def run_trajectories(
    spec: ModelSpec,
    bath: DiscretizedBath,
    config: SolverConfig,
    restarts: Optional[Sequence[int]] = None,
) -> List[TrajectoryResult]:
    """Every restart, in restart order, on ``config.resolved_workers`` processes"""
    indices = list(range(config.restarts)) if restarts is None else list(restarts)
    job = partial(run_trajectory, spec, bath, config)
    workers = min(config.resolved_workers, len(indices))
    if workers <= 1:
        return [job(i) for i in indices]
    with Pool(workers) as pool:  # pragma: no cover
        return pool.map(job, indices)


def trajectory_table(trajectories: Sequence[TrajectoryResult]) -> pd.DataFrame:
    """Per-window convergence logs of all trajectories"""
    rows = [row for trajectory in trajectories for row in trajectory.log]
    return pd.DataFrame(rows, columns=TRAJECTORY_COLUMNS)


def _order_parameter(state: VariationalState, bath: DiscretizedBath, spec: ModelSpec) -> float:
    kernels = compute_kernels(state, bath, spec)
    _, sigma_y, sigma_z = spin_expectations(state, kernels)
    return sigma_z if abs(sigma_z) >= abs(sigma_y) else sigma_y


@dataclass(frozen=True, eq=False)
class GroundStateRecord:
    """The certified winner of a solve

    Attributes:
        spec (ModelSpec): model that was solved
        energy (float): E_g
        variance (float): ``<H^2> - <H>^2`` of the winner
        state (VariationalState): winning state, normalized
        sweeps (int): sweeps of the winning trajectory
        restart_index (int): which restart won
        degenerate_partner (bool): a converged solution with the same
            energy and the opposite order parameter exists
        partner_energy (Optional[float]): energy of that solution
        partner_order (Optional[float]): its signed order parameter
        converged_count (int): trajectories meeting both tolerances
        residual (float): final parameter drift of the winner
        observables (Optional[ObservableSet]): measured on the winner, in the
            frame of the model the user asked for
        spec_fingerprint (str): adler32 of the model
        bath_fingerprint (str): adler32 of the discretized modes
        wall_time (float): seconds spent
        trajectory_log (Optional[pd.DataFrame]): verbose per-window rows
    """

    spec: ModelSpec
    energy: float
    variance: float
    state: VariationalState
    sweeps: int
    restart_index: int
    degenerate_partner: bool
    partner_energy: Optional[float]
    partner_order: Optional[float]
    converged_count: int
    residual: float
    observables: Optional[ObservableSet]
    spec_fingerprint: str
    bath_fingerprint: str
    wall_time: float
    trajectory_log: Optional[pd.DataFrame] = None

    def __post_init__(self) -> None:
        if not np.isfinite(self.energy):
            raise ValueError(f"ground-state energy must be finite, got {self.energy}")
        if self.variance < -1e-10:
            raise ValueError(f"energy variance {self.variance:.3e} is negative")

    def to_dict(self) -> Dict[str, Any]:
        """Json form; the trajectory log is exported separately"""
        return {
            "spec": self.spec.to_dict(),
            "energy": self.energy,
            "variance": self.variance,
            "state": self.state.to_dict(),
            "sweeps": self.sweeps,
            "restart_index": self.restart_index,
            "degenerate_partner": self.degenerate_partner,
            "partner_energy": self.partner_energy,
            "partner_order": self.partner_order,
            "converged_count": self.converged_count,
            "residual": self.residual,
            "observables": None if self.observables is None else self.observables.to_dict(),
            "spec_fingerprint": self.spec_fingerprint,
            "bath_fingerprint": self.bath_fingerprint,
            "wall_time": self.wall_time,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "GroundStateRecord":
        """Inverse of :meth:`to_dict`"""
        observables = data.get("observables")
        return cls(
            spec=ModelSpec.from_dict(data["spec"]),
            energy=float(data["energy"]),
            variance=float(data["variance"]),
            state=VariationalState.from_dict(data["state"]),
            sweeps=int(data["sweeps"]),
            restart_index=int(data["restart_index"]),
            degenerate_partner=bool(data["degenerate_partner"]),
            partner_energy=data.get("partner_energy"),
            partner_order=data.get("partner_order"),
            converged_count=int(data["converged_count"]),
            residual=float(data["residual"]),
            observables=None if observables is None else ObservableSet.from_dict(observables),
            spec_fingerprint=data["spec_fingerprint"],
            bath_fingerprint=data["bath_fingerprint"],
            wall_time=float(data["wall_time"]),
        )


def select_winner(
    converged: Sequence[TrajectoryResult],
    bath: DiscretizedBath,
    spec: ModelSpec,
    gap: float,
) -> Tuple[TrajectoryResult, float]:
    """Lowest energy, ties within ``gap`` broken by the lowest variance"""
    ranked = sorted(converged, key=lambda t: (t.energy, t.restart))
    best = ranked[0].energy
    tied = [t for t in ranked if t.energy - best <= gap * max(abs(best), 1.0)]
    scored = []
    for trajectory in tied:
        state = cast(VariationalState, trajectory.state)
        scored.append((energy_variance(state, bath, spec), trajectory.restart, trajectory))
    variance, _, winner = min(scored, key=lambda item: (item[0], item[1]))
    return winner, variance


def find_partner(
    winner: TrajectoryResult,
    converged: Sequence[TrajectoryResult],
    bath: DiscretizedBath,
    spec: ModelSpec,
    gap: float,
) -> Tuple[float, Optional[TrajectoryResult], Optional[float]]:
    """Signed order parameter of the winner and its degenerate mirror image, if any"""
    order = _order_parameter(cast(VariationalState, winner.state), bath, spec)
    if abs(order) < ORDER_FLOOR:
        return order, None, None
    for other in converged:
        if other.restart == winner.restart or other.state is None:
            continue
        if abs(other.energy - winner.energy) > gap * max(abs(winner.energy), 1.0):
            continue
        other_order = _order_parameter(other.state, bath, spec)
        if abs(other_order) >= ORDER_FLOOR and np.sign(other_order) != np.sign(order):
            return order, other, other_order
    return order, None, None


def solve(
    spec: ModelSpec,
    bath: DiscretizedBath,
    config: SolverConfig,
    measure: bool = True,
) -> GroundStateRecord:
    """Lowest-energy converged solution over all restarts

    Args:
        spec (ModelSpec): model to solve
        bath (DiscretizedBath): its discretized modes
        config (SolverConfig): search settings
        measure (bool): compute the observable set of the winner

    Returns:
        GroundStateRecord: certified winner

    Raises:
        ConfigurationError: real-valued search requested for a model with
            complex couplings
        NonConvergenceError: no trajectory met the tolerances
    """
    if config.real_mode and not spec.coupling_case.is_diagonal:
        raise ConfigurationError(
            "real-valued parameters only apply to the diagonal case", field="solver.real_mode"
        )
    started = time.perf_counter()
    trajectories = run_trajectories(spec, bath, config)
    converged = [t for t in trajectories if t.converged and t.state is not None]
    logger.info(f"{len(converged)} of {len(trajectories)} restarts converged")
    if not converged:
        finite = [t for t in trajectories if np.isfinite(t.energy)]
        best = min(finite, key=lambda t: t.energy) if finite else None
        raise NonConvergenceError(
            len(trajectories),
            None if best is None else best.energy,
            None if best is None else best.residual,
        )
    gap = config.degeneracy_gap
    winner, variance = select_winner(converged, bath, spec, gap)
    order, partner, partner_order = find_partner(winner, converged, bath, spec, gap)
    state = cast(VariationalState, winner.state)
    observables = None
    if measure:
        observables = compute_observables(state, compute_kernels(state, bath, spec), bath)
        if spec.frame is not None:
            observables = relabel_to_source_frame(observables, spec.frame)
    record = GroundStateRecord(
        spec=spec,
        energy=winner.energy,
        variance=variance,
        state=state,
        sweeps=winner.sweeps,
        restart_index=winner.restart,
        degenerate_partner=partner is not None,
        partner_energy=None if partner is None else partner.energy,
        partner_order=partner_order,
        converged_count=len(converged),
        residual=winner.residual,
        observables=observables,
        spec_fingerprint=spec.fingerprint(),
        bath_fingerprint=bath.fingerprint(),
        wall_time=time.perf_counter() - started,
        trajectory_log=trajectory_table(trajectories) if config.verbose else None,
    )
    logger.info(
        f"E_g = {record.energy:.12f} from restart {record.restart_index}, "
        f"variance {record.variance:.3e}, order parameter {order:+.6f}"
    )
    return record
