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
"""One sweep of the self-consistent relaxation iteration"""
import logging
from typing import Tuple

import numpy as np

from spinboson.ansatz.kernels import OverlapKernels
from spinboson.ansatz.state import VariationalState
from spinboson.model.bath import DiscretizedBath
from spinboson.solver.config import SolverConfig

logger = logging.getLogger(__name__)

SINGULAR_DENOMINATOR = 1e-12
"""denominators smaller than this freeze their component for one sweep"""


def _off_diagonal(matrix: np.ndarray) -> np.ndarray:
    result = matrix.copy()
    np.fill_diagonal(result, 0.0)
    return result


def _solve_or_freeze(
    numerator: np.ndarray, denominator: np.ndarray, current: np.ndarray
) -> Tuple[np.ndarray, int]:
    frozen = np.abs(denominator) < SINGULAR_DENOMINATOR
    safe = np.where(frozen, 1.0, denominator)
    return np.where(frozen, current, numerator / safe), int(np.count_nonzero(frozen))


def update_targets(
    state: VariationalState,
    kernels: OverlapKernels,
    bath: DiscretizedBath,
    E: float,
) -> Tuple[VariationalState, int]:
    """Fixed-point targets of every parameter and the number of frozen components.

    Each equation isolates the ``m == n`` term of a stationarity condition
    ``<s, x_n| (H - E) |Psi> = 0`` (weights) or ``<s, x_n| b_k (H - E) |Psi> = 0``
    (displacements) and solves for the parameter of component ``n``.
    The weight denominators are ``E - aa_nn`` and ``E - bb_nn``; the displacement
    denominators carry the weight of their component, ``A_n (E - w_k - aa_nn)``
    and ``B_n (E - w_k - bb_nn)``, so a component with a vanishing weight also
    keeps its displacements. Any denominator below 1e-12 in magnitude leaves
    its parameter at the current value.
    """
    A, B, f, g = state.A, state.B, state.f, state.g
    F, G, Gamma, K = kernels.F, kernels.G, kernels.Gamma, kernels.K
    w, c, d = bath.omega, bath.diagonal, bath.off_diagonal
    a_nn = np.diag(kernels.aa).real
    b_nn = np.diag(kernels.bb).real

    up_couple = Gamma * kernels.cc
    down_couple = K * kernels.dd
    up_shifted = _off_diagonal(F * (kernels.aa - E))
    down_shifted = _off_diagonal(G * (kernels.bb - E))

    A_next, frozen_a = _solve_or_freeze(up_couple @ B + up_shifted @ A, E - a_nn, A)
    B_next, frozen_b = _solve_or_freeze(down_couple @ A + down_shifted @ B, E - b_nn, B)

    Af = A[:, None] * f
    Bg = B[:, None] * g
    f_numerator = (
        (_off_diagonal(F) @ Af) * w
        + up_shifted @ Af
        + np.outer(F @ A, c)
        + up_couple @ Bg
        + np.outer(Gamma @ B, d)
    )
    g_numerator = (
        (_off_diagonal(G) @ Bg) * w
        + down_shifted @ Bg
        - np.outer(G @ B, c)
        + down_couple @ Af
        - np.outer(K @ A, d)
    )
    f_next, frozen_f = _solve_or_freeze(
        f_numerator, A[:, None] * (E - w[None, :] - a_nn[:, None]), f
    )
    g_next, frozen_g = _solve_or_freeze(
        g_numerator, B[:, None] * (E - w[None, :] - b_nn[:, None]), g
    )
    frozen = frozen_a + frozen_b + frozen_f + frozen_g
    if frozen:
        logger.debug(f"froze {frozen} near-singular components this sweep")
    return VariationalState(A_next, B_next, f_next, g_next), frozen


def iterate_once(
    state: VariationalState,
    kernels: OverlapKernels,
    bath: DiscretizedBath,
    E: float,
) -> VariationalState:
    """Raw update targets ``x_next`` of all parameters, without relaxation"""
    targets, _ = update_targets(state, kernels, bath, E)
    return targets


def parameter_residual(state: VariationalState, targets: VariationalState) -> float:
    """``max |x_next - x|`` over every parameter"""
    return float(
        max(
            np.max(np.abs(targets.A - state.A)),
            np.max(np.abs(targets.B - state.B)),
            np.max(np.abs(targets.f - state.f)),
            np.max(np.abs(targets.g - state.g)),
        )
    )


class AnnealingSchedule:
    """Relaxation factor that steps geometrically from f0 down to f1.

    A stage ends when the windowed energy change stalls, or when it has used
    its share of the sweep budget. The last stage never ends.

    Args:
        config (SolverConfig): supplies the factors and the stage budget
    """

    def __init__(self, config: SolverConfig) -> None:
        self.factors = config.annealing_schedule
        self.budget = config.sweeps_per_stage
        self.window = config.window
        self.stall_tolerance = config.stall_tolerance
        self.stage = 0
        self.stage_sweeps = 0

    @property
    def factor(self) -> float:
        """Current relaxation factor"""
        return float(self.factors[self.stage])

    @property
    def final(self) -> bool:
        """Whether the last stage is running"""
        return self.stage == len(self.factors) - 1

    def tick(self, relative_change: float) -> None:
        """Record one sweep and move to the next stage when this one is done

        Args:
            relative_change (float): relative energy change over the last
                window, ``inf`` while fewer sweeps are available
        """
        self.stage_sweeps += 1
        if self.final:
            return
        stalled = self.stage_sweeps >= self.window and relative_change < self.stall_tolerance
        if stalled or self.stage_sweeps >= self.budget:
            self.stage += 1
            self.stage_sweeps = 0
            logger.debug(f"annealing stage {self.stage}: f = {self.factor:.3e}")


def relax(state: VariationalState, targets: VariationalState, factor: float) -> VariationalState:
    """``x + factor (x_next - x)`` for every parameter"""
    return VariationalState(
        state.A + factor * (targets.A - state.A),
        state.B + factor * (targets.B - state.B),
        state.f + factor * (targets.f - state.f),
        state.g + factor * (targets.g - state.g),
    )


def relax_and_anneal(
    state: VariationalState,
    targets: VariationalState,
    schedule: AnnealingSchedule,
    real_mode: bool = False,
) -> VariationalState:
    """Blend toward ``targets`` with the schedule's current factor"""
    relaxed = relax(state, targets, schedule.factor)
    return relaxed.real_part() if real_mode else relaxed
