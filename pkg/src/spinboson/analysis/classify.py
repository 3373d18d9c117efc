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
"""Phase labels of certified ground states"""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from spinboson.exception.numerics_error import NotApplicableError
from spinboson.model.bath import DiscretizedBath, discretize_bath
from spinboson.observables import ObservableSet
from spinboson.solver.solve import GroundStateRecord

logger = logging.getLogger(__name__)

DISPLACEMENT_FLOOR = 1e-5
"""smallest free-phase displacement threshold, reached when the coupling vanishes"""


class PhaseLabel(str, Enum):
    """Ground-state phases, with the numbering used for the rotating-wave sequence"""

    FREE = "Free"
    EVEN_DELOCALIZED = "EvenDelocalized"
    ODD_DELOCALIZED = "OddDelocalized"
    LOCALIZED = "Localized"
    LOCALIZED_II = "LocalizedII"
    LOCALIZED_IV = "LocalizedIV"
    UNCLASSIFIED = "Unclassified"

    @property
    def is_localized(self) -> bool:
        """Symmetry-broken phase of either coherence sign"""
        return self in (PhaseLabel.LOCALIZED, PhaseLabel.LOCALIZED_II, PhaseLabel.LOCALIZED_IV)

    @property
    def is_delocalized(self) -> bool:
        """Definite parity with displaced bath"""
        return self in (PhaseLabel.EVEN_DELOCALIZED, PhaseLabel.ODD_DELOCALIZED)


@dataclass(frozen=True)
class PhaseTolerances:
    """Thresholds of the classification rules

    Attributes:
        excitation (float): largest total excitation of the free phase
        displacement (Optional[float]): largest averaged displacement of the
            free phase, ``1e-3 max_k eta_k / (2 w_k)`` (at least 1e-5) when unset
        parity (float): distance of ``<Pi>`` from its ideal value
        shape (float): relative mismatch allowed in ``f_bar = +-g_bar`` and
            ``A_bar = +-B_bar``
        require_partner (bool): localized states need a degenerate partner
    """

    excitation: float = 1e-4
    displacement: Optional[float] = None
    parity: float = 0.05
    shape: float = 0.05
    require_partner: bool = True

    def displacement_for(self, bath: DiscretizedBath) -> float:
        """Free-phase displacement threshold on ``bath``"""
        if self.displacement is not None:
            return self.displacement
        return max(1e-3 * float(np.max(bath.eta / (2.0 * bath.omega))), DISPLACEMENT_FLOOR)


def _matches(left: np.ndarray, right: np.ndarray, relative: float, floor: float) -> bool:
    scale = max(float(np.max(np.abs(left))), float(np.max(np.abs(right))), floor)
    return float(np.max(np.abs(left - right))) <= relative * scale


def classify_observables(
    obs: ObservableSet,
    bath: DiscretizedBath,
    tolerances: PhaseTolerances,
    has_partner: bool,
    numbered: bool,
) -> PhaseLabel:
    """Apply the rules in order: free, even, odd, localized

    Args:
        obs (ObservableSet): measured ground state
        bath (DiscretizedBath): its modes
        tolerances (PhaseTolerances): thresholds
        has_partner (bool): whether a degenerate mirror solution was found
        numbered (bool): split localized states into II and IV by the sign
            of ``sigma_x``

    Returns:
        PhaseLabel: ``UNCLASSIFIED`` when no rule fires
    """
    tol_d = tolerances.displacement_for(bath)
    largest = max(float(np.max(np.abs(obs.f_bar))), float(np.max(np.abs(obs.g_bar))))
    if obs.excitation_number < tolerances.excitation and largest <= tol_d:
        return PhaseLabel.FREE
    antisymmetric = _matches(obs.f_bar, -obs.g_bar, tolerances.shape, tol_d)
    symmetric = _matches(obs.f_bar, obs.g_bar, tolerances.shape, tol_d)
    if obs.parity > 1.0 - tolerances.parity and antisymmetric:
        if abs(obs.A_bar - obs.B_bar) <= tolerances.shape:
            return PhaseLabel.EVEN_DELOCALIZED
    if obs.parity < -1.0 + tolerances.parity and antisymmetric:
        if abs(obs.A_bar + obs.B_bar) <= tolerances.shape or not obs.b_bar_signed:
            return PhaseLabel.ODD_DELOCALIZED
    if abs(obs.parity) < tolerances.parity and symmetric:
        if has_partner or not tolerances.require_partner:
            if not numbered:
                return PhaseLabel.LOCALIZED
            return PhaseLabel.LOCALIZED_II if obs.sigma_x >= 0 else PhaseLabel.LOCALIZED_IV
    return PhaseLabel.UNCLASSIFIED


def classify_phase(
    record: GroundStateRecord,
    tolerances: Optional[PhaseTolerances] = None,
    bath: Optional[DiscretizedBath] = None,
) -> PhaseLabel:
    """Phase of a certified ground state

    Localized states are numbered II or IV only when the model has an
    off-diagonal coupling in its own frame.

    Raises:
        NotApplicableError: the record carries no observables
    """
    if record.observables is None:
        raise NotApplicableError("classify_phase", "record has no observables")
    bath = bath if bath is not None else discretize_bath(record.spec)
    case = record.spec.coupling_case
    numbered = not case.is_diagonal and not case.is_off_diagonal
    label = classify_observables(
        record.observables,
        bath,
        tolerances or PhaseTolerances(),
        record.degenerate_partner,
        numbered,
    )
    if label is PhaseLabel.UNCLASSIFIED:
        logger.info(f"no phase rule fired at alpha = {record.spec.alpha}")
    return label
