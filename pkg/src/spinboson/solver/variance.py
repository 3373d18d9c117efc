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
"""Energy variance of a variational state, the solution certificate"""
import logging
from typing import Optional

from spinboson.ansatz.kernels import (
    OverlapKernels,
    check_dimensions,
    checked_norm,
    compute_kernels,
    energy_from_kernels,
    real_part,
)
from spinboson.ansatz.operator import DOWN, UP, SpinBlockHamiltonian
from spinboson.ansatz.state import VariationalState
from spinboson.model.bath import DiscretizedBath
from spinboson.model.spec import ModelSpec

logger = logging.getLogger(__name__)


def squared_hamiltonian(
    state: VariationalState,
    kernels: OverlapKernels,
    hamiltonian: SpinBlockHamiltonian,
) -> float:
    """``<Psi|H^2|Psi>``, summed over the four spin blocks of ``H^2``"""
    branches = {UP: (state.A, state.f), DOWN: (state.B, state.g)}
    overlaps = {
        (UP, UP): kernels.F,
        (DOWN, DOWN): kernels.G,
        (UP, DOWN): kernels.Gamma,
        (DOWN, UP): kernels.K,
    }
    total = 0.0 + 0.0j
    for (bra, ket), overlap in overlaps.items():
        left, X = branches[bra]
        right, Y = branches[ket]
        elements = hamiltonian.squared_element(bra, ket, X, Y)
        total += complex(left.conj() @ (overlap * elements) @ right)
    return real_part(total, "<H^2>", abs(total))


def energy_variance(
    state: VariationalState,
    bath: DiscretizedBath,
    spec: ModelSpec,
    kernels: Optional[OverlapKernels] = None,
    hamiltonian: Optional[SpinBlockHamiltonian] = None,
) -> float:
    """``<H^2> - <H>^2`` in the normalized state

    Args:
        state (VariationalState): state to certify
        bath (DiscretizedBath): modes matching ``state``
        spec (ModelSpec): model parameters
        kernels (Optional[OverlapKernels]): kernels of ``state`` if already known
        hamiltonian (Optional[SpinBlockHamiltonian]): prebuilt blocks

    Returns:
        float: the variance, zero for an exact eigenstate

    Raises:
        DegenerateStateError: norm below 1e-14
    """
    check_dimensions(state, bath)
    hamiltonian = hamiltonian or SpinBlockHamiltonian.from_model(spec, bath)
    kernels = kernels or compute_kernels(state, bath, spec, hamiltonian)
    norm = checked_norm(state, kernels)
    E = energy_from_kernels(state, kernels).E
    variance = squared_hamiltonian(state, kernels, hamiltonian) / norm - E**2
    if variance < -1e-10:
        logger.warning(f"energy variance {variance:.3e} is negative beyond rounding")
    return float(variance)
