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
"""Exact ground states of small instances by diagonalization"""
import json
import logging
from dataclasses import dataclass
from os import PathLike
from typing import Any, Dict, List, NamedTuple, Tuple, Union

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eigh
from scipy.sparse.linalg import eigsh

from spinboson.exception.numerics_error import DegenerateStateError, OracleConvergenceError
from spinboson.model.bath import DiscretizedBath
from spinboson.model.spec import ModelSpec
from spinboson.observables import von_neumann_entropy
from spinboson.oracle.fock import FockConfig, FockSpace
from spinboson.params import ParamsEncoder

logger = logging.getLogger(__name__)

DENSE_LIMIT = 4096
CUTOFF_TOLERANCE = 1e-10


@dataclass(frozen=True, eq=False)
class OracleResult:
    """Lowest eigenpair of the truncated Hamiltonian

    Attributes:
        energy (float): E0
        vector (np.ndarray): normalized ground vector
        fock (FockConfig): space at which the energy settled
        history (List[Tuple[int, float]]): (cutoff, E0) of every doubling
    """

    energy: float
    vector: np.ndarray
    fock: FockConfig
    history: List[Tuple[int, float]]


def lowest_eigenpair(H: sp.spmatrix) -> Tuple[float, np.ndarray]:
    """Dense ``eigh`` below 4096 states, Lanczos (``eigsh``) above"""
    if H.shape[0] < DENSE_LIMIT:
        values, vectors = eigh(H.toarray(), subset_by_index=[0, 0])
    else:
        values, vectors = eigsh(H, k=1, which="SA")
    vector = vectors[:, 0]
    vector = vector * np.exp(-1j * np.angle(vector[np.argmax(np.abs(vector))]))
    return float(values[0]), vector / np.linalg.norm(vector)


def ed_ground_state(spec: ModelSpec, bath: DiscretizedBath, fock: FockConfig) -> OracleResult:
    """Ground state, doubling the cutoff until E0 moves by less than 1e-10

    Args:
        spec (ModelSpec): model
        bath (DiscretizedBath): its (few) modes
        fock (FockConfig): starting truncation

    Returns:
        OracleResult: the converged eigenpair

    Raises:
        DimensionMismatchError: ``bath`` and ``fock`` disagree on M
        OracleConvergenceError: the cutoff cannot grow further before E0 settles
    """
    history: List[Tuple[int, float]] = []
    current = fock
    while True:
        space = FockSpace(current)
        E0, vector = lowest_eigenpair(space.hamiltonian(spec, bath))
        history.append((current.cutoff, E0))
        if len(history) > 1 and abs(history[-1][1] - history[-2][1]) < CUTOFF_TOLERANCE:
            return OracleResult(E0, vector, current, history)
        if not current.can_double():
            raise OracleConvergenceError(history, CUTOFF_TOLERANCE)
        logger.info(f"cutoff {current.cutoff}: E0 = {E0:.14f}, doubling")
        current = current.doubled()


class FockObservables(NamedTuple):
    """Observables of a Fock vector, normalized internally"""

    norm: float
    energy: float
    variance: float
    sigma_x: float
    sigma_y: float
    sigma_z: float
    entropy: float
    excitation_number: float
    parity: float
    x_mean: np.ndarray
    p_mean: np.ndarray
    var_x: np.ndarray
    var_p: np.ndarray

    @property
    def qf(self) -> np.ndarray:
        """``var_x var_p - 1/4`` per mode"""
        return self.var_x * self.var_p - 0.25

    def to_dict(self) -> Dict[str, Any]:
        """Json form"""
        return {
            name: value.tolist() if isinstance(value, np.ndarray) else float(value)
            for name, value in self._asdict().items()
        }


def _expectation(vector: np.ndarray, operator: sp.spmatrix) -> complex:
    return complex(np.vdot(vector, operator @ vector))


def vector_observables(
    vector: np.ndarray, fock: FockConfig, spec: ModelSpec, bath: DiscretizedBath
) -> FockObservables:
    """Every ground-state observable evaluated directly on ``vector``

    Raises:
        DegenerateStateError: zero vector
    """
    norm = float(np.vdot(vector, vector).real)
    if norm < 1e-14:
        raise DegenerateStateError(norm, 1e-14)
    psi = vector / np.sqrt(norm)
    space = FockSpace(fock)
    H = space.hamiltonian(spec, bath)
    H_psi = H @ psi
    E = float(np.vdot(psi, H_psi).real)
    variance = float(np.vdot(H_psi, H_psi).real) - E**2

    halves = psi.reshape(2, -1)
    rho = halves @ halves.conj().T

    x_mean, p_mean, var_x, var_p = (np.zeros(fock.num_modes) for _ in range(4))
    for k in range(fock.num_modes):
        b = space.annihilation(k)
        x = (b + b.T) / np.sqrt(2.0)
        p = 1j * (b.T - b) / np.sqrt(2.0)
        x_mean[k] = _expectation(psi, x).real
        p_mean[k] = _expectation(psi, p).real
        var_x[k] = _expectation(psi, x @ x).real - x_mean[k] ** 2
        var_p[k] = _expectation(psi, p @ p).real - p_mean[k] ** 2

    return FockObservables(
        norm=norm,
        energy=E,
        variance=variance,
        sigma_x=_expectation(psi, space.spin("sigma_x")).real,
        sigma_y=_expectation(psi, space.spin("sigma_y")).real,
        sigma_z=_expectation(psi, space.spin("sigma_z")).real,
        entropy=von_neumann_entropy(rho),
        excitation_number=_expectation(psi, space.excitation_operator()).real,
        parity=_expectation(psi, space.parity_operator()).real,
        x_mean=x_mean,
        p_mean=p_mean,
        var_x=var_x,
        var_p=var_p,
    )


def save_fixture(
    path: Union[str, "PathLike[str]"],
    spec: ModelSpec,
    bath: DiscretizedBath,
    result: OracleResult,
) -> None:
    """Pin an oracle run as a json regression fixture"""
    observables = vector_observables(result.vector, result.fock, spec, bath)
    fixture = {
        "spec": spec.to_dict(),
        "bath": {
            "omega": bath.omega.tolist(),
            "eta": bath.eta.tolist(),
            "lambda": bath.lam.tolist(),
            "gamma": bath.gamma.tolist(),
        },
        "cutoff": result.fock.cutoff,
        "E0": result.energy,
        "history": result.history,
        "observables": observables.to_dict(),
    }
    with open(path, "w") as fh:
        json.dump(fixture, fh, indent=2, cls=ParamsEncoder)


def load_fixture(path: Union[str, "PathLike[str]"]) -> Dict[str, Any]:
    """Read a fixture written by :func:`save_fixture`; ``spec`` and ``bath`` are rebuilt"""
    with open(path) as fh:
        fixture: Dict[str, Any] = json.load(fh)
    fixture["spec"] = ModelSpec.from_dict(fixture["spec"])
    raw = fixture["bath"]
    fixture["bath"] = DiscretizedBath(
        omega=np.asarray(raw["omega"]),
        eta=np.asarray(raw["eta"]),
        lam=np.asarray(raw["lambda"]),
        gamma=np.asarray(raw["gamma"]),
    )
    return fixture
