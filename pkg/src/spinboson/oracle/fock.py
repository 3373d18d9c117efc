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
"""Truncated Fock-space representation of the spin-boson model"""
import logging
from dataclasses import dataclass, replace
from typing import ClassVar, List, Optional

import numpy as np
import scipy.sparse as sp
from scipy.linalg import expm
from scipy.sparse.linalg import norm as sparse_norm
from scipy.special import gammaln

from spinboson.ansatz.state import VariationalState
from spinboson.exception.configuration_error import ConfigurationError
from spinboson.exception.numerics_error import DimensionMismatchError
from spinboson.model.bath import DiscretizedBath
from spinboson.model.spec import ModelSpec

logger = logging.getLogger(__name__)

TRUNCATION_WARNING = 1e-10
PAULI = {
    "sigma_x": np.array([[0.0, 1.0], [1.0, 0.0]]),
    "sigma_y": np.array([[0.0, -1j], [1j, 0.0]]),
    "sigma_z": np.array([[1.0, 0.0], [0.0, -1.0]]),
    "i_sigma_y": np.array([[0.0, 1.0], [-1.0, 0.0]]),
}
"""basis order (up, down)"""


@dataclass(frozen=True)
class FockConfig:
    """Size of the truncated space

    Attributes:
        num_modes (int): bath modes represented, at most 4
        cutoff (int): largest occupation kept per mode, at least 10
        spec_fingerprint (Optional[str]): model the space was built for
    """

    num_modes: int
    cutoff: int = 10
    spec_fingerprint: Optional[str] = None

    MAX_MODES: ClassVar[int] = 4
    MIN_CUTOFF: ClassVar[int] = 10
    MAX_DIMENSION: ClassVar[int] = 10**6

    def __post_init__(self) -> None:
        if not 1 <= self.num_modes <= self.MAX_MODES:
            raise ConfigurationError(
                f"must lie in 1..{self.MAX_MODES}, got {self.num_modes}", field="oracle.num_modes"
            )
        if self.cutoff < self.MIN_CUTOFF:
            raise ConfigurationError(
                f"must be at least {self.MIN_CUTOFF}, got {self.cutoff}", field="oracle.cutoff"
            )
        if self.dimension > self.MAX_DIMENSION:
            raise ConfigurationError(
                f"dimension {self.dimension} exceeds {self.MAX_DIMENSION}", field="oracle.cutoff"
            )

    @property
    def levels(self) -> int:
        """Occupations per mode, ``cutoff + 1``"""
        return self.cutoff + 1

    @property
    def dimension(self) -> int:
        """``2 (cutoff + 1)^M``"""
        return 2 * self.levels**self.num_modes

    def can_double(self) -> bool:
        """Whether doubling the cutoff stays tractable"""
        return 2 * (2 * self.cutoff + 1) ** self.num_modes <= self.MAX_DIMENSION

    def doubled(self) -> "FockConfig":
        """Same space with twice the cutoff"""
        return replace(self, cutoff=2 * self.cutoff)


class FockSpace:
    """Sparse operators on ``spin x mode_0 x ... x mode_{M-1}``

    Args:
        fock (FockConfig): size of the space
    """

    def __init__(self, fock: FockConfig) -> None:
        self.fock = fock
        levels = fock.levels
        ladder = np.sqrt(np.arange(1, levels, dtype=float))
        self._b = sp.diags(ladder, 1, shape=(levels, levels), format="csr")
        self._occupations = np.arange(levels, dtype=float)

    @property
    def dimension(self) -> int:
        """Size of the full space"""
        return self.fock.dimension

    def _embed(self, factors: List[sp.spmatrix]) -> sp.csr_matrix:
        result = factors[0]
        for factor in factors[1:]:
            result = sp.kron(result, factor, format="csr")
        return sp.csr_matrix(result)

    def _mode_operator(
        self, k: int, local: sp.spmatrix, spin: Optional[np.ndarray] = None
    ) -> sp.csr_matrix:
        M = self.fock.num_modes
        if not 0 <= k < M:
            raise IndexError(f"mode {k} outside 0..{M - 1}")
        identity = sp.identity(self.fock.levels, format="csr")
        factors = [sp.csr_matrix(np.eye(2) if spin is None else spin)]
        factors += [local if j == k else identity for j in range(M)]
        return self._embed(factors)

    def identity(self) -> sp.csr_matrix:
        """Unit operator"""
        return sp.identity(self.dimension, format="csr")

    def spin(self, name: str) -> sp.csr_matrix:
        """Pauli matrix ``name`` acting on the spin alone"""
        if name not in PAULI:
            raise KeyError(f"unknown spin operator {name!r}, expected one of {sorted(PAULI)}")
        rest = sp.identity(self.levels_total, format="csr")
        return sp.csr_matrix(sp.kron(PAULI[name], rest, format="csr"))

    @property
    def levels_total(self) -> int:
        """Dimension of the bath factor"""
        return self.dimension // 2

    def annihilation(self, k: int) -> sp.csr_matrix:
        """``b_k``"""
        return self._mode_operator(k, self._b)

    def creation(self, k: int) -> sp.csr_matrix:
        """``b_k^+``"""
        return self._mode_operator(k, self._b.T.tocsr())

    def number(self, k: int) -> sp.csr_matrix:
        """``b_k^+ b_k``"""
        return self._mode_operator(k, sp.diags(self._occupations, format="csr"))

    def total_number_diagonal(self) -> np.ndarray:
        """Diagonal of ``sum_k b_k^+ b_k`` on the bath factor"""
        total = np.zeros(1)
        for _ in range(self.fock.num_modes):
            total = np.add.outer(total, self._occupations).ravel()
        return total

    def hamiltonian(self, spec: ModelSpec, bath: DiscretizedBath) -> sp.csr_matrix:
        """Sparse matrix of the model on this space (real in this basis)

        Raises:
            DimensionMismatchError: bath size differs from the space
        """
        M = self.fock.num_modes
        if bath.num_modes != M:
            raise DimensionMismatchError("oracle bath", (M,), (bath.num_modes,))
        H = spec.epsilon / 2.0 * self.spin("sigma_z") - spec.delta / 2.0 * self.spin("sigma_x")
        b = self._b
        position = (b + b.T).tocsr()
        momentum = (b.T - b).tocsr()
        for k in range(M):
            H = H + bath.omega[k] * self.number(k)
            H = H + bath.diagonal[k] * self._mode_operator(k, position, PAULI["sigma_z"])
            H = H + bath.off_diagonal[k] * self._mode_operator(k, momentum, PAULI["i_sigma_y"])
        return sp.csr_matrix(H)

    def excitation_operator(self) -> sp.csr_matrix:
        """``sum_k b_k^+ b_k + (1 - sigma_x) / 2``"""
        bath = sp.kron(np.eye(2), sp.diags(self.total_number_diagonal()), format="csr")
        spin = 0.5 * (self.identity() - self.spin("sigma_x"))
        return sp.csr_matrix(bath + spin)

    def parity_operator(self) -> sp.csr_matrix:
        """``sigma_x exp(i pi sum_k b_k^+ b_k)``"""
        signs = np.where(self.total_number_diagonal() % 2 == 0, 1.0, -1.0)
        return sp.csr_matrix(sp.kron(PAULI["sigma_x"], sp.diags(signs), format="csr"))

    def parity_from_excitations(self) -> sp.csr_matrix:
        """``exp(i pi N_ex)``, with the spin factor exponentiated as a matrix"""
        spin_part = expm(1j * np.pi * 0.5 * (np.eye(2) - PAULI["sigma_x"]))
        signs = np.where(self.total_number_diagonal() % 2 == 0, 1.0, -1.0)
        return sp.csr_matrix(sp.kron(spin_part, sp.diags(signs), format="csr"))

    def coherent_state(self, state: VariationalState) -> np.ndarray:
        """:func:`expand_coherent_state` on this space"""
        return expand_coherent_state(state, self.fock)


def commutator_norm(a: sp.spmatrix, b: sp.spmatrix) -> float:
    """Frobenius norm of ``[a, b]``"""
    return float(sparse_norm(a @ b - b @ a))


def coherent_amplitudes(displacement: complex, cutoff: int) -> np.ndarray:
    """``exp(-|z|^2/2) z^n / sqrt(n!)`` for ``n = 0..cutoff``, evaluated in log space"""
    n = np.arange(cutoff + 1)
    if displacement == 0:
        amplitudes = np.zeros(cutoff + 1, dtype=complex)
        amplitudes[0] = 1.0
        return amplitudes
    log_magnitude = n * np.log(abs(displacement)) - 0.5 * gammaln(n + 1) - 0.5 * abs(displacement) ** 2
    return np.exp(log_magnitude + 1j * n * np.angle(displacement))


def coherent_vector(displacements: np.ndarray, cutoff: int) -> np.ndarray:
    """Multimode coherent state on the bath factor"""
    vector = np.ones(1, dtype=complex)
    for z in np.atleast_1d(displacements):
        vector = np.kron(vector, coherent_amplitudes(complex(z), cutoff))
    return vector


def expand_coherent_state(state: VariationalState, fock: FockConfig) -> np.ndarray:
    """Multi-D1 state as an (unnormalized) Fock vector

    Raises:
        DimensionMismatchError: the state has a different number of modes
    """
    if state.num_modes != fock.num_modes:
        raise DimensionMismatchError("expanded state", (fock.num_modes,), (state.num_modes,))
    up = np.zeros(fock.dimension // 2, dtype=complex)
    down = np.zeros(fock.dimension // 2, dtype=complex)
    lost = 0.0
    for n in range(state.multiplicity):
        f_n = coherent_vector(state.f[n], fock.cutoff)
        g_n = coherent_vector(state.g[n], fock.cutoff)
        lost = max(lost, 1.0 - np.vdot(f_n, f_n).real, 1.0 - np.vdot(g_n, g_n).real)
        up += state.A[n] * f_n
        down += state.B[n] * g_n
    if lost > TRUNCATION_WARNING:
        logger.warning(f"Fock cutoff {fock.cutoff} drops weight {lost:.3e} of a coherent state")
    return np.concatenate([up, down])
