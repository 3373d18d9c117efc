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
"""Debye-Waller overlaps, energy kernels and the variational energy"""
import logging
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from spinboson.ansatz.operator import (
    DOWN,
    UP,
    SpinBlockHamiltonian,
    displacement_coupling,
    free_bath_energy,
)
from spinboson.ansatz.state import VariationalState
from spinboson.exception.numerics_error import (
    DegenerateStateError,
    DimensionMismatchError,
    ImaginaryResidueError,
)
from spinboson.model.bath import DiscretizedBath
from spinboson.model.spec import ModelSpec

logger = logging.getLogger(__name__)

NORM_FLOOR = 1e-14
IMAGINARY_TOLERANCE = 1e-10


def log_overlap(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """``ln <x_m|y_n>`` for multimode coherent states, shape (N, N')

    ``sum_k [x_mk* y_nk - (|x_mk|^2 + |y_nk|^2) / 2]``; accumulated in log
    space so large displacements underflow only after the final ``exp``.
    """
    x2 = np.sum(np.abs(X) ** 2, axis=1)
    y2 = np.sum(np.abs(Y) ** 2, axis=1)
    return X.conj() @ Y.T - 0.5 * (x2[:, None] + y2[None, :])


def overlap(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """``<x_m|y_n>``"""
    return np.exp(log_overlap(X, Y))


def _self_overlap(X: np.ndarray) -> np.ndarray:
    log = log_overlap(X, X)
    np.fill_diagonal(log, 0.0)
    return _hermitian(np.exp(log))


def _hermitian(matrix: np.ndarray) -> np.ndarray:
    upper = np.triu(matrix, 1)
    return upper + upper.conj().T + np.diag(np.diag(matrix).real)


@dataclass(frozen=True, eq=False)
class OverlapKernels:
    """Pairwise overlaps and normalized Hamiltonian elements of a state.

    ``F = <f_m|f_n>``, ``G = <g_m|g_n>``, ``Gamma = <f_m|g_n>``,
    ``K = <g_m|f_n>``; ``aa``, ``bb``, ``cc``, ``dd`` are the spin blocks
    ``<up|H|up>``, ``<down|H|down>``, ``<up|H|down>``, ``<down|H|up>``
    between the same pairs, divided by the overlap.
    """

    F: np.ndarray
    G: np.ndarray
    Gamma: np.ndarray
    K: np.ndarray
    aa: np.ndarray
    bb: np.ndarray
    cc: np.ndarray
    dd: np.ndarray

    def norm(self, state: VariationalState) -> complex:
        """``<Psi|Psi>`` before taking the real part"""
        A, B = state.A, state.B
        return complex(A.conj() @ self.F @ A + B.conj() @ self.G @ B)

    def hamiltonian(self, state: VariationalState) -> complex:
        """``<Psi|H|Psi>`` before taking the real part"""
        A, B = state.A, state.B
        return complex(
            A.conj() @ (self.F * self.aa) @ A
            + B.conj() @ (self.G * self.bb) @ B
            + A.conj() @ (self.Gamma * self.cc) @ B
            + B.conj() @ (self.K * self.dd) @ A
        )


def check_dimensions(state: VariationalState, bath: DiscretizedBath) -> None:
    """Raise unless the state has one displacement per bath mode"""
    if state.num_modes != bath.num_modes:
        raise DimensionMismatchError(
            "state displacements",
            (state.multiplicity, bath.num_modes),
            state.f.shape,
        )


def compute_kernels(
    state: VariationalState,
    bath: DiscretizedBath,
    spec: ModelSpec,
    hamiltonian: Optional[SpinBlockHamiltonian] = None,
) -> OverlapKernels:
    """Evaluate every overlap and energy kernel of ``state``

    Args:
        state (VariationalState): trial state
        bath (DiscretizedBath): modes matching ``state``
        spec (ModelSpec): model parameters
        hamiltonian (Optional[SpinBlockHamiltonian]): prebuilt blocks, to
            avoid rebuilding them every sweep

    Returns:
        OverlapKernels: kernels with exact conjugate symmetry
    """
    check_dimensions(state, bath)
    H = hamiltonian or SpinBlockHamiltonian.from_model(spec, bath)
    f, g = state.f, state.g
    Gamma = overlap(f, g)
    cc = H[UP, DOWN].element(f, g)
    return OverlapKernels(
        F=_self_overlap(f),
        G=_self_overlap(g),
        Gamma=Gamma,
        K=Gamma.conj().T,
        aa=_hermitian(H[UP, UP].element(f, f)),
        bb=_hermitian(H[DOWN, DOWN].element(g, g)),
        cc=cc,
        dd=cc.conj().T,
    )


def real_part(value: complex, what: str, scale: float) -> float:
    """Real part of ``value`` after checking its imaginary residue

    Raises:
        ImaginaryResidueError: ``|Im value| > 1e-10 * scale``
    """
    tolerance = IMAGINARY_TOLERANCE * max(scale, np.finfo(float).tiny)
    if abs(value.imag) > tolerance:
        raise ImaginaryResidueError(what, value, tolerance)
    return float(value.real)


def checked_norm(state: VariationalState, kernels: OverlapKernels) -> float:
    """Real, positive norm

    Raises:
        DegenerateStateError: norm below 1e-14
    """
    raw = kernels.norm(state)
    norm = real_part(raw, "norm", abs(raw))
    if norm < NORM_FLOOR:
        raise DegenerateStateError(norm, NORM_FLOOR)
    return norm


def normalized(state: VariationalState) -> VariationalState:
    """Copy of ``state`` with weights rescaled to unit norm

    Raises:
        DegenerateStateError: norm below 1e-14
    """
    A, B = state.A, state.B
    raw = complex(A.conj() @ _self_overlap(state.f) @ A + B.conj() @ _self_overlap(state.g) @ B)
    norm = real_part(raw, "norm", abs(raw))
    if norm < NORM_FLOOR:
        raise DegenerateStateError(norm, NORM_FLOOR)
    return state.scaled(1.0 / np.sqrt(norm))


class Energy(NamedTuple):
    """Variational energy ``E = H / norm``"""

    E: float
    H: float
    norm: float


def energy_from_kernels(state: VariationalState, kernels: OverlapKernels) -> Energy:
    """Energy of ``state`` given its current kernels"""
    norm = checked_norm(state, kernels)
    raw = kernels.hamiltonian(state)
    H = real_part(raw, "<H>", max(abs(raw), norm))
    return Energy(H / norm, H, norm)


def energy(
    state: VariationalState,
    bath: DiscretizedBath,
    spec: ModelSpec,
    hamiltonian: Optional[SpinBlockHamiltonian] = None,
) -> Energy:
    """``(E, <Psi|H|Psi>, <Psi|Psi>)``

    Raises:
        DegenerateStateError: norm below 1e-14
    """
    return energy_from_kernels(state, compute_kernels(state, bath, spec, hamiltonian))


class EnergyDecomposition(NamedTuple):
    """Energy split by Hamiltonian term, each divided by the norm"""

    bath: float
    diagonal: float
    off_diagonal: float
    tunnel: float
    bias: float

    @property
    def total(self) -> float:
        """Sum of all terms, equal to the energy"""
        return self.bath + self.diagonal + self.off_diagonal + self.tunnel + self.bias


def energy_decomposition(
    state: VariationalState, bath: DiscretizedBath, spec: ModelSpec
) -> EnergyDecomposition:
    """Free bath, sigma_z coupling, sigma_y coupling, tunneling and bias energies

    Raises:
        DegenerateStateError: norm below 1e-14
    """
    kernels = compute_kernels(state, bath, spec)
    norm = checked_norm(state, kernels)
    A, B, f, g = state.A, state.B, state.f, state.g
    F, G, Gamma, K = kernels.F, kernels.G, kernels.Gamma, kernels.K
    c, d = bath.diagonal, bath.off_diagonal

    def contract(left: np.ndarray, matrix: np.ndarray, right: np.ndarray, what: str) -> float:
        raw = complex(left.conj() @ matrix @ right)
        return real_part(raw, what, max(abs(raw), norm)) / norm

    free = free_bath_energy(bath.omega)
    bath_energy = contract(A, F * free.element(f, f), A, "H_b") + contract(
        B, G * free.element(g, g), B, "H_b"
    )
    up_shift = displacement_coupling(c, c)
    down_shift = displacement_coupling(-c, -c)
    diagonal = contract(A, F * up_shift.element(f, f), A, "H_diag") + contract(
        B, G * down_shift.element(g, g), B, "H_diag"
    )
    up_flip = displacement_coupling(d, -d)
    down_flip = displacement_coupling(-d, d)
    off_diagonal = real_part(
        complex(
            A.conj() @ (Gamma * up_flip.element(f, g)) @ B
            + B.conj() @ (K * down_flip.element(g, f)) @ A
        ),
        "H_offdiag",
        norm,
    ) / norm
    coherence = complex(A.conj() @ Gamma @ B + B.conj() @ K @ A)
    tunnel = -spec.delta / 2.0 * real_part(coherence, "H_tunnel", norm) / norm
    bias = (
        spec.epsilon
        / 2.0
        * real_part(complex(A.conj() @ F @ A - B.conj() @ G @ B), "H_bias", norm)
        / norm
    )
    return EnergyDecomposition(bath_energy, diagonal, off_diagonal, tunnel, bias)


def stationarity_residual(
    state: VariationalState,
    bath: DiscretizedBath,
    spec: ModelSpec,
    indices: Optional[Sequence[int]] = None,
    step: float = 1e-6,
) -> float:
    """``max_i |dH/dx_i - E dN/dx_i| / |H|`` by central differences

    ``x_i`` runs over the real and imaginary parts of every parameter, or
    over ``indices`` of :meth:`VariationalState.flat` when given.
    """
    hamiltonian = SpinBlockHamiltonian.from_model(spec, bath)
    N, M = state.multiplicity, state.num_modes
    base = energy(state, bath, spec, hamiltonian)
    vector = state.flat()
    indices = range(vector.size) if indices is None else indices

    def lagrangian(x: np.ndarray) -> float:
        shifted = VariationalState.from_flat(x, N, M)
        kernels = compute_kernels(shifted, bath, spec, hamiltonian)
        return (
            kernels.hamiltonian(shifted).real - base.E * kernels.norm(shifted).real
        )

    worst = 0.0
    for i in indices:
        plus, minus = vector.copy(), vector.copy()
        plus[i] += step
        minus[i] -= step
        worst = max(worst, abs(lagrangian(plus) - lagrangian(minus)) / (2.0 * step))
    return worst / max(abs(base.H), np.finfo(float).tiny)
