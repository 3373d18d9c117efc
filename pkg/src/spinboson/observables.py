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
"""Ground-state observables computed from coherent-state kernels"""
import dataclasses
import logging
from dataclasses import dataclass
from typing import Any, Dict, NamedTuple, Optional, Tuple

import numpy as np
from scipy.special import entr

from spinboson.ansatz.kernels import OverlapKernels, checked_norm, overlap, real_part
from spinboson.ansatz.state import VariationalState
from spinboson.model.bath import DiscretizedBath
from spinboson.model.spec import FrameRotation

logger = logging.getLogger(__name__)

UNSIGNED_COHERENCE = 1e-10
"""below this ``|sigma_x|`` the sign of B_bar is undefined"""


def _weights(left: np.ndarray, right: np.ndarray, overlaps: np.ndarray) -> np.ndarray:
    return left.conj()[:, None] * right[None, :] * overlaps


def spin_expectations(
    state: VariationalState, kernels: OverlapKernels
) -> Tuple[float, float, float]:
    """``(<sigma_x>, <sigma_y>, <sigma_z>)``

    Raises:
        DegenerateStateError: norm below 1e-14
    """
    norm = checked_norm(state, kernels)
    A, B = state.A, state.B
    up_down = complex(A.conj() @ kernels.Gamma @ B)
    down_up = complex(B.conj() @ kernels.K @ A)
    populations = complex(A.conj() @ kernels.F @ A - B.conj() @ kernels.G @ B)
    sigma_x = real_part(up_down + down_up, "<sigma_x>", norm) / norm
    sigma_y = real_part(1j * down_up - 1j * up_down, "<sigma_y>", norm) / norm
    sigma_z = real_part(populations, "<sigma_z>", norm) / norm
    return sigma_x, sigma_y, sigma_z


def reduced_density_matrix(state: VariationalState, kernels: OverlapKernels) -> np.ndarray:
    """Spin density matrix with the bath traced out, basis (up, down)"""
    norm = checked_norm(state, kernels)
    A, B = state.A, state.B
    up = real_part(complex(A.conj() @ kernels.F @ A), "rho_up", norm)
    down = real_part(complex(B.conj() @ kernels.G @ B), "rho_down", norm)
    coherence = complex(B.conj() @ kernels.K @ A)
    return np.array([[up, coherence], [np.conj(coherence), down]]) / norm


def von_neumann_entropy(rho: np.ndarray) -> float:
    """``-Tr rho log2 rho`` with ``0 log 0 = 0``"""
    populations = np.clip(np.linalg.eigvalsh(rho), 0.0, 1.0)
    return float(np.sum(entr(populations)) / np.log(2.0))


def reduced_density_entropy(
    state: VariationalState, kernels: OverlapKernels
) -> Tuple[np.ndarray, float]:
    """Reduced spin density matrix and its base-2 entropy"""
    rho = reduced_density_matrix(state, kernels)
    return rho, von_neumann_entropy(rho)


class QuadratureCurves(NamedTuple):
    """Per-mode moments of ``x_k = (b_k + b_k^+)/sqrt 2`` and ``p_k = i(b_k^+ - b_k)/sqrt 2``"""

    x_mean: np.ndarray
    p_mean: np.ndarray
    var_x: np.ndarray
    var_p: np.ndarray
    occupation: np.ndarray

    @property
    def qf(self) -> np.ndarray:
        """Excess of the uncertainty product, ``var_x var_p - 1/4``"""
        return self.var_x * self.var_p - 0.25


class QuadratureStats(NamedTuple):
    """Moments of one mode"""

    x_mean: float
    p_mean: float
    var_x: float
    var_p: float
    qf: float


def _branch_moments(
    weights: np.ndarray, displacements: np.ndarray
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    ket_sums = weights.sum(axis=0)
    first = ket_sums @ displacements
    second = ket_sums @ displacements**2
    occupation = np.sum(displacements.conj() * (weights @ displacements), axis=0)
    return first, second, occupation


def quadrature_curves(state: VariationalState, kernels: OverlapKernels) -> QuadratureCurves:
    """First and second quadrature moments of every mode

    Raises:
        DegenerateStateError: norm below 1e-14
    """
    norm = checked_norm(state, kernels)
    up = _branch_moments(_weights(state.A, state.A, kernels.F), state.f)
    down = _branch_moments(_weights(state.B, state.B, kernels.G), state.g)
    b, b2, n = ((u + d) / norm for u, d in zip(up, down))
    occupation = n.real
    x_mean = np.sqrt(2.0) * b.real
    p_mean = np.sqrt(2.0) * b.imag
    x2 = (2.0 * b2.real + 2.0 * occupation + 1.0) / 2.0
    p2 = (-2.0 * b2.real + 2.0 * occupation + 1.0) / 2.0
    return QuadratureCurves(
        x_mean=x_mean,
        p_mean=p_mean,
        var_x=x2 - x_mean**2,
        var_p=p2 - p_mean**2,
        occupation=occupation,
    )


def quadrature_statistics(
    state: VariationalState, kernels: OverlapKernels, k: int
) -> QuadratureStats:
    """Moments of mode ``k``

    Raises:
        IndexError: ``k`` is not a mode index
    """
    if not 0 <= k < state.num_modes:
        raise IndexError(f"mode {k} outside 0..{state.num_modes - 1}")
    curves = quadrature_curves(state, kernels)
    return QuadratureStats(
        float(curves.x_mean[k]),
        float(curves.p_mean[k]),
        float(curves.var_x[k]),
        float(curves.var_p[k]),
        float(curves.qf[k]),
    )


def flipped_overlaps(state: VariationalState) -> Tuple[np.ndarray, np.ndarray]:
    """``<f_m|-g_n>`` and ``<g_m|-f_n>``: overlaps with ket displacements negated"""
    gamma = overlap(state.f, -state.g)
    return gamma, gamma.conj().T


def parity(
    state: VariationalState,
    kernels: OverlapKernels,
    flipped: Optional[Tuple[np.ndarray, np.ndarray]] = None,
) -> float:
    """``<sigma_x exp(i pi sum_k b_k^+ b_k)>``

    ``exp(i pi n)`` maps ``|g>`` to ``|-g>`` and ``sigma_x`` swaps the
    branches, so only overlaps with negated ket displacements enter.
    """
    norm = checked_norm(state, kernels)
    gamma, k = flipped or flipped_overlaps(state)
    value = complex(state.A.conj() @ gamma @ state.B + state.B.conj() @ k @ state.A)
    return real_part(value, "<parity>", norm) / norm


def excitation_number(state: VariationalState, kernels: OverlapKernels) -> float:
    """``<sum_k b_k^+ b_k + sigma_+ sigma_->`` with ``sigma_+ sigma_- = (1 - sigma_x)/2``"""
    sigma_x, _, _ = spin_expectations(state, kernels)
    bosons = float(np.sum(quadrature_curves(state, kernels).occupation))
    return bosons + (1.0 - sigma_x) / 2.0


class AveragedStructure(NamedTuple):
    """Real summary of the multi-D1 components"""

    A_bar: float
    B_bar: float
    f_bar: np.ndarray
    g_bar: np.ndarray
    signed: bool
    """``False`` when ``sigma_x`` vanishes and B_bar carries no sign"""


def _averaged_branch(weights: np.ndarray, displacements: np.ndarray) -> Tuple[float, np.ndarray]:
    total = complex(weights.sum())
    if abs(total) <= np.finfo(float).tiny:
        return 0.0, np.zeros(displacements.shape[1])
    return total.real, (weights.sum(axis=0) @ displacements).real / total.real


def averaged_structure(state: VariationalState, kernels: OverlapKernels) -> AveragedStructure:
    """Branch weights and weighted real displacements.

    ``A_bar = sqrt(sum A*AF / norm) > 0`` and ``B_bar`` takes the sign of
    ``sigma_x``; ``f_bar_k = Re(sum_mn A_m* A_n F_mn f_nk) / sum A*AF`` and
    likewise for ``g_bar``.
    """
    norm = checked_norm(state, kernels)
    up, f_bar = _averaged_branch(_weights(state.A, state.A, kernels.F), state.f)
    down, g_bar = _averaged_branch(_weights(state.B, state.B, kernels.G), state.g)
    sigma_x, _, _ = spin_expectations(state, kernels)
    signed = abs(sigma_x) >= UNSIGNED_COHERENCE
    sign = np.sign(sigma_x) if signed else 1.0
    return AveragedStructure(
        A_bar=float(np.sqrt(max(up, 0.0) / norm)),
        B_bar=float(sign * np.sqrt(max(down, 0.0) / norm)),
        f_bar=f_bar,
        g_bar=g_bar,
        signed=bool(signed),
    )


@dataclass(frozen=True, eq=False)
class ObservableSet:
    """Everything measured on one ground state"""

    sigma_x: float
    sigma_y: float
    sigma_z: float
    entropy: float
    excitation_number: float
    parity: float
    omega: np.ndarray
    qf: np.ndarray
    x_mean: np.ndarray
    p_mean: np.ndarray
    var_x: np.ndarray
    var_p: np.ndarray
    A_bar: float
    B_bar: float
    b_bar_signed: bool
    f_bar: np.ndarray
    g_bar: np.ndarray
    rho: np.ndarray

    ARRAYS = ("omega", "qf", "x_mean", "p_mean", "var_x", "var_p", "f_bar", "g_bar")

    @property
    def sigma_z_abs(self) -> float:
        """``|<sigma_z>|``, the same on both degenerate branches"""
        return abs(self.sigma_z)

    @property
    def sigma_y_abs(self) -> float:
        """``|<sigma_y>|``"""
        return abs(self.sigma_y)

    @property
    def order_parameter(self) -> float:
        """Signed magnetization, ``sigma_z`` or ``sigma_y`` whichever is larger"""
        return self.sigma_z if abs(self.sigma_z) >= abs(self.sigma_y) else self.sigma_y

    @property
    def qf_max(self) -> float:
        """Largest QF over the discrete modes"""
        return float(np.max(self.qf))

    @property
    def qf_max_omega(self) -> float:
        """Frequency at which QF peaks"""
        return float(self.omega[int(np.argmax(self.qf))])

    @property
    def bloch_length(self) -> float:
        """Length of the spin Bloch vector"""
        return float(np.sqrt(self.sigma_x**2 + self.sigma_y**2 + self.sigma_z**2))

    def replace(self, **changes: Any) -> "ObservableSet":
        """Copy with some fields changed"""
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> Dict[str, Any]:
        """Json form"""
        result: Dict[str, Any] = {}
        for field in dataclasses.fields(self):
            value = getattr(self, field.name)
            if field.name == "rho":
                value = {"real": value.real.tolist(), "imag": value.imag.tolist()}
            elif isinstance(value, np.ndarray):
                value = value.tolist()
            result[field.name] = value
        result["qf_max"] = self.qf_max
        result["qf_max_omega"] = self.qf_max_omega
        return result

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ObservableSet":
        """Inverse of :meth:`to_dict`"""
        kwargs = {}
        for field in dataclasses.fields(cls):
            value = data[field.name]
            if field.name == "rho":
                value = np.asarray(value["real"]) + 1j * np.asarray(value["imag"])
            elif field.name in cls.ARRAYS:
                value = np.asarray(value, dtype=float)
            kwargs[field.name] = value
        return cls(**kwargs)


def compute_observables(
    state: VariationalState, kernels: OverlapKernels, bath: DiscretizedBath
) -> ObservableSet:
    """Assemble the full observable set of ``state``

    Raises:
        DegenerateStateError: norm below 1e-14
    """
    sigma_x, sigma_y, sigma_z = spin_expectations(state, kernels)
    rho, entropy = reduced_density_entropy(state, kernels)
    curves = quadrature_curves(state, kernels)
    structure = averaged_structure(state, kernels)
    return ObservableSet(
        sigma_x=sigma_x,
        sigma_y=sigma_y,
        sigma_z=sigma_z,
        entropy=entropy,
        excitation_number=float(np.sum(curves.occupation)) + (1.0 - sigma_x) / 2.0,
        parity=parity(state, kernels),
        omega=np.asarray(bath.omega, dtype=float),
        qf=curves.qf,
        x_mean=curves.x_mean,
        p_mean=curves.p_mean,
        var_x=curves.var_x,
        var_p=curves.var_p,
        A_bar=structure.A_bar,
        B_bar=structure.B_bar,
        b_bar_signed=structure.signed,
        f_bar=structure.f_bar,
        g_bar=structure.g_bar,
        rho=rho,
    )


def relabel_to_source_frame(observables: ObservableSet, frame: FrameRotation) -> ObservableSet:
    """Express observables of a rotated solve in the frame it was rotated from.

    The averaged structure (A_bar, B_bar, f_bar, g_bar) describes the solved
    state and is left as is; the spin density matrix is rebuilt from the
    relabeled Bloch vector.
    """
    changes = {
        source: sign * getattr(observables, rotated)
        for source, rotated, sign in frame.spin_map + frame.quadrature_map
    }
    sx, sy, sz = changes["sigma_x"], changes["sigma_y"], changes["sigma_z"]
    changes["rho"] = 0.5 * np.array([[1.0 + sz, sx - 1j * sy], [sx + 1j * sy, 1.0 - sz]])
    return observables.replace(**changes)
