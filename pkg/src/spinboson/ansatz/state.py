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
"""Multi-D1 trial states: N coherent states per spin branch"""
import logging
from dataclasses import dataclass
from typing import Any, Dict, Optional

import numpy as np

from spinboson.exception.numerics_error import DimensionMismatchError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class VariationalState:
    """|Psi> = sum_n A_n |up> |f_n> + B_n |down> |g_n>

    ``|f_n>`` is the multimode coherent state with displacements
    ``f[n, k]``. All parameters are complex.

    Attributes:
        A (np.ndarray): spin-up weights, shape (N,)
        B (np.ndarray): spin-down weights, shape (N,)
        f (np.ndarray): spin-up displacements, shape (N, M)
        g (np.ndarray): spin-down displacements, shape (N, M)
    """

    A: np.ndarray
    B: np.ndarray
    f: np.ndarray
    g: np.ndarray

    def __post_init__(self) -> None:
        for name in ("A", "B", "f", "g"):
            object.__setattr__(
                self, name, np.array(getattr(self, name), dtype=complex, copy=True)
            )
        if self.A.ndim != 1 or self.A.size == 0:
            raise DimensionMismatchError("A", (max(self.A.size, 1),), self.A.shape)
        N = self.A.size
        if self.f.ndim != 2 or self.f.shape[0] != N or self.f.shape[1] == 0:
            raise DimensionMismatchError("f", (N, max(self.f.shape[-1], 1)), self.f.shape)
        for name, expected in (("B", (N,)), ("g", self.f.shape)):
            if getattr(self, name).shape != expected:
                raise DimensionMismatchError(name, expected, getattr(self, name).shape)
        for name in ("A", "B", "f", "g"):
            array = getattr(self, name)
            if not np.all(np.isfinite(array)):
                raise ValueError(f"{name} has non-finite entries")
            array.setflags(write=False)

    @property
    def multiplicity(self) -> int:
        """N"""
        return int(self.A.size)

    @property
    def num_modes(self) -> int:
        """M"""
        return int(self.f.shape[1])

    @classmethod
    def free(cls, multiplicity: int, num_modes: int, delta: float = 1.0) -> "VariationalState":
        """Bath vacuum times the tunneling ground state of the bare spin.

        The weight sits on the first component; the others are zero.
        """
        A = np.zeros(multiplicity, dtype=complex)
        B = np.zeros(multiplicity, dtype=complex)
        A[0] = np.sqrt(0.5)
        B[0] = np.sqrt(0.5) * (1.0 if delta >= 0 else -1.0)
        zeros = np.zeros((multiplicity, num_modes), dtype=complex)
        return cls(A, B, zeros, zeros)

    @classmethod
    def polaron(
        cls,
        shift: np.ndarray,
        multiplicity: int = 1,
        up: bool = True,
    ) -> "VariationalState":
        """Single-branch displaced vacuum with displacement ``shift``"""
        displacements = np.tile(np.asarray(shift, dtype=complex), (multiplicity, 1))
        A = np.zeros(multiplicity, dtype=complex)
        B = np.zeros(multiplicity, dtype=complex)
        (A if up else B)[0] = 1.0
        return cls(A, B, displacements, -displacements)

    def scaled(self, factor: complex) -> "VariationalState":
        """Weights multiplied by ``factor``"""
        return VariationalState(self.A * factor, self.B * factor, self.f, self.g)

    def replace(self, **changes: Any) -> "VariationalState":
        """Copy with some of A, B, f, g changed"""
        fields = {"A": self.A, "B": self.B, "f": self.f, "g": self.g}
        fields.update(changes)
        return VariationalState(**fields)

    def real_part(self) -> "VariationalState":
        """Copy with imaginary parts dropped"""
        return VariationalState(self.A.real, self.B.real, self.f.real, self.g.real)

    def flat(self) -> np.ndarray:
        """All parameters as one real vector (real parts, then imaginary parts)"""
        packed = np.concatenate([self.A, self.B, self.f.ravel(), self.g.ravel()])
        return np.concatenate([packed.real, packed.imag])

    @classmethod
    def from_flat(cls, vector: np.ndarray, multiplicity: int, num_modes: int) -> "VariationalState":
        """Inverse of :meth:`flat`"""
        half = vector.size // 2
        packed = vector[:half] + 1j * vector[half:]
        N, M = multiplicity, num_modes
        return cls(
            packed[:N],
            packed[N : 2 * N],
            packed[2 * N : 2 * N + N * M].reshape(N, M),
            packed[2 * N + N * M :].reshape(N, M),
        )

    def to_off_diagonal_frame(self) -> "VariationalState":
        """Image of a diagonal-frame state under the off-diagonal frame rotation.

        Undoes ``exp(-i pi sx / 4) exp(i pi sum_k n_k / 2)``: each component is
        spread over both spin branches with displacements ``-i f``, so the
        multiplicity doubles. The energy in the off-diagonal model equals the
        diagonal-frame energy of ``self``.
        """
        root = np.sqrt(0.5)
        displacements = np.concatenate([-1j * self.f, -1j * self.g])
        A = root * np.concatenate([self.A, 1j * self.B])
        B = root * np.concatenate([1j * self.A, self.B])
        return VariationalState(A, B, displacements, displacements.copy())

    def to_dict(self) -> Dict[str, Any]:
        """Json form, complex numbers split into real and imaginary lists"""
        return {
            name: {"real": array.real.tolist(), "imag": array.imag.tolist()}
            for name, array in (("A", self.A), ("B", self.B), ("f", self.f), ("g", self.g))
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "VariationalState":
        """Inverse of :meth:`to_dict`"""
        arrays = {
            name: np.asarray(data[name]["real"]) + 1j * np.asarray(data[name]["imag"])
            for name in ("A", "B", "f", "g")
        }
        return cls(**arrays)


def random_state(
    rng: np.random.Generator,
    multiplicity: int,
    width: np.ndarray,
    real: bool = False,
) -> VariationalState:
    """Random trial state.

    Weights are uniform on the complex unit disc; displacements are
    ``width_k (u + i v)`` with ``u, v`` standard normal.

    Args:
        rng (np.random.Generator): source of randomness
        multiplicity (int): N
        width (np.ndarray): per-mode displacement scale, shape (M,)
        real (bool): if ``True`` all imaginary parts are zero

    Returns:
        VariationalState: unnormalized random state
    """
    N, M = multiplicity, width.size

    def disc() -> np.ndarray:
        radius = np.sqrt(rng.uniform(size=N))
        if real:
            return radius * rng.choice([-1.0, 1.0], size=N)
        return radius * np.exp(2j * np.pi * rng.uniform(size=N))

    def displacement() -> np.ndarray:
        u = rng.standard_normal((N, M))
        if real:
            return width * u
        return width * (u + 1j * rng.standard_normal((N, M)))

    return VariationalState(disc(), disc(), displacement(), displacement())


def displacement_width(
    diagonal: np.ndarray,
    omega: np.ndarray,
    delta: float,
    scale: float = 1.0,
    cap: float = 5.0,
    eta: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Basin width ``min(scale * eta_k / (2 omega_k + |Delta|), cap)``

    ``eta`` defaults to twice the diagonal coupling.
    """
    eta = 2.0 * np.abs(diagonal) if eta is None else eta
    return np.minimum(scale * eta / (2.0 * omega + abs(delta)), cap)
