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
"""Coherent-state matrix elements of operators linear in the bath modes.

Every block of the Hamiltonian in spin space has the form

    O = c + delta sum_k w_k b_k^+ b_k + sum_k u_k b_k^+ + sum_k v_k b_k

and for coherent states ``|x>``, ``|y>`` the normalized element
``<x|O|y> / <x|y>`` is a polynomial in the displacements. So is the element
of a product of two such operators, which gives ``<H^2>`` without ever
leaving the coherent-state representation.
"""
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from spinboson.model.bath import DiscretizedBath
from spinboson.model.spec import ModelSpec

UP, DOWN = 0, 1


@dataclass(frozen=True, eq=False)
class BosonicOperator:
    """``c + delta sum w b^+ b + sum u b^+ + sum v b``

    Attributes:
        constant (complex): c
        number (float): delta, the weight of the free bath energy
        creation (np.ndarray): u, coefficients of ``b_k^+``
        annihilation (np.ndarray): v, coefficients of ``b_k``
        omega (np.ndarray): mode frequencies w
    """

    constant: complex
    number: float
    creation: np.ndarray
    annihilation: np.ndarray
    omega: np.ndarray

    def element(self, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        """``<x_m|O|y_n> / <x_m|y_n>`` for all rows of X (bra) and Y (ket)

        Args:
            X (np.ndarray): bra displacements, shape (N, M)
            Y (np.ndarray): ket displacements, shape (N', M)

        Returns:
            np.ndarray: shape (N, N')
        """
        Xc = X.conj()
        result = (Xc @ self.creation)[:, None] + (Y @ self.annihilation)[None, :]
        if self.number:
            result = result + self.number * ((Xc * self.omega) @ Y.T)
        return result + self.constant

    def correction(self, other: "BosonicOperator", X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        """Normal-ordering remainder of ``<x|O1 O2|y>/<x|y> - e1 e2``

        Commuting the annihilators of ``O1`` past the creators of ``O2`` leaves
        ``sum_k (d1 w_k x_k* + v1_k)(d2 w_k y_k + u2_k)``.
        """
        left = self.number * self.omega * X.conj() + self.annihilation
        right = other.number * other.omega * Y + other.creation
        return left @ right.T

    def product_element(self, other: "BosonicOperator", X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        """``<x_m|O1 O2|y_n> / <x_m|y_n>``"""
        return self.element(X, Y) * other.element(X, Y) + self.correction(other, X, Y)


@dataclass(frozen=True, eq=False)
class SpinBlockHamiltonian:
    """The four spin blocks ``<s|H|t>`` of the Hamiltonian, each a bath operator"""

    blocks: Dict[Tuple[int, int], BosonicOperator]

    @classmethod
    def from_model(cls, spec: ModelSpec, bath: DiscretizedBath) -> "SpinBlockHamiltonian":
        """Assemble the blocks for ``spec`` on ``bath``"""
        c, d, w = bath.diagonal, bath.off_diagonal, bath.omega
        tunnel = -spec.delta / 2.0
        return cls(
            {
                (UP, UP): BosonicOperator(spec.epsilon / 2.0, 1.0, c, c, w),
                (DOWN, DOWN): BosonicOperator(-spec.epsilon / 2.0, 1.0, -c, -c, w),
                (UP, DOWN): BosonicOperator(tunnel, 0.0, d, -d, w),
                (DOWN, UP): BosonicOperator(tunnel, 0.0, -d, d, w),
            }
        )

    def __getitem__(self, key: Tuple[int, int]) -> BosonicOperator:
        return self.blocks[key]

    def squared_element(self, bra: int, ket: int, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        """Normalized elements of the ``(bra, ket)`` spin block of ``H^2``"""
        return sum(
            self.blocks[bra, middle].product_element(self.blocks[middle, ket], X, Y)
            for middle in (UP, DOWN)
        )


def free_bath_energy(omega: np.ndarray) -> BosonicOperator:
    """``sum_k w_k b_k^+ b_k``"""
    zeros = np.zeros_like(omega)
    return BosonicOperator(0.0, 1.0, zeros, zeros, omega)


def displacement_coupling(creation: np.ndarray, annihilation: np.ndarray) -> BosonicOperator:
    """``sum_k u_k b_k^+ + v_k b_k`` with no constant or free part"""
    return BosonicOperator(0.0, 0.0, creation, annihilation, np.zeros_like(creation))
