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
"""Logarithmic discretization of the bosonic bath"""
import logging
import zlib
from dataclasses import dataclass
from typing import Optional

import numpy as np
import pandas as pd

from spinboson.exception.configuration_error import ConfigurationError
from spinboson.model.spec import Diagonal, FrameRotation, ModelSpec

logger = logging.getLogger(__name__)

BATH_COLUMNS = ["k", "omega_k", "eta_k", "lambda_k", "gamma_k"]


@dataclass(frozen=True, eq=False)
class DiscretizedBath:
    """Frequencies and couplings of the M discrete modes.

    Attributes:
        omega (np.ndarray): mode frequencies, strictly increasing
        eta (np.ndarray): total couplings, ``eta_k = |lambda_k| + |gamma_k|``
        lam (np.ndarray): rotating-wave couplings ``lambda_k``
        gamma (np.ndarray): counter-rotating couplings ``gamma_k``
    """

    omega: np.ndarray
    eta: np.ndarray
    lam: np.ndarray
    gamma: np.ndarray

    def __post_init__(self) -> None:
        for name in ("omega", "eta", "lam", "gamma"):
            array = np.asarray(getattr(self, name), dtype=float)
            array.setflags(write=False)
            object.__setattr__(self, name, array)
        shapes = {a.shape for a in (self.omega, self.eta, self.lam, self.gamma)}
        if len(shapes) != 1 or self.omega.ndim != 1 or self.omega.size == 0:
            raise ConfigurationError(f"bath arrays must share one 1d shape, got {shapes}")

    @property
    def num_modes(self) -> int:
        """M"""
        return int(self.omega.size)

    @property
    def diagonal(self) -> np.ndarray:
        """sigma_z coupling per mode, ``(lambda_k + gamma_k) / 2``"""
        return (self.lam + self.gamma) / 2.0

    @property
    def off_diagonal(self) -> np.ndarray:
        """i sigma_y coupling per mode, ``(gamma_k - lambda_k) / 2``"""
        return (self.gamma - self.lam) / 2.0

    def polaron_shift(self) -> np.ndarray:
        """Classical displacement ``-(lambda_k + gamma_k) / (2 omega_k)``"""
        return -self.diagonal / self.omega

    def reorganization_energy(self) -> float:
        """``sum_k (lambda_k + gamma_k)^2 / (4 omega_k)``, the polaron binding energy"""
        return float(np.sum(self.diagonal**2 / self.omega))

    def subset(self, modes: np.ndarray) -> "DiscretizedBath":
        """Bath restricted to the given mode indices"""
        return DiscretizedBath(
            self.omega[modes], self.eta[modes], self.lam[modes], self.gamma[modes]
        )

    def fingerprint(self) -> str:
        """adler32 over the raw bytes of all four arrays"""
        checksum = 1
        for array in (self.omega, self.eta, self.lam, self.gamma):
            checksum = zlib.adler32(np.ascontiguousarray(array).tobytes(), checksum)
        return str(checksum)


def _check_discretizable(spec: ModelSpec) -> None:
    if spec.num_modes < 1:
        raise ConfigurationError("must be at least 1", field="model.num_modes")
    if spec.lambda_grid <= 1.0:
        raise ConfigurationError("must exceed 1", field="model.lambda_grid")
    if not 0.0 < spec.s < 1.0:
        raise ConfigurationError("must lie in (0, 1)", field="model.s")


def discretize_bath(spec: ModelSpec) -> DiscretizedBath:
    """Split (0, w_c] into M logarithmic intervals and collapse each into one mode.

    Interval ``k`` is ``[a, b] = [L^(k-M), L^(k+1-M)] w_c``. Its mode carries the
    interval's total coupling ``eta_k^2 = int_a^b J`` at the coupling-weighted
    mean frequency ``omega_k = int_a^b J w / eta_k^2``. Both integrals are taken
    in closed form; spectral weight below ``L^-M w_c`` is dropped.

    Args:
        spec (ModelSpec): model parameters

    Returns:
        DiscretizedBath: the M modes, lowest frequency first

    Raises:
        ConfigurationError: ``M < 1``, ``L <= 1`` or ``s`` outside (0, 1)
    """
    _check_discretizable(spec)
    s, M = spec.s, spec.num_modes
    log_grid = np.log(spec.lambda_grid)
    k = np.arange(M)
    log_a = (k - M) * log_grid + np.log(spec.omega_c)

    # b^p - a^p = a^p expm1(p ln L), accurate as L -> 1
    def interval_power(p: float) -> np.ndarray:
        return np.exp(p * log_a) * np.expm1(p * log_grid)

    prefactor = 2.0 * spec.alpha * spec.omega_c ** (1.0 - s)
    eta = np.sqrt(prefactor * interval_power(s + 1.0) / (s + 1.0))
    omega = (
        (s + 1.0)
        / (s + 2.0)
        * np.exp(log_a)
        * np.expm1((s + 2.0) * log_grid)
        / np.expm1((s + 1.0) * log_grid)
    )
    lam, gamma = spec.coupling_case.couplings(eta)
    logger.debug(
        f"discretized bath: M={M}, omega in [{omega[0]:.3e}, {omega[-1]:.3e}], "
        f"sum eta^2 = {np.sum(eta**2):.6e}"
    )
    return DiscretizedBath(omega=omega, eta=eta, lam=lam, gamma=gamma)


def spectral_moment(
    spec: ModelSpec,
    power: float,
    lower: Optional[float] = None,
    upper: Optional[float] = None,
) -> float:
    """Closed form of ``int_lower^upper J(w) w^power dw``

    Args:
        spec (ModelSpec): model parameters
        power (float): moment order, ``0`` for the total coupling, ``-1`` for
            the reorganization integral
        lower (Optional[float]): lower limit, default ``L^-M w_c`` (retained support)
        upper (Optional[float]): upper limit, default ``w_c``

    Returns:
        float: value of the integral
    """
    s = spec.s
    lower = spec.lambda_grid ** (-spec.num_modes) * spec.omega_c if lower is None else lower
    upper = spec.omega_c if upper is None else upper
    prefactor = 2.0 * spec.alpha * spec.omega_c ** (1.0 - s)
    exponent = s + 1.0 + power
    if exponent == 0.0:
        return float(prefactor * np.log(upper / lower))
    return float(prefactor * (upper**exponent - lower**exponent) / exponent)


def rotate_offdiagonal_to_diagonal(spec: ModelSpec) -> ModelSpec:
    """Map the off-diagonal model onto the diagonal one at zero bias.

    The spin rotation ``exp(-i theta sx / 2)`` with ``theta = -pi/2`` turns the
    ``sy`` coupling into a ``sz`` coupling to the bath momenta; a quarter turn
    of every bath phase turns momenta into positions. The spectrum is
    unchanged, so both specs share their ground energy. The returned spec
    carries a :class:`FrameRotation` describing how observables map back.

    Args:
        spec (ModelSpec): an off-diagonal spec with ``epsilon == 0``

    Returns:
        ModelSpec: diagonal spec with ``frame`` set

    Raises:
        ConfigurationError: the spec is not off-diagonal or has a bias
    """
    if not spec.coupling_case.is_off_diagonal:
        raise ConfigurationError(
            f"rotation applies to the off-diagonal case, got {spec.coupling_case!r}",
            field="model.coupling_case",
        )
    if spec.epsilon != 0.0:
        raise ConfigurationError(
            "rotation requires zero energy bias", field="model.epsilon"
        )
    return spec.replace(coupling_case=Diagonal(), frame=FrameRotation())


def bath_table(bath: DiscretizedBath) -> pd.DataFrame:
    """One row per mode with columns k, omega_k, eta_k, lambda_k, gamma_k"""
    return pd.DataFrame(
        {
            "k": np.arange(bath.num_modes),
            "omega_k": bath.omega,
            "eta_k": bath.eta,
            "lambda_k": bath.lam,
            "gamma_k": bath.gamma,
        },
        columns=BATH_COLUMNS,
    )
