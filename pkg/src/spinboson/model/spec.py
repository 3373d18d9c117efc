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
"""Physical parameters of the anisotropic spin-boson model"""
import dataclasses
import json
import logging
import zlib
from dataclasses import dataclass, field
from typing import Any, ClassVar, Dict, Optional, Tuple

import numpy as np

from spinboson.exception.configuration_error import ConfigurationError
from spinboson.params import Params
from spinboson.registrable import Registrable

logger = logging.getLogger(__name__)


@Registrable.root()
class CouplingCase(Registrable):
    """How the total coupling of each mode splits into RW and CRW parts.

    A case is a pair of weights ``(w_lambda, w_gamma)`` with
    ``|w_lambda| + |w_gamma| = 1``; mode ``k`` then couples with
    ``lambda_k = w_lambda * eta_k`` and ``gamma_k = w_gamma * eta_k``.
    """

    default_name = "diagonal"
    weight_lambda: float
    weight_gamma: float

    @property
    def weights(self) -> Tuple[float, float]:
        """``(w_lambda, w_gamma)``"""
        return self.weight_lambda, self.weight_gamma

    def couplings(self, eta: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Split total couplings into ``(lambda_k, gamma_k)``"""
        return self.weight_lambda * eta, self.weight_gamma * eta

    @property
    def is_diagonal(self) -> bool:
        """Only the sigma_z coupling survives (``lambda == gamma``)"""
        return bool(np.isclose(self.weight_lambda, self.weight_gamma))

    @property
    def is_off_diagonal(self) -> bool:
        """Only the sigma_y coupling survives (``lambda == -gamma``)"""
        return bool(np.isclose(self.weight_lambda, -self.weight_gamma))

    @property
    def conserves_excitations(self) -> bool:
        """Pure rotating-wave coupling, where the excitation number is conserved"""
        return self.weight_gamma == 0.0

    def to_params(self) -> Dict[str, Any]:
        """Config that rebuilds the case"""
        return {"type": self.name()}

    def __eq__(self, other: Any) -> bool:
        return isinstance(other, CouplingCase) and self.weights == other.weights

    def __hash__(self) -> int:
        return hash(self.weights)

    def __repr__(self) -> str:
        return f"{type(self).__name__}{self.weights}"


@CouplingCase.register("diagonal")
class Diagonal(CouplingCase):
    """sigma_z coupling to the bath positions, ``lambda = gamma = eta/2``"""

    weight_lambda = 0.5
    weight_gamma = 0.5


@CouplingCase.register("off_diagonal")
class OffDiagonal(CouplingCase):
    """sigma_y coupling to the bath momenta, ``lambda = -gamma = eta/2``"""

    weight_lambda = 0.5
    weight_gamma = -0.5


@CouplingCase.register("rotating_wave")
class RotatingWave(CouplingCase):
    """Excitation conserving coupling only, ``lambda = eta``"""

    weight_lambda = 1.0
    weight_gamma = 0.0


@CouplingCase.register("counter_rotating_wave")
class CounterRotatingWave(CouplingCase):
    """Counter-rotating coupling only, ``gamma = eta``"""

    weight_lambda = 0.0
    weight_gamma = 1.0


@CouplingCase.register("general")
class General(CouplingCase):
    """Arbitrary weights interpolating between the named cases

    Args:
        weight_lambda (float): share of the rotating-wave coupling
        weight_gamma (float): share of the counter-rotating coupling
    """

    def __init__(self, weight_lambda: float, weight_gamma: float) -> None:
        weight_lambda, weight_gamma = float(weight_lambda), float(weight_gamma)
        if not np.isclose(abs(weight_lambda) + abs(weight_gamma), 1.0, atol=1e-12):
            raise ConfigurationError(
                f"|w_lambda| + |w_gamma| must be 1, got "
                f"{abs(weight_lambda) + abs(weight_gamma)}",
                field="model.coupling_case",
            )
        self.weight_lambda = weight_lambda
        self.weight_gamma = weight_gamma

    def to_params(self) -> Dict[str, Any]:
        """Config that rebuilds the case"""
        return {
            "type": "general",
            "weight_lambda": self.weight_lambda,
            "weight_gamma": self.weight_gamma,
        }


CASE_ALIASES = {
    "offdiagonal": "off_diagonal",
    "rw": "rotating_wave",
    "crw": "counter_rotating_wave",
}
"""short names accepted on the command line"""


def coupling_case(config: Any) -> CouplingCase:
    """Resolve a case from a name, alias, mapping or instance"""
    if isinstance(config, CouplingCase):
        return config
    if isinstance(config, str):
        config = CASE_ALIASES.get(config.lower(), config.lower())
    elif isinstance(config, (dict, Params)) and "type" in config:
        config = dict(config)
        config["type"] = CASE_ALIASES.get(config["type"], config["type"])
    return CouplingCase.from_params(config)


@dataclass(frozen=True)
class FrameRotation:
    """Observable relabeling between a rotated frame and its source frame.

    Expectation values in the frame of ``source_case`` follow from those of
    the diagonal frame as ``sigma_z = -sigma_y``, ``sigma_y = sigma_z``,
    ``<x_k> = <p_k>`` and ``<p_k> = -<x_k>`` (right-hand sides rotated).
    """

    source_case: str = "off_diagonal"
    spin_map: Tuple[Tuple[str, str, float], ...] = (
        ("sigma_x", "sigma_x", 1.0),
        ("sigma_y", "sigma_z", 1.0),
        ("sigma_z", "sigma_y", -1.0),
    )
    """``(source name, rotated name, sign)``: source = sign * rotated"""
    quadrature_map: Tuple[Tuple[str, str, float], ...] = (
        ("x_mean", "p_mean", 1.0),
        ("p_mean", "x_mean", -1.0),
        ("var_x", "var_p", 1.0),
        ("var_p", "var_x", 1.0),
    )


@dataclass(frozen=True)
class ModelSpec:
    """Parameters of the Hamiltonian

    H = eps/2 sz - Delta/2 sx + sum_k w_k b_k^+ b_k
        + sz/2 sum_k (lambda_k + gamma_k)(b_k + b_k^+)
        + i sy/2 sum_k (gamma_k - lambda_k)(b_k^+ - b_k)

    and the power-law spectral density J(w) = 2 alpha w_c^(1-s) w^s on (0, w_c],
    normalized so that the total coupling is sum_k eta_k^2 = int J.
    """

    s: float
    alpha: float
    delta: float
    epsilon: float = 0.0
    omega_c: float = 1.0
    lambda_grid: float = 1.05
    num_modes: int = 430
    coupling_case: CouplingCase = field(default_factory=Diagonal)
    frame: Optional[FrameRotation] = None

    FIELDS: ClassVar[Tuple[str, ...]] = (
        "s",
        "alpha",
        "delta",
        "epsilon",
        "omega_c",
        "lambda_grid",
        "num_modes",
    )

    def __post_init__(self) -> None:
        object.__setattr__(self, "coupling_case", coupling_case(self.coupling_case))
        checks = [
            ("s", 0.0 < self.s < 1.0, "must lie in (0, 1)"),
            ("alpha", self.alpha >= 0.0, "must be non-negative"),
            ("omega_c", self.omega_c > 0.0, "must be positive"),
            ("lambda_grid", self.lambda_grid > 1.0, "must exceed 1"),
            ("num_modes", self.num_modes >= 1, "must be at least 1"),
        ]
        for name, ok, reason in checks:
            if not ok:
                raise ConfigurationError(
                    f"{reason}, got {getattr(self, name)!r}", field=f"model.{name}"
                )
        for name in self.FIELDS:
            if not np.isfinite(getattr(self, name)):
                raise ConfigurationError("must be finite", field=f"model.{name}")

    def replace(self, **changes: Any) -> "ModelSpec":
        """Copy with some fields changed"""
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> Dict[str, Any]:
        """Plain-json form"""
        result: Dict[str, Any] = {name: getattr(self, name) for name in self.FIELDS}
        result["coupling_case"] = self.coupling_case.to_params()
        if self.frame is not None:
            result["frame"] = self.frame.source_case
        return result

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ModelSpec":
        """Inverse of :meth:`to_dict`"""
        return cls.from_params(Params(json.loads(json.dumps(data)), history="model."))

    @classmethod
    def from_params(cls, params: Params) -> "ModelSpec":
        """Consume a ``model`` config section

        Raises:
            ConfigurationError: missing, mistyped or unknown fields
        """
        frame = params.pop("frame", None)
        spec = cls(
            s=params.pop_float("s"),
            alpha=params.pop_float("alpha"),
            delta=params.pop_float("delta"),
            epsilon=params.pop_float("epsilon", 0.0),
            omega_c=params.pop_float("omega_c", 1.0),
            lambda_grid=params.pop_float("lambda_grid", 1.05),
            num_modes=params.pop_int("num_modes", 430),
            coupling_case=coupling_case(
                params.pop("coupling_case", "diagonal", keep_as_dict=True)
            ),
            frame=FrameRotation(source_case=frame) if frame else None,
        )
        params.assert_empty("model")
        return spec

    def fingerprint(self) -> str:
        """adler32 of the key-sorted json form"""
        dumped = json.dumps(self.to_dict(), sort_keys=True)
        return str(zlib.adler32(dumped.encode()))
