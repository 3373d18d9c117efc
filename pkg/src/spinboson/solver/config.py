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
"""Settings of the relaxation solver"""
import os
from dataclasses import asdict, dataclass, replace
from typing import Any, Dict, Optional

import numpy as np

from spinboson.exception.configuration_error import ConfigurationError
from spinboson.params import Params


@dataclass(frozen=True)
class SolverConfig:
    """How hard and how long to search for the ground state

    Attributes:
        multiplicity (int): N, coherent states per spin branch
        restarts (int): independent trajectories
        max_sweeps (int): sweep budget of one trajectory
        relaxation_start (float): first relaxation factor f0
        relaxation_end (float): last relaxation factor f1
        annealing_stages (int): geometric steps from f0 down to f1
        window (int): sweeps over which the energy change is measured
        energy_tolerance (float): relative energy change over a window that
            counts as converged
        parameter_tolerance (float): largest admissible ``|x_next - x|`` at
            convergence
        stall_tolerance (float): relative energy change over a window below
            which the current annealing stage ends
        seed (int): root of every random stream
        init_scale (float): width of random displacements, in units of the
            classical displacement of each mode
        structured_fraction (float): share of restarts seeded from free,
            delocalized and localized guesses
        real_mode (bool): restrict all parameters to real values
        workers (int): processes running trajectories, 0 for all cores
        degeneracy_tolerance (Optional[float]): relative energy gap under which
            a second solution counts as degenerate, ``10 * energy_tolerance``
            when unset
        verbose (bool): keep per-window trajectory logs
    """

    multiplicity: int = 6
    restarts: int = 64
    max_sweeps: int = 200_000
    relaxation_start: float = 0.1
    relaxation_end: float = 0.001
    annealing_stages: int = 10
    window: int = 100
    energy_tolerance: float = 1e-12
    parameter_tolerance: float = 1e-6
    stall_tolerance: float = 1e-9
    seed: int = 0
    init_scale: float = 1.0
    structured_fraction: float = 0.25
    real_mode: bool = False
    workers: int = 1
    degeneracy_tolerance: Optional[float] = None
    verbose: bool = False

    def __post_init__(self) -> None:
        checks = [
            ("multiplicity", self.multiplicity >= 1, "must be at least 1"),
            ("restarts", self.restarts >= 1, "must be at least 1"),
            ("max_sweeps", self.max_sweeps >= 1, "must be at least 1"),
            (
                "relaxation_end",
                0.0 < self.relaxation_end <= self.relaxation_start < 1.0,
                "need 0 < relaxation_end <= relaxation_start < 1",
            ),
            ("annealing_stages", self.annealing_stages >= 1, "must be at least 1"),
            ("window", self.window >= 1, "must be at least 1"),
            ("energy_tolerance", self.energy_tolerance > 0.0, "must be positive"),
            ("parameter_tolerance", self.parameter_tolerance > 0.0, "must be positive"),
            ("stall_tolerance", self.stall_tolerance > 0.0, "must be positive"),
            ("seed", 0 <= self.seed < 2**64, "must fit in 64 unsigned bits"),
            ("init_scale", self.init_scale > 0.0, "must be positive"),
            (
                "structured_fraction",
                0.0 <= self.structured_fraction <= 1.0,
                "must lie in [0, 1]",
            ),
            ("workers", self.workers >= 0, "must be non-negative"),
        ]
        for name, ok, reason in checks:
            if not ok:
                raise ConfigurationError(
                    f"{reason}, got {getattr(self, name)!r}", field=f"solver.{name}"
                )

    @property
    def annealing_schedule(self) -> np.ndarray:
        """Relaxation factor of every stage, geometric from f0 to f1"""
        if self.annealing_stages == 1:
            return np.array([self.relaxation_start])
        return np.geomspace(
            self.relaxation_start, self.relaxation_end, self.annealing_stages
        )

    @property
    def sweeps_per_stage(self) -> int:
        """Budget of one annealing stage before it is ended regardless of progress"""
        return max(self.window, self.max_sweeps // self.annealing_stages)

    @property
    def degeneracy_gap(self) -> float:
        """Relative energy gap under which two solutions are degenerate"""
        if self.degeneracy_tolerance is not None:
            return self.degeneracy_tolerance
        return 10.0 * self.energy_tolerance

    @property
    def resolved_workers(self) -> int:
        """Worker count with 0 meaning every available core"""
        return self.workers or os.cpu_count() or 1

    def replace(self, **changes: Any) -> "SolverConfig":
        """Copy with some fields changed"""
        return replace(self, **changes)

    def to_dict(self) -> Dict[str, Any]:
        """Plain-json form"""
        return asdict(self)

    @classmethod
    def from_params(cls, params: Params) -> "SolverConfig":
        """Consume a ``solver`` config section

        Raises:
            ConfigurationError: mistyped or unknown fields
        """
        defaults = cls()
        kwargs: Dict[str, Any] = {}
        for name, value in asdict(defaults).items():
            if name not in params:
                continue
            if name == "degeneracy_tolerance":
                kwargs[name] = params.pop_float(name)
            elif isinstance(value, bool):
                kwargs[name] = params.pop_bool(name)
            elif isinstance(value, int):
                kwargs[name] = params.pop_int(name)
            else:
                kwargs[name] = params.pop_float(name)
        params.assert_empty("solver")
        return cls(**kwargs)
