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
"""Convergence of the ground-state energy in the number of modes and coherent states"""
import logging
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.stats import linregress

from spinboson.exception.configuration_error import ConfigurationError
from spinboson.model.bath import discretize_bath
from spinboson.model.spec import ModelSpec
from spinboson.solver.config import SolverConfig
from spinboson.solver.solve import GroundStateRecord, solve

logger = logging.getLogger(__name__)

MODES_COLUMNS = ["M", "E_g", "delta_E"]
MULTIPLICITY_COLUMNS = ["N", "E_g", "variance", "sigma_z", "sigma_x", "S_vN", "QF_max"]


def tail_decay_rate(spec: ModelSpec) -> float:
    """``(s + 1) ln Lambda``, the rate at which the discarded low-frequency
    coupling shrinks per added mode"""
    return (spec.s + 1.0) * float(np.log(spec.lambda_grid))


@dataclass(frozen=True, eq=False)
class ConvergenceBenchmark:
    """Energy against M at fixed N and against N at fixed M

    Attributes:
        modes (pd.DataFrame): ``MODES_COLUMNS`` rows, ascending M
        multiplicity (pd.DataFrame): ``MULTIPLICITY_COLUMNS`` rows, ascending N
        decay_rate (float): fitted ``-d ln|delta_E| / dM``, ``nan`` when
            fewer than two usable points exist
        r_squared (float): quality of that fit
        reference_rate (float): :func:`tail_decay_rate` of the model
    """

    modes: pd.DataFrame
    multiplicity: pd.DataFrame
    decay_rate: float
    r_squared: float
    reference_rate: float

    @property
    def fitted(self) -> bool:
        """Whether an exponential could be fitted"""
        return bool(np.isfinite(self.decay_rate))

    @property
    def monotone_in_multiplicity(self) -> bool:
        """E_g never rises when N grows"""
        energies = self.multiplicity["E_g"].to_numpy()
        return bool(np.all(np.diff(energies) <= 1e-10 * np.maximum(1.0, np.abs(energies[1:]))))


def fit_exponential_decay(M: np.ndarray, delta_E: np.ndarray) -> Tuple[float, float]:
    """Least squares of ``ln|delta_E|`` against ``M``

    Points with ``delta_E == 0`` (the reference itself) are dropped.

    Returns:
        Tuple[float, float]: ``(rate, r_squared)``, both ``nan`` with fewer than two points
    """
    usable = np.abs(delta_E) > 0.0
    if np.count_nonzero(usable) < 2:
        return np.nan, np.nan
    fit = linregress(M[usable], np.log(np.abs(delta_E[usable])))
    return -float(fit.slope), float(fit.rvalue**2)


def _multiplicity_row(N: int, record: GroundStateRecord) -> List[float]:
    obs = record.observables
    if obs is None:
        return [N, record.energy, record.variance, np.nan, np.nan, np.nan, np.nan]
    return [N, record.energy, record.variance, obs.sigma_z, obs.sigma_x, obs.entropy, obs.qf_max]


def benchmark_convergence(
    spec: ModelSpec,
    config: SolverConfig,
    M_list: Sequence[int],
    N_list: Sequence[int],
) -> ConvergenceBenchmark:
    """Solve the model over ``M_list`` at ``config.multiplicity`` and over
    ``N_list`` at ``spec.num_modes``

    Raises:
        ConfigurationError: an empty list
        NonConvergenceError: any point failed to converge
    """
    if not M_list or not N_list:
        raise ConfigurationError("need at least one M and one N", field="bench")
    modes = []
    for M in sorted(set(int(m) for m in M_list)):
        sized = spec.replace(num_modes=M)
        record = solve(sized, discretize_bath(sized), config, measure=False)
        logger.info(f"M = {M}: E_g = {record.energy:.12f}")
        modes.append((M, record.energy))
    M_values = np.array([m for m, _ in modes], dtype=float)
    energies = np.array([e for _, e in modes])
    delta_E = energies - energies[-1]
    if len(modes) == 1:
        delta_E = np.array([np.nan])
        logger.warning("a single M gives no energy shift to fit")
    rate, r_squared = fit_exponential_decay(M_values, delta_E)

    bath = discretize_bath(spec)
    rows = []
    for N in sorted(set(int(n) for n in N_list)):
        record = solve(spec, bath, config.replace(multiplicity=N))
        logger.info(f"N = {N}: E_g = {record.energy:.12f}")
        rows.append(_multiplicity_row(N, record))
    return ConvergenceBenchmark(
        modes=pd.DataFrame(
            {"M": M_values.astype(int), "E_g": energies, "delta_E": delta_E},
            columns=MODES_COLUMNS,
        ),
        multiplicity=pd.DataFrame(rows, columns=MULTIPLICITY_COLUMNS),
        decay_rate=rate,
        r_squared=r_squared,
        reference_rate=tail_decay_rate(spec),
    )


SWEEP_COLUMNS = ["alpha", "N", "E_g", "sigma_z", "sigma_x", "S_vN", "QF_max"]
COMPARED = ["E_g", "sigma_z", "sigma_x", "S_vN", "QF_max"]


@dataclass(frozen=True, eq=False)
class MultiplicityComparison:
    """The same alpha sweep solved at several multiplicities

    Attributes:
        table (pd.DataFrame): ``SWEEP_COLUMNS`` rows ordered by alpha, then N
        deviation (dict): per column of ``COMPARED``, the largest
            ``|value(N_max) - value(N_min)|`` over the alphas
    """

    table: pd.DataFrame
    deviation: Dict[str, float]

    @property
    def max_deviation(self) -> float:
        """Worst disagreement over every compared column"""
        finite = [v for v in self.deviation.values() if np.isfinite(v)]
        return max(finite) if finite else np.nan


def compare_multiplicities(
    spec: ModelSpec,
    config: SolverConfig,
    alphas: Sequence[float],
    N_list: Sequence[int],
) -> MultiplicityComparison:
    """Solve every alpha at every N of ``N_list`` and measure how far the
    smallest and the largest multiplicity disagree

    Raises:
        ConfigurationError: no alpha, or fewer than two distinct N
        NonConvergenceError: any point failed to converge
    """
    multiplicities = sorted(set(int(n) for n in N_list))
    if not alphas or len(multiplicities) < 2:
        raise ConfigurationError("need an alpha and two multiplicities to compare", field="bench")
    rows = []
    for alpha in sorted(set(float(a) for a in alphas)):
        point = spec.replace(alpha=alpha)
        bath = discretize_bath(point)
        for N in multiplicities:
            record = solve(point, bath, config.replace(multiplicity=N))
            logger.info(f"alpha = {alpha:g}, N = {N}: E_g = {record.energy:.12f}")
            row = _multiplicity_row(N, record)
            rows.append([alpha, N, row[1], *row[3:]])
    table = pd.DataFrame(rows, columns=SWEEP_COLUMNS)
    low = table[table["N"] == multiplicities[0]].set_index("alpha")
    high = table[table["N"] == multiplicities[-1]].set_index("alpha")
    gap = (high[COMPARED] - low[COMPARED]).abs()
    deviation = {column: float(gap[column].max()) for column in COMPARED}
    return MultiplicityComparison(table=table, deviation=deviation)
