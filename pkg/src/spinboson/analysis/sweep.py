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
"""Tabular view of an alpha sweep"""
from typing import Any, Dict, Optional, Sequence

import numpy as np
import pandas as pd

from spinboson.analysis.classify import PhaseLabel, PhaseTolerances, classify_phase
from spinboson.solver.solve import GroundStateRecord

SUMMARY_COLUMNS = [
    "alpha",
    "E_g",
    "varE",
    "sigma_x",
    "sigma_y_abs",
    "sigma_z_abs",
    "S_vN",
    "QF_max",
    "parity",
    "N_ex",
    "A_bar",
    "B_bar",
    "phase",
]


def summary_row(
    record: GroundStateRecord, tolerances: Optional[PhaseTolerances] = None
) -> Dict[str, Any]:
    """One line of the sweep summary"""
    obs = record.observables
    if obs is None:
        row: Dict[str, Any] = {name: np.nan for name in SUMMARY_COLUMNS}
        row.update(alpha=record.spec.alpha, E_g=record.energy, varE=record.variance)
        row["phase"] = PhaseLabel.UNCLASSIFIED.value
        return row
    return {
        "alpha": record.spec.alpha,
        "E_g": record.energy,
        "varE": record.variance,
        "sigma_x": obs.sigma_x,
        "sigma_y_abs": obs.sigma_y_abs,
        "sigma_z_abs": obs.sigma_z_abs,
        "S_vN": obs.entropy,
        "QF_max": obs.qf_max,
        "parity": obs.parity,
        "N_ex": obs.excitation_number,
        "A_bar": obs.A_bar,
        "B_bar": obs.B_bar,
        "phase": classify_phase(record, tolerances).value,
    }


def sweep_table(
    records: Sequence[GroundStateRecord], tolerances: Optional[PhaseTolerances] = None
) -> pd.DataFrame:
    """Summary rows sorted by alpha, in the fixed column order"""
    rows = [summary_row(record, tolerances) for record in records]
    table = pd.DataFrame(rows, columns=SUMMARY_COLUMNS)
    return table.sort_values("alpha", kind="mergesort").reset_index(drop=True)


def order_parameter(sweep: pd.DataFrame) -> np.ndarray:
    """``max(|sigma_z|, |sigma_y|)`` of every row"""
    return np.maximum(sweep["sigma_z_abs"].to_numpy(), sweep["sigma_y_abs"].to_numpy())


def check_sweep(sweep: pd.DataFrame, columns: Sequence[str]) -> pd.DataFrame:
    """``sweep`` sorted by alpha, after checking it has ``columns``

    Raises:
        KeyError: a column is missing
    """
    missing = [name for name in ("alpha", *columns) if name not in sweep.columns]
    if missing:
        raise KeyError(f"sweep lacks columns {missing}")
    return sweep.sort_values("alpha", kind="mergesort").reset_index(drop=True)
