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
"""Files a run leaves behind: json records and plot-ready csv tables"""
import json
import logging
import os
from numbers import Real
from typing import Any, Dict, List, Optional, Sequence, Tuple, Type, Union

import numpy as np
import pandas as pd

from spinboson.analysis.sweep import order_parameter
from spinboson.exception.configuration_error import ConfigurationError
from spinboson.observables import ObservableSet
from spinboson.params import ParamsEncoder
from spinboson.solver.solve import GroundStateRecord

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

REQUIRED_FIELDS: List[Tuple[str, Union[Type[Any], Tuple[Type[Any], ...]]]] = [
    ("schema_version", int),
    ("config_hash", str),
    ("spec", dict),
    ("energy", Real),
    ("variance", Real),
    ("state", dict),
    ("sweeps", int),
    ("restart_index", int),
    ("degenerate_partner", bool),
    ("converged_count", int),
    ("residual", Real),
    ("spec_fingerprint", str),
    ("bath_fingerprint", str),
    ("wall_time", Real),
]
"""``(key, type)`` every record file carries"""

OPTIONAL_FIELDS: List[Tuple[str, Union[Type[Any], Tuple[Type[Any], ...]]]] = [
    ("partner_energy", Real),
    ("partner_order", Real),
    ("observables", dict),
]
"""``(key, type)`` that may also be ``null``"""

RECORD_FILE = "record.json"
CSV_NAMES = {
    "summary": "summary.csv",
    "order_parameter": "order_parameter.csv",
    "entropy": "entropy.csv",
    "qf_curve": "qf_curve.csv",
    "displacements": "displacements.csv",
    "phase_map": "phase_map.csv",
    "boundaries": "boundaries.csv",
    "convergence_modes": "convergence_modes.csv",
    "convergence_multiplicity": "convergence_multiplicity.csv",
    "multiplicity_sweep": "multiplicity_sweep.csv",
    "trajectories": "trajectories.csv",
    "bath": "bath.csv",
    "phase_summary": "phase_summary.csv",
    "transitions": "transitions.csv",
    "displacement_fits": "displacement_fits.csv",
    "critical_line": "critical_line.csv",
    "mirror": "mirror.csv",
    "status": "status.csv",
}
"""file name of every table a run can write"""

QF_COLUMNS = ["k", "omega_k", "QF", "var_x", "var_p", "x_mean", "p_mean"]
DISPLACEMENT_COLUMNS = ["k", "omega_k", "f_bar", "g_bar"]
ORDER_PARAMETER_COLUMNS = ["alpha", "sigma_z_abs", "sigma_y_abs", "order_parameter", "parity"]
ENTROPY_COLUMNS = ["alpha", "S_vN", "QF_max"]


class RecordEncoder(ParamsEncoder):
    """Json encoder that also knows numpy scalars and arrays"""

    def default(self, obj: Any) -> Any:
        """Unwrap numpy values, defer everything else"""
        if isinstance(obj, np.bool_):
            return bool(obj)
        if isinstance(obj, np.integer):
            return int(obj)
        if isinstance(obj, np.floating):
            return float(obj)
        if isinstance(obj, np.ndarray):
            return obj.tolist()
        return super().default(obj)


def _kind(expected: Union[Type[Any], Tuple[Type[Any], ...]]) -> str:
    if isinstance(expected, tuple):
        return " or ".join(t.__name__ for t in expected)
    return expected.__name__


def _has_type(value: Any, expected: Union[Type[Any], Tuple[Type[Any], ...]]) -> bool:
    if isinstance(value, bool) and expected is not bool:
        return False
    return isinstance(value, expected)


def validate_record(data: Dict[str, Any], source: str = "record") -> Dict[str, Any]:
    """Check a record dict against the published schema

    Args:
        data (Dict[str, Any]): parsed json
        source (str): where it came from, used in messages

    Returns:
        Dict[str, Any]: ``data`` unchanged

    Raises:
        ConfigurationError: wrong schema version, a missing key or a
            mistyped value
    """
    if not isinstance(data, dict):
        raise ConfigurationError(f"{source}: top level must be a mapping")
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigurationError(
            f"{source}: schema version {version!r}, expected {SCHEMA_VERSION}",
            field="schema_version",
        )
    for key, expected in REQUIRED_FIELDS:
        if key not in data:
            raise ConfigurationError(f"{source}: missing", field=key)
        if not _has_type(data[key], expected):
            raise ConfigurationError(
                f"{source}: expected {_kind(expected)}, got {type(data[key]).__name__}",
                field=key,
            )
    for key, expected in OPTIONAL_FIELDS:
        value = data.get(key)
        if value is not None and not _has_type(value, expected):
            raise ConfigurationError(
                f"{source}: expected {_kind(expected)} or null, got {type(value).__name__}",
                field=key,
            )
    return data


def record_to_json(record: GroundStateRecord, config_hash: str) -> Dict[str, Any]:
    """Versioned json form of ``record``"""
    data = {"schema_version": SCHEMA_VERSION, "config_hash": config_hash}
    data.update(record.to_dict())
    return data


def write_json(path: str, data: Dict[str, Any]) -> str:
    """Write key-sorted json atomically, returning ``path``"""
    tmp = f"{path}.tmp"
    with open(tmp, "w") as handle:
        json.dump(data, handle, indent=2, sort_keys=True, cls=RecordEncoder)
        handle.write("\n")
    os.replace(tmp, path)
    return path


def write_record(path: str, record: GroundStateRecord, config_hash: str) -> str:
    """Validate and write one record file"""
    data = json.loads(json.dumps(record_to_json(record, config_hash), cls=RecordEncoder))
    validate_record(data, path)
    return write_json(path, data)


def read_record_with_hash(path: str) -> Tuple[GroundStateRecord, str]:
    """Load a record file and the configuration hash it was made from

    Raises:
        ConfigurationError: unreadable or invalid file
    """
    try:
        with open(path) as handle:
            data = json.load(handle)
    except (OSError, ValueError) as err:
        raise ConfigurationError(f"{path}: {err}") from err
    validate_record(data, path)
    return GroundStateRecord.from_dict(data), data["config_hash"]


def read_record(path: str) -> GroundStateRecord:
    """Load a record file after validating it"""
    return read_record_with_hash(path)[0]


def write_table(table: pd.DataFrame, directory: str, name: str) -> str:
    """Write ``table`` under its registered csv name

    Raises:
        KeyError: ``name`` is not a known table
    """
    path = os.path.join(directory, CSV_NAMES[name])
    table.to_csv(path, index=False)
    logger.debug(f"wrote {len(table)} rows to {path}")
    return path


def qf_curve_table(obs: ObservableSet) -> pd.DataFrame:
    """Per-mode quadrature statistics"""
    return pd.DataFrame(
        {
            "k": np.arange(obs.omega.size),
            "omega_k": obs.omega,
            "QF": obs.qf,
            "var_x": obs.var_x,
            "var_p": obs.var_p,
            "x_mean": obs.x_mean,
            "p_mean": obs.p_mean,
        },
        columns=QF_COLUMNS,
    )


def displacement_table(obs: ObservableSet) -> pd.DataFrame:
    """Averaged displacements of both branches"""
    return pd.DataFrame(
        {"k": np.arange(obs.omega.size), "omega_k": obs.omega, "f_bar": obs.f_bar, "g_bar": obs.g_bar},
        columns=DISPLACEMENT_COLUMNS,
    )


def order_parameter_table(summary: pd.DataFrame) -> pd.DataFrame:
    """Order parameter and parity against alpha"""
    table = summary[["alpha", "sigma_z_abs", "sigma_y_abs", "parity"]].copy()
    table["order_parameter"] = order_parameter(summary)
    return table[ORDER_PARAMETER_COLUMNS]


def entropy_table(summary: pd.DataFrame) -> pd.DataFrame:
    """Entanglement entropy and peak fluctuation against alpha"""
    return summary[ENTROPY_COLUMNS].copy()


def write_curves(directory: str, record: GroundStateRecord) -> List[str]:
    """Quadrature and displacement curves of one record, if it was measured"""
    if record.observables is None:
        return []
    return [
        write_table(qf_curve_table(record.observables), directory, "qf_curve"),
        write_table(displacement_table(record.observables), directory, "displacements"),
    ]


def write_sweep_tables(directory: str, summary: pd.DataFrame) -> List[str]:
    """Summary plus the order-parameter and entropy views of it"""
    return [
        write_table(summary, directory, "summary"),
        write_table(order_parameter_table(summary), directory, "order_parameter"),
        write_table(entropy_table(summary), directory, "entropy"),
    ]


def read_table(directory: str, name: str, columns: Optional[Sequence[str]] = None) -> pd.DataFrame:
    """Load a table written by :func:`write_table`

    Raises:
        ConfigurationError: the file is missing or lacks ``columns``
    """
    path = os.path.join(directory, CSV_NAMES.get(name, name))
    if not os.path.exists(path):
        raise ConfigurationError(f"no {os.path.basename(path)} in {directory}", field="input")
    table = pd.read_csv(path)
    missing = [c for c in columns or [] if c not in table.columns]
    if missing:
        raise ConfigurationError(f"{path} lacks columns {missing}", field="input")
    return table
