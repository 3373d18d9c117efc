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
import numpy as np
import pandas as pd
import pytest

from spinboson.analysis.sweep import (
    SUMMARY_COLUMNS,
    check_sweep,
    order_parameter,
    summary_row,
    sweep_table,
)

from tests.state_examples import small_spec, synthetic_observables, synthetic_record


def test_summary_row():
    obs = synthetic_observables(sigma_z=-0.4, sigma_y=0.1, entropy=0.3, qf=np.array([0.0, 0.2, 0.1]))
    row = summary_row(synthetic_record(small_spec(alpha=0.0), obs, variance=1e-9))
    assert list(row) == SUMMARY_COLUMNS
    assert row["alpha"] == 0.0
    assert row["varE"] == 1e-9
    assert row["sigma_z_abs"] == 0.4
    assert row["sigma_y_abs"] == 0.1
    assert row["S_vN"] == 0.3
    assert row["QF_max"] == 0.2
    assert row["phase"] == "Free"


def test_summary_row_without_observables():
    row = summary_row(synthetic_record(small_spec(), None))
    assert row["E_g"] == -0.05
    assert np.isnan(row["sigma_x"])
    assert row["phase"] == "Unclassified"


def test_sweep_table_sorted():
    records = [
        synthetic_record(small_spec(alpha=alpha), synthetic_observables())
        for alpha in (0.03, 0.01, 0.02)
    ]
    table = sweep_table(records)
    assert list(table.columns) == SUMMARY_COLUMNS
    assert table["alpha"].tolist() == [0.01, 0.02, 0.03]
    assert list(table.index) == [0, 1, 2]


def test_order_parameter():
    sweep = pd.DataFrame({"sigma_z_abs": [0.1, 0.0, 0.5], "sigma_y_abs": [0.0, 0.3, 0.2]})
    assert order_parameter(sweep).tolist() == [0.1, 0.3, 0.5]


def test_check_sweep():
    sweep = pd.DataFrame({"alpha": [0.2, 0.1], "parity": [0.0, 1.0]})
    checked = check_sweep(sweep, ["parity"])
    assert checked["alpha"].tolist() == [0.1, 0.2]
    with pytest.raises(KeyError):
        check_sweep(sweep, ["S_vN"])
    with pytest.raises(KeyError):
        check_sweep(sweep.drop(columns="alpha"), [])
