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
import pytest

from spinboson.exception.configuration_error import ConfigurationError
from spinboson.params import Params
from spinboson.solver.config import SolverConfig

INVALID = [
    ({"multiplicity": 0}, "solver.multiplicity"),
    ({"restarts": 0}, "solver.restarts"),
    ({"max_sweeps": 0}, "solver.max_sweeps"),
    ({"relaxation_start": 0.01, "relaxation_end": 0.1}, "solver.relaxation_end"),
    ({"relaxation_start": 1.0}, "solver.relaxation_end"),
    ({"annealing_stages": 0}, "solver.annealing_stages"),
    ({"window": 0}, "solver.window"),
    ({"energy_tolerance": 0.0}, "solver.energy_tolerance"),
    ({"seed": -1}, "solver.seed"),
    ({"structured_fraction": 1.5}, "solver.structured_fraction"),
    ({"workers": -2}, "solver.workers"),
]


@pytest.fixture(params=INVALID)
def invalid(request):
    return request.param


def test_invalid_settings(invalid):
    changes, field = invalid
    with pytest.raises(ConfigurationError) as err:
        SolverConfig(**changes)
    assert err.value.field == field


def test_annealing_schedule_is_geometric():
    schedule = SolverConfig(annealing_stages=3).annealing_schedule
    np.testing.assert_allclose(schedule, [0.1, 0.01, 0.001])
    assert SolverConfig(annealing_stages=1).annealing_schedule.tolist() == [0.1]


def test_sweeps_per_stage():
    assert SolverConfig(max_sweeps=1000, annealing_stages=10).sweeps_per_stage == 100
    assert SolverConfig(max_sweeps=100, annealing_stages=10, window=50).sweeps_per_stage == 50


def test_degeneracy_gap():
    assert SolverConfig(energy_tolerance=1e-10).degeneracy_gap == pytest.approx(1e-9)
    assert SolverConfig(degeneracy_tolerance=1e-6).degeneracy_gap == 1e-6


def test_resolved_workers():
    assert SolverConfig(workers=3).resolved_workers == 3
    assert SolverConfig(workers=0).resolved_workers >= 1


def test_from_params_casts_strings():
    config = SolverConfig.from_params(
        Params(
            {"multiplicity": "4", "real_mode": "true", "energy_tolerance": "1e-10"},
            history="solver.",
        )
    )
    assert config.multiplicity == 4
    assert config.real_mode is True
    assert config.energy_tolerance == 1e-10
    assert config.restarts == SolverConfig().restarts


def test_from_params_rejects_unknown_fields():
    with pytest.raises(ConfigurationError) as err:
        SolverConfig.from_params(Params({"tolerance": 1e-3}, history="solver."))
    assert "solver.tolerance" in str(err.value)


def test_from_params_rejects_fractional_counts():
    with pytest.raises(ConfigurationError) as err:
        SolverConfig.from_params(Params({"restarts": 2.5}, history="solver."))
    assert err.value.field == "solver.restarts"


def test_dict_round_trip():
    config = SolverConfig(multiplicity=3, degeneracy_tolerance=1e-8, verbose=True)
    assert SolverConfig.from_params(Params(config.to_dict())) == config
    assert config.replace(seed=5).seed == 5
