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
import pytest

from spinboson.exception.configuration_error import ConfigurationError
from spinboson.model.spec import CouplingCase
from spinboson.registrable import Registrable


@Registrable.root()
class Schedule(Registrable):
    pass


@Schedule.register("constant")
class Constant(Schedule):
    def __init__(self, factor: float = 0.5) -> None:
        self.factor = factor


@Schedule.register("stepped")
class Stepped(Schedule):
    def __init__(self, start: float, stop: float = 0.1) -> None:
        self.start = start
        self.stop = stop


class Unregistered(Schedule):
    pass


FROM_PARAMS = [
    ("constant", Constant, {"factor": 0.5}),
    ({"type": "constant", "factor": 0.2}, Constant, {"factor": 0.2}),
    ({"type": "stepped", "start": 1.0}, Stepped, {"start": 1.0, "stop": 0.1}),
]

BAD_PARAMS = [
    {"type": "linear"},
    {"type": "stepped"},
    {"type": "constant", "factr": 0.2},
    {"factor": 0.2},
    3,
]


@pytest.fixture(params=FROM_PARAMS)
def from_params(request):
    return request.param


@pytest.fixture(params=BAD_PARAMS)
def bad_params(request):
    return request.param


def test_from_params(from_params):
    config, cls, attributes = from_params
    instance = Schedule.from_params(config)
    assert type(instance) is cls
    for name, value in attributes.items():
        assert getattr(instance, name) == value


def test_bad_params(bad_params):
    with pytest.raises(ConfigurationError):
        Schedule.from_params(bad_params)


def test_list_and_lookup():
    assert Schedule.list_available() == ["constant", "stepped"]
    assert Schedule.by_name("stepped") is Stepped
    assert Stepped.name() == "stepped"
    with pytest.raises(ConfigurationError):
        Unregistered.name()


def test_duplicate_name():
    with pytest.raises(ConfigurationError, match="already in use"):
        Schedule.register("constant")(Unregistered)
    Schedule.register("constant", exist_ok=True)(Constant)
    assert Schedule.by_name("constant") is Constant


def test_families_are_separate():
    assert "constant" not in CouplingCase.list_available()
    assert "diagonal" in CouplingCase.list_available()


def test_outside_any_family():
    with pytest.raises(ConfigurationError):
        Registrable.register("loose")


def test_to_params_round_trip():
    instance = Stepped(0.8, 0.2)
    config = instance.to_params()
    assert config == {"type": "stepped", "start": 0.8, "stop": 0.2}
    rebuilt = Schedule.from_params(config)
    assert (rebuilt.start, rebuilt.stop) == (0.8, 0.2)
