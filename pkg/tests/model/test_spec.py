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
from spinboson.model.spec import (
    CASE_ALIASES,
    CouplingCase,
    Diagonal,
    General,
    ModelSpec,
    coupling_case,
)
from spinboson.params import Params

from tests.state_examples import SMALL_MODEL, small_spec

WEIGHTS = [
    ("diagonal", (0.5, 0.5)),
    ("off_diagonal", (0.5, -0.5)),
    ("rotating_wave", (1.0, 0.0)),
    ("counter_rotating_wave", (0.0, 1.0)),
    ("rw", (1.0, 0.0)),
    ("crw", (0.0, 1.0)),
    ("offdiagonal", (0.5, -0.5)),
    ({"type": "general", "weight_lambda": 0.25, "weight_gamma": 0.75}, (0.25, 0.75)),
]

INVALID = [
    ({"s": 1.0}, "model.s"),
    ({"s": 0.0}, "model.s"),
    ({"alpha": -0.1}, "model.alpha"),
    ({"omega_c": 0.0}, "model.omega_c"),
    ({"lambda_grid": 1.0}, "model.lambda_grid"),
    ({"num_modes": 0}, "model.num_modes"),
    ({"delta": float("nan")}, "model.delta"),
]


@pytest.fixture(params=WEIGHTS)
def weights(request):
    return request.param


@pytest.fixture(params=INVALID)
def invalid(request):
    return request.param


def test_coupling_case_weights(weights):
    config, expected = weights
    assert coupling_case(config).weights == expected


def test_weights_split_total_coupling(weights):
    config, _ = weights
    case = coupling_case(config)
    eta = np.array([0.2, 0.4])
    lam, gamma = case.couplings(eta)
    np.testing.assert_allclose(np.abs(lam) + np.abs(gamma), eta)


def test_case_flags():
    assert coupling_case("diagonal").is_diagonal
    assert coupling_case("off_diagonal").is_off_diagonal
    assert coupling_case("rw").conserves_excitations
    assert not coupling_case("crw").conserves_excitations
    assert not coupling_case("crw").is_diagonal


def test_aliases_are_registered():
    for target in CASE_ALIASES.values():
        assert target in CouplingCase.list_available()


def test_general_rejects_unnormalized_weights():
    with pytest.raises(ConfigurationError) as err:
        General(0.5, 0.6)
    assert err.value.field == "model.coupling_case"


def test_unknown_case():
    with pytest.raises(ConfigurationError):
        coupling_case("sideways")


def test_cases_compare_by_weights():
    assert Diagonal() == General(0.5, 0.5)
    assert coupling_case("rw") != coupling_case("crw")


def test_invalid_spec(invalid):
    changes, field = invalid
    with pytest.raises(ConfigurationError) as err:
        small_spec(**changes)
    assert err.value.field == field


def test_from_params_defaults():
    spec = ModelSpec.from_params(Params({"s": 0.3, "alpha": 0.1, "delta": 0.1}))
    assert spec.num_modes == 430
    assert spec.lambda_grid == 1.05
    assert spec.omega_c == 1.0
    assert spec.epsilon == 0.0
    assert spec.coupling_case == Diagonal()
    assert spec.frame is None


def test_from_params_rejects_unknown_fields():
    params = Params({**SMALL_MODEL, "temperature": 0.0}, history="model.")
    with pytest.raises(ConfigurationError) as err:
        ModelSpec.from_params(params)
    assert "model.temperature" in str(err.value)


def test_from_params_requires_alpha():
    with pytest.raises(ConfigurationError) as err:
        ModelSpec.from_params(Params({"s": 0.3, "delta": 0.1}, history="model."))
    assert err.value.field == "model.alpha"


def test_from_params_case_mapping():
    config = {**SMALL_MODEL, "coupling_case": {"type": "rw"}}
    spec = ModelSpec.from_params(Params(config))
    assert spec.coupling_case.weights == (1.0, 0.0)


def test_dict_round_trip_keeps_fingerprint(case):
    spec = small_spec(coupling_case=case, epsilon=0.01)
    again = ModelSpec.from_dict(spec.to_dict())
    assert again == spec
    assert again.fingerprint() == spec.fingerprint()


def test_fingerprint_changes_with_alpha():
    assert small_spec().fingerprint() != small_spec(alpha=0.051).fingerprint()


def test_replace_validates():
    with pytest.raises(ConfigurationError):
        small_spec().replace(alpha=-1.0)
