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

from spinboson.model.bath import discretize_bath

from tests.state_examples import CASES, small_spec


@pytest.fixture(params=CASES)
def case(request):
    return request.param


@pytest.fixture
def spec(case):
    return small_spec(coupling_case=case, epsilon=0.02)


@pytest.fixture
def bath(spec):
    return discretize_bath(spec)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
