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
from spinboson.exception.configuration_error import ConfigurationError


def test___str__():
    msg = "must be positive, got -0.1"
    ce = ConfigurationError(msg)
    assert str(ce) == msg
    assert ce.field is None


def test___str___with_field():
    ce = ConfigurationError("must be positive, got -0.1", field="model.alpha")
    assert str(ce) == "model.alpha: must be positive, got -0.1"
    assert ce.field == "model.alpha"
