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

from spinboson.analysis.classify import (
    DISPLACEMENT_FLOOR,
    PhaseLabel,
    PhaseTolerances,
    classify_observables,
    classify_phase,
)
from spinboson.exception.numerics_error import NotApplicableError
from spinboson.model.bath import discretize_bath

from tests.state_examples import small_spec, synthetic_observables, synthetic_record

SHIFT = np.array([0.3, 0.2, 0.1])
LABELLED = [
    ({}, PhaseLabel.FREE),
    ({"excitation_number": 0.2, "f_bar": SHIFT, "g_bar": -SHIFT, "parity": 0.99}, PhaseLabel.EVEN_DELOCALIZED),
    (
        {"excitation_number": 0.2, "f_bar": SHIFT, "g_bar": -SHIFT, "parity": -0.99, "B_bar": -np.sqrt(0.5)},
        PhaseLabel.ODD_DELOCALIZED,
    ),
    (
        {"excitation_number": 0.2, "f_bar": SHIFT, "g_bar": -SHIFT, "parity": -0.99, "b_bar_signed": False},
        PhaseLabel.ODD_DELOCALIZED,
    ),
    ({"excitation_number": 0.2, "f_bar": SHIFT, "g_bar": SHIFT, "parity": 0.01}, PhaseLabel.LOCALIZED),
    ({"excitation_number": 0.2, "f_bar": SHIFT, "g_bar": -SHIFT, "parity": 0.5}, PhaseLabel.UNCLASSIFIED),
    (
        {"excitation_number": 0.2, "f_bar": SHIFT, "g_bar": -SHIFT, "parity": 0.99, "B_bar": 0.2},
        PhaseLabel.UNCLASSIFIED,
    ),
]


@pytest.fixture
def small_bath():
    return discretize_bath(small_spec())


@pytest.fixture(params=LABELLED)
def labelled(request):
    return request.param


def test_rules(labelled, small_bath):
    changes, label = labelled
    obs = synthetic_observables(**changes)
    assert classify_observables(obs, small_bath, PhaseTolerances(), True, False) is label


def test_localized_needs_partner(small_bath):
    obs = synthetic_observables(excitation_number=0.2, f_bar=SHIFT, g_bar=SHIFT, parity=0.0)
    strict = PhaseTolerances()
    assert classify_observables(obs, small_bath, strict, False, False) is PhaseLabel.UNCLASSIFIED
    lenient = PhaseTolerances(require_partner=False)
    assert classify_observables(obs, small_bath, lenient, False, False) is PhaseLabel.LOCALIZED


def test_localized_numbering(small_bath):
    obs = synthetic_observables(excitation_number=0.2, f_bar=SHIFT, g_bar=SHIFT, parity=0.0, sigma_x=0.3)
    tolerances = PhaseTolerances()
    assert classify_observables(obs, small_bath, tolerances, True, True) is PhaseLabel.LOCALIZED_II
    obs = obs.replace(sigma_x=-0.3)
    assert classify_observables(obs, small_bath, tolerances, True, True) is PhaseLabel.LOCALIZED_IV


def test_free_threshold_inclusive(small_bath):
    tol_d = PhaseTolerances().displacement_for(small_bath)
    edge = synthetic_observables(f_bar=np.array([tol_d, 0.0, 0.0]))
    assert classify_observables(edge, small_bath, PhaseTolerances(), False, False) is PhaseLabel.FREE
    beyond = synthetic_observables(f_bar=np.array([2.0 * tol_d, 0.0, 0.0]))
    assert classify_observables(beyond, small_bath, PhaseTolerances(), False, False) is not PhaseLabel.FREE


def test_displacement_threshold(small_bath):
    expected = 1e-3 * np.max(small_bath.eta / (2.0 * small_bath.omega))
    assert PhaseTolerances().displacement_for(small_bath) == pytest.approx(expected)
    assert PhaseTolerances(displacement=0.5).displacement_for(small_bath) == 0.5
    uncoupled = discretize_bath(small_spec(alpha=0.0))
    assert PhaseTolerances().displacement_for(uncoupled) == DISPLACEMENT_FLOOR


def test_label_properties():
    assert PhaseLabel.LOCALIZED_IV.is_localized
    assert not PhaseLabel.FREE.is_localized
    assert PhaseLabel.ODD_DELOCALIZED.is_delocalized
    assert not PhaseLabel.LOCALIZED.is_delocalized
    assert PhaseLabel("OddDelocalized") is PhaseLabel.ODD_DELOCALIZED


def test_classify_record_numbers_mixed_cases():
    obs = synthetic_observables(excitation_number=0.2, f_bar=SHIFT, g_bar=SHIFT, parity=0.0, sigma_x=-0.2)
    mixed = synthetic_record(small_spec(coupling_case="rotating_wave"), obs, partner=True)
    assert classify_phase(mixed) is PhaseLabel.LOCALIZED_IV
    diagonal = synthetic_record(small_spec(coupling_case="diagonal"), obs, partner=True)
    assert classify_phase(diagonal) is PhaseLabel.LOCALIZED


def test_classify_record_free():
    spec = small_spec(alpha=0.0)
    assert classify_phase(synthetic_record(spec, synthetic_observables())) is PhaseLabel.FREE


def test_classify_record_without_observables():
    with pytest.raises(NotApplicableError):
        classify_phase(synthetic_record(small_spec(), None))


def test_unclassified_is_logged(caplog):
    caplog.set_level("INFO")
    obs = synthetic_observables(excitation_number=0.2, f_bar=SHIFT, g_bar=SHIFT, parity=0.5)
    assert classify_phase(synthetic_record(small_spec(), obs)) is PhaseLabel.UNCLASSIFIED
    assert "no phase rule fired" in caplog.text
