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
from scipy.integrate import quad

from spinboson.exception.configuration_error import ConfigurationError
from spinboson.model.bath import (
    BATH_COLUMNS,
    DiscretizedBath,
    bath_table,
    discretize_bath,
    rotate_offdiagonal_to_diagonal,
    spectral_moment,
)
from spinboson.model.spec import Diagonal, FrameRotation

from tests.state_examples import small_spec

GRIDS = [
    {"s": 0.3, "lambda_grid": 1.05, "num_modes": 60},
    {"s": 0.5, "lambda_grid": 2.0, "num_modes": 3},
    {"s": 0.9, "lambda_grid": 1.2, "num_modes": 20, "omega_c": 2.0},
]


@pytest.fixture(params=GRIDS)
def grid_spec(request):
    return small_spec(**request.param)


def test_modes_increase_inside_their_intervals(grid_spec):
    bath = discretize_bath(grid_spec)
    M, L = grid_spec.num_modes, grid_spec.lambda_grid
    edges = grid_spec.omega_c * L ** (np.arange(M + 1) - M)
    assert bath.num_modes == M
    assert np.all(np.diff(bath.omega) > 0)
    assert np.all(bath.omega > edges[:-1])
    assert np.all(bath.omega < edges[1:])


def test_total_coupling_matches_spectral_density(grid_spec):
    bath = discretize_bath(grid_spec)
    assert np.sum(bath.eta**2) == pytest.approx(spectral_moment(grid_spec, 0.0), rel=1e-12)
    assert np.sum(bath.eta**2 * bath.omega) == pytest.approx(
        spectral_moment(grid_spec, 1.0), rel=1e-12
    )


def test_total_coupling_approaches_full_integral():
    spec = small_spec(s=0.3, lambda_grid=1.05, num_modes=430)
    full = spectral_moment(spec, 0.0, lower=0.0)
    assert np.sum(discretize_bath(spec).eta ** 2) == pytest.approx(full, rel=1e-8)


def test_reorganization_energy_against_quadrature():
    spec = small_spec(s=0.3, alpha=0.05, lambda_grid=1.05, num_modes=430)
    bath = discretize_bath(spec)
    discrete = np.sum(bath.eta**2 / (4.0 * bath.omega))

    def integrand(w):
        return 0.25 * 2.0 * spec.alpha * spec.omega_c ** (1.0 - spec.s) * w ** (spec.s - 1.0)

    continuum, _ = quad(integrand, 0.0, spec.omega_c, limit=200)
    assert continuum == pytest.approx(spec.alpha * spec.omega_c / (2.0 * spec.s), rel=1e-6)
    assert discrete == pytest.approx(continuum, rel=1e-2)


def test_log_moment():
    spec = small_spec(s=0.5)
    lower = spec.lambda_grid ** (-spec.num_modes)
    expected = 2.0 * spec.alpha * np.log(1.0 / lower)
    assert spectral_moment(spec, -1.5) == pytest.approx(expected)


def test_case_splits(case):
    bath = discretize_bath(small_spec(coupling_case=case))
    np.testing.assert_allclose(np.abs(bath.lam) + np.abs(bath.gamma), bath.eta)
    np.testing.assert_allclose(bath.diagonal, (bath.lam + bath.gamma) / 2)
    np.testing.assert_allclose(bath.off_diagonal, (bath.gamma - bath.lam) / 2)


def test_diagonal_case_has_no_off_diagonal_coupling():
    bath = discretize_bath(small_spec())
    np.testing.assert_allclose(bath.diagonal, bath.eta / 2)
    np.testing.assert_allclose(bath.off_diagonal, 0.0)


def test_polaron_quantities():
    bath = discretize_bath(small_spec())
    np.testing.assert_allclose(bath.polaron_shift(), -bath.eta / (2 * bath.omega))
    assert bath.reorganization_energy() == pytest.approx(
        np.sum(bath.eta**2 / (4 * bath.omega))
    )


def test_zero_coupling():
    bath = discretize_bath(small_spec(alpha=0.0))
    assert np.all(bath.eta == 0.0)
    assert bath.reorganization_energy() == 0.0


def test_arrays_are_read_only():
    bath = discretize_bath(small_spec())
    with pytest.raises(ValueError):
        bath.omega[0] = 1.0


def test_mismatched_arrays():
    with pytest.raises(ConfigurationError):
        DiscretizedBath(np.ones(2), np.ones(3), np.ones(2), np.ones(2))


def test_subset():
    bath = discretize_bath(small_spec())
    part = bath.subset(np.array([0, 2]))
    assert part.num_modes == 2
    np.testing.assert_array_equal(part.omega, bath.omega[[0, 2]])
    np.testing.assert_array_equal(part.gamma, bath.gamma[[0, 2]])


def test_fingerprint():
    first = discretize_bath(small_spec())
    assert first.fingerprint() == discretize_bath(small_spec()).fingerprint()
    assert first.fingerprint() != discretize_bath(small_spec(alpha=0.06)).fingerprint()


def test_bath_table():
    bath = discretize_bath(small_spec(coupling_case="rw"))
    table = bath_table(bath)
    assert list(table.columns) == BATH_COLUMNS
    assert table["k"].tolist() == [0, 1, 2]
    np.testing.assert_allclose(table["lambda_k"], bath.eta)
    np.testing.assert_allclose(table["gamma_k"], 0.0)


def test_rotation_to_diagonal_frame():
    spec = small_spec(coupling_case="off_diagonal")
    rotated = rotate_offdiagonal_to_diagonal(spec)
    assert rotated.coupling_case == Diagonal()
    assert rotated.frame == FrameRotation()
    np.testing.assert_allclose(discretize_bath(rotated).eta, discretize_bath(spec).eta)


ROTATION_REFUSALS = [
    ({"coupling_case": "diagonal"}, "model.coupling_case"),
    ({"coupling_case": "rw"}, "model.coupling_case"),
    ({"coupling_case": "off_diagonal", "epsilon": 0.1}, "model.epsilon"),
]


@pytest.fixture(params=ROTATION_REFUSALS)
def refusal(request):
    return request.param


def test_rotation_refusals(refusal):
    changes, field = refusal
    with pytest.raises(ConfigurationError) as err:
        rotate_offdiagonal_to_diagonal(small_spec(**changes))
    assert err.value.field == field
