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
"""Desk-scale physics checks; run with ``pytest -m slow``"""
import numpy as np
import pytest

from spinboson.model.bath import discretize_bath, rotate_offdiagonal_to_diagonal
from spinboson.model.spec import ModelSpec
from spinboson.oracle.diagonalize import ed_ground_state
from spinboson.oracle.fock import FockConfig
from spinboson.solver.config import SolverConfig
from spinboson.solver.solve import solve

pytestmark = pytest.mark.slow

SMALL_CASES = ["diagonal", "rotating_wave"]
SMALL_ALPHAS = [0.005, 0.01, 0.02, 0.04, 0.08]
ROTATION_ALPHAS = [0.005, 0.02, 0.06]


@pytest.fixture(params=SMALL_CASES)
def case(request):
    return request.param


@pytest.fixture(params=SMALL_ALPHAS)
def alpha(request):
    return request.param


@pytest.fixture(params=ROTATION_ALPHAS)
def rotation_alpha(request):
    return request.param


def test_variational_energy_meets_exact_diagonalization(case, alpha):
    spec = ModelSpec(coupling_case=case, s=0.3, alpha=alpha, delta=0.05, lambda_grid=2.0, num_modes=2)
    bath = discretize_bath(spec)
    exact = ed_ground_state(spec, bath, FockConfig(num_modes=2, cutoff=20))
    record = solve(spec, bath, SolverConfig(multiplicity=6, restarts=32, workers=0))
    assert record.energy >= exact.energy - 1e-12
    assert (record.energy - exact.energy) / abs(exact.energy) < 1e-4


def test_free_phase_is_exact():
    spec = ModelSpec(
        coupling_case="rotating_wave", s=0.3, alpha=0.01, delta=0.1, lambda_grid=1.05, num_modes=430
    )
    record = solve(spec, discretize_bath(spec), SolverConfig(multiplicity=4, restarts=16, workers=0))
    obs = record.observables
    assert record.energy == pytest.approx(-0.05, abs=1e-8)
    assert obs.excitation_number < 1e-6
    assert np.max(np.abs(obs.f_bar)) < 1e-4
    assert np.max(np.abs(obs.g_bar)) < 1e-4


def test_rotation_keeps_the_energy(rotation_alpha):
    spec = ModelSpec(
        coupling_case="off_diagonal", s=0.3, alpha=rotation_alpha, delta=0.05, lambda_grid=1.5, num_modes=40
    )
    rotated = rotate_offdiagonal_to_diagonal(spec)
    config = SolverConfig(multiplicity=4, restarts=32, workers=0)
    direct = solve(spec, discretize_bath(spec), config)
    diagonal = solve(rotated, discretize_bath(rotated), config)
    assert direct.energy == pytest.approx(diagonal.energy, rel=1e-6)
    if rotation_alpha == ROTATION_ALPHAS[-1]:
        assert np.max(np.abs(direct.observables.x_mean)) < 1e-4
        assert np.max(np.abs(direct.observables.p_mean)) > 1e-2


def test_energy_never_rises_with_multiplicity():
    spec = ModelSpec(s=0.3, alpha=0.03, delta=0.05, lambda_grid=1.5, num_modes=20)
    bath = discretize_bath(spec)
    energies = [
        solve(spec, bath, SolverConfig(multiplicity=n, restarts=16, workers=0), measure=False).energy
        for n in (1, 2, 4)
    ]
    assert np.all(np.diff(energies) <= 1e-10)
