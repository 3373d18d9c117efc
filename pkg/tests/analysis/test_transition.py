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

from spinboson.analysis.classify import PhaseLabel
from spinboson.analysis.transition import (
    CriticalFit,
    PowerLawFitEstimator,
    TransitionEstimator,
    bisect_transition,
    collapse_offset,
    label_boundaries,
    locate_all,
    locate_transition,
    mirror_discrepancy,
    refine_peak,
)
from spinboson.exception.configuration_error import ConfigurationError
from spinboson.exception.numerics_error import FitWindowError, NoTransitionError

PEAKS = [("variance-peak", "varE"), ("entropy-cusp", "S_vN"), ("qfmax-peak", "QF_max")]


@pytest.fixture(params=PEAKS)
def peak(request):
    return request.param


@pytest.fixture
def parity_sweep():
    return pd.DataFrame(
        {"alpha": [0.05, 0.01, 0.02, 0.03, 0.04], "parity": [0.0, 1.0, 1.0, 0.02, 0.0]}
    )


@pytest.fixture
def ordered_sweep():
    tau = np.logspace(-4, -2, 10)
    alpha = np.concatenate([[0.005, 0.01, 0.015], 0.02 + tau])
    order = np.concatenate([np.zeros(3), 0.8 * tau**0.5])
    return pd.DataFrame({"alpha": alpha, "sigma_z_abs": order, "sigma_y_abs": np.zeros(13)})


def fit(alpha_c, uncertainty):
    return CriticalFit(alpha_c, uncertainty, np.nan, np.nan, "parity-jump", (alpha_c, alpha_c), 0.0)


def test_estimators_registered():
    assert TransitionEstimator.list_available() == [
        "parity-jump",
        "powerlaw-fit",
        "entropy-cusp",
        "qfmax-peak",
        "variance-peak",
    ]


def test_parity_jump(parity_sweep):
    result = locate_transition(parity_sweep)
    assert result.estimator == "parity-jump"
    assert result.alpha_c == pytest.approx(0.025)
    assert result.uncertainty == pytest.approx(0.005)
    assert result.window == (0.02, 0.03)
    assert np.isnan(result.beta)


def test_parity_never_jumps():
    sweep = pd.DataFrame({"alpha": [0.01, 0.02, 0.03], "parity": [1.0, 0.9, 0.8]})
    with pytest.raises(NoTransitionError):
        locate_transition(sweep, "parity-jump")


def test_unknown_estimator(parity_sweep):
    with pytest.raises(ConfigurationError):
        locate_transition(parity_sweep, "susceptibility")


def test_power_law_estimator(ordered_sweep):
    result = locate_transition(ordered_sweep, "powerlaw-fit")
    assert result.alpha_c == pytest.approx(0.02, abs=1e-5)
    assert result.beta == pytest.approx(0.5, abs=0.02)
    assert result.uncertainty > 0.0
    assert result.window[0] == pytest.approx(0.02 + 1e-4)


def test_power_law_estimator_floor(ordered_sweep):
    estimator = TransitionEstimator.from_params({"type": "powerlaw-fit", "floor": 0.1})
    assert isinstance(estimator, PowerLawFitEstimator)
    assert estimator.floor == 0.1
    with pytest.raises(NoTransitionError):
        estimator.locate(ordered_sweep)


def test_peak_estimators(peak):
    name, column = peak
    alpha = np.linspace(0.01, 0.04, 7)
    sweep = pd.DataFrame({"alpha": alpha, column: 1.0 - (alpha - 0.023) ** 2})
    result = locate_transition(sweep, name)
    assert result.alpha_c == pytest.approx(0.023)
    assert result.uncertainty == pytest.approx(0.0025)
    assert result.window == pytest.approx((0.02, 0.03))


def test_peak_at_edge():
    alpha = np.linspace(0.01, 0.04, 7)
    sweep = pd.DataFrame({"alpha": alpha, "varE": alpha})
    with pytest.raises(NoTransitionError):
        locate_transition(sweep, "variance-peak")
    with pytest.raises(FitWindowError):
        refine_peak(alpha, alpha)


def test_locate_all(parity_sweep):
    sweep = parity_sweep.assign(
        sigma_z_abs=0.0, sigma_y_abs=0.0, S_vN=[0.1, 0.2, 0.5, 0.3, 0.2], QF_max=0.0, varE=0.0
    )
    names = [result.estimator for result in locate_all(sweep)]
    assert "parity-jump" in names
    assert "entropy-cusp" in names
    assert "powerlaw-fit" not in names


def test_locate_all_skips_missing_columns(parity_sweep):
    assert [result.estimator for result in locate_all(parity_sweep)] == ["parity-jump"]


def test_bisect_transition():
    calls = []

    def probe(alpha):
        calls.append(alpha)
        return 1.0 if alpha < 0.0312345 else 0.01

    result = bisect_transition(probe, 0.01, 0.05, width=1e-4)
    lo, hi = result.window
    assert lo < 0.0312345 <= hi
    assert hi - lo <= 1e-4
    assert result.alpha_c == pytest.approx(0.0312345, abs=1e-4)
    assert len(calls) == 2 + int(np.ceil(np.log2(0.04 / 1e-4)))


def test_bisect_needs_bracket():
    with pytest.raises(NoTransitionError):
        bisect_transition(lambda alpha: 1.0, 0.01, 0.05)


def test_label_boundaries():
    boundaries = label_boundaries(
        [0.3, 0.1, 0.2, 0.4, 0.5, 0.6],
        ["Localized", "Free", "Free", None, "Unclassified", PhaseLabel.EVEN_DELOCALIZED],
    )
    assert [(b.before, b.after) for b in boundaries] == [
        (PhaseLabel.FREE, PhaseLabel.LOCALIZED),
        (PhaseLabel.LOCALIZED, PhaseLabel.EVEN_DELOCALIZED),
    ]
    assert boundaries[0].position == pytest.approx(0.25)
    assert boundaries[0].uncertainty == pytest.approx(0.05)
    assert boundaries[1].position == pytest.approx(0.45)


def test_collapse_offset():
    tau = np.logspace(-3, -1, 9)
    curves = {"a": (tau, tau**0.5), "b": (tau[2:], 1.1 * tau[2:] ** 0.5)}
    assert collapse_offset(curves) == pytest.approx(np.log(1.1))
    with pytest.raises(FitWindowError):
        collapse_offset({"a": (tau[:3], tau[:3]), "b": (tau[-3:], tau[-3:])})


def test_mirror_discrepancy():
    a, b = fit(0.020, 3e-4), fit(0.021, 4e-4)
    assert mirror_discrepancy(a, b) == pytest.approx(2.0)
    assert a.agrees_with(b)
    assert not a.agrees_with(b, sigmas=1.0)
