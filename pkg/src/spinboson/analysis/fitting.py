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
"""Least-squares fits of critical behavior"""
import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.optimize import curve_fit
from scipy.stats import linregress

from spinboson.exception.numerics_error import FitWindowError, NotApplicableError
from spinboson.model.bath import DiscretizedBath

logger = logging.getLogger(__name__)

MIN_POINTS = 4
MIN_POWER_LAW_DECADES = 0.5
MIN_CFT_DECADES = 1.0
UNCERTAINTY_FLOOR = 1e-12


@dataclass(frozen=True)
class PowerLawFit:
    """``y = prefactor * tau^exponent``

    Attributes:
        exponent (float): fitted exponent
        prefactor (float): fitted prefactor
        residual (float): rms deviation in ``ln y``
        uncertainty (float): larger of the subgroup split and the standard error
        window (Tuple[float, float]): tau range used
        count (int): points used
    """

    exponent: float
    prefactor: float
    residual: float
    uncertainty: float
    window: Tuple[float, float]
    count: int


def _window(
    tau: np.ndarray, y: np.ndarray, window: Optional[Tuple[float, float]]
) -> Tuple[np.ndarray, np.ndarray]:
    tau = np.asarray(tau, dtype=float)
    y = np.asarray(y, dtype=float)
    if tau.shape != y.shape:
        raise FitWindowError("power law", f"{tau.size} abscissae but {y.size} values")
    if window is not None:
        inside = (tau >= window[0]) & (tau <= window[1])
        tau, y = tau[inside], y[inside]
    order = np.argsort(tau)
    return tau[order], y[order]


def loglog_line(tau: np.ndarray, y: np.ndarray) -> Tuple[float, float, float, float]:
    """``(exponent, ln prefactor, rms residual, stderr)`` of a log-log line"""
    x, z = np.log(tau), np.log(y)
    fit = linregress(x, z)
    residual = float(np.sqrt(np.mean((z - fit.intercept - fit.slope * x) ** 2)))
    return float(fit.slope), float(fit.intercept), residual, float(fit.stderr)


def fit_power_law(
    tau: np.ndarray, y: np.ndarray, window: Optional[Tuple[float, float]] = None
) -> PowerLawFit:
    """Straight line through ``(ln tau, ln y)``

    The uncertainty splits the points into two interleaved subgroups and
    takes half the difference of their exponents, or the standard error of
    the full fit if that is larger.

    Raises:
        FitWindowError: fewer than 4 points, non-positive values, or a tau
            range under half a decade
    """
    tau, y = _window(tau, y, window)
    if tau.size < MIN_POINTS:
        raise FitWindowError("power law", f"{tau.size} points, need {MIN_POINTS}")
    if np.any(tau <= 0) or np.any(y <= 0):
        raise FitWindowError("power law", "tau and y must be positive")
    decades = float(np.log10(tau[-1] / tau[0]))
    if decades < MIN_POWER_LAW_DECADES:
        raise FitWindowError(
            "power law", f"window spans {decades:.2f} decades, need {MIN_POWER_LAW_DECADES}"
        )
    exponent, intercept, residual, stderr = loglog_line(tau, y)
    first = loglog_line(tau[::2], y[::2])[0]
    second = loglog_line(tau[1::2], y[1::2])[0]
    uncertainty = max(abs(first - second) / 2.0, stderr, UNCERTAINTY_FLOOR)
    return PowerLawFit(
        exponent=exponent,
        prefactor=float(np.exp(intercept)),
        residual=residual,
        uncertainty=uncertainty,
        window=(float(tau[0]), float(tau[-1])),
        count=int(tau.size),
    )


@dataclass(frozen=True)
class CftFit:
    """``S = b - (A nu c / 6) ln(alpha - alpha_c)`` on the localized side

    Attributes:
        slope (float): d S / d ln(alpha - alpha_c)
        coefficient (float): ``A nu c / 6 = -slope``
        central_charge (float): ``c`` under the assumed ``A`` and ``nu``
        b (float): intercept
        k (float): ``exp(6 b / (A c))``
        uncertainty (float): on the slope
        boundary_points (float): assumed ``A``
        nu (float): assumed correlation-length exponent
        count (int): points used
    """

    slope: float
    coefficient: float
    central_charge: float
    b: float
    k: float
    uncertainty: float
    boundary_points: float
    nu: float
    count: int


def fit_entropy_cft(
    alpha: np.ndarray,
    entropy: np.ndarray,
    alpha_c: float,
    boundary_points: float = 1.0,
    nu: float = 0.5,
) -> CftFit:
    """Linear fit of the entropy against ``ln(alpha - alpha_c)`` for ``alpha > alpha_c``

    Raises:
        FitWindowError: fewer than 3 localized points or less than a decade
            of ``alpha - alpha_c``
    """
    alpha = np.asarray(alpha, dtype=float)
    entropy = np.asarray(entropy, dtype=float)
    side = alpha > alpha_c
    tau, S = alpha[side] - alpha_c, entropy[side]
    if tau.size < 3:
        raise FitWindowError("entropy", f"{tau.size} points above alpha_c, need 3")
    decades = float(np.log10(tau.max() / tau.min()))
    if decades < MIN_CFT_DECADES:
        raise FitWindowError("entropy", f"alpha - alpha_c spans {decades:.2f} decades, need 1")
    fit = linregress(np.log(tau), S)
    coefficient = -float(fit.slope)
    central_charge = 6.0 * coefficient / (boundary_points * nu)
    with np.errstate(divide="ignore", over="ignore"):
        k = float(np.exp(6.0 * fit.intercept / (boundary_points * central_charge)))
    return CftFit(
        slope=float(fit.slope),
        coefficient=coefficient,
        central_charge=central_charge,
        b=float(fit.intercept),
        k=k,
        uncertainty=max(float(fit.stderr), UNCERTAINTY_FLOOR),
        boundary_points=boundary_points,
        nu=nu,
        count=int(tau.size),
    )


def entropy_sharpness(alpha: np.ndarray, entropy: np.ndarray, alpha_c: float) -> float:
    """Steepest ``|dS/dalpha|`` over the grid intervals next to ``alpha_c``

    Raises:
        FitWindowError: ``alpha_c`` outside the sweep
    """
    alpha = np.asarray(alpha, dtype=float)
    order = np.argsort(alpha)
    alpha, entropy = alpha[order], np.asarray(entropy, dtype=float)[order]
    if not alpha[0] <= alpha_c <= alpha[-1] or alpha.size < 2:
        raise FitWindowError("entropy sharpness", f"alpha_c = {alpha_c} outside the sweep")
    slopes = np.abs(np.diff(entropy) / np.diff(alpha))
    i = int(np.clip(np.searchsorted(alpha, alpha_c) - 1, 0, slopes.size - 1))
    return float(np.max(slopes[max(i - 1, 0) : i + 2]))


@dataclass(frozen=True)
class DisplacementFit:
    """``f_bar_k = sign * c_k / (w_k + chi)`` with ``c_k = (lambda_k + gamma_k) / 2``

    Attributes:
        chi (float): fitted frequency shift
        sign (float): branch sign
        residual (float): rms deviation
        relative_residual (float): largest deviation over the largest displacement
    """

    chi: float
    sign: float
    residual: float
    relative_residual: float


def fit_displacement(displacement: np.ndarray, bath: DiscretizedBath) -> DisplacementFit:
    """One-parameter least squares of an averaged displacement curve

    Raises:
        NotApplicableError: the displacements vanish
    """
    y = np.asarray(displacement, dtype=float)
    coupling = bath.diagonal
    largest = int(np.argmax(np.abs(y)))
    scale = abs(y[largest])
    if scale <= 0.0 or not np.any(coupling):
        raise NotApplicableError("fit_displacement", "all displacements vanish")
    sign = float(np.sign(y[largest]) * np.sign(coupling[largest] or 1.0))
    omega = bath.omega

    def model(w: np.ndarray, chi: float) -> np.ndarray:
        return sign * coupling / (w + chi)

    guess = max(abs(coupling[largest]) / scale - omega[largest], 0.0)
    lower = -omega.min() * (1.0 - 1e-9)
    (chi,), _ = curve_fit(model, omega, y, p0=[guess], bounds=([lower], [np.inf]))
    deviation = y - model(omega, chi)
    return DisplacementFit(
        chi=float(chi),
        sign=sign,
        residual=float(np.sqrt(np.mean(deviation**2))),
        relative_residual=float(np.max(np.abs(deviation)) / scale),
    )
