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
"""Estimators of the critical coupling along an alpha sweep"""
import itertools
import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Mapping, NamedTuple, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy.optimize import minimize_scalar

from spinboson.analysis.classify import PhaseLabel
from spinboson.analysis.fitting import MIN_POINTS, UNCERTAINTY_FLOOR, fit_power_law, loglog_line
from spinboson.analysis.sweep import check_sweep, order_parameter
from spinboson.exception.numerics_error import FitWindowError, NoTransitionError
from spinboson.registrable import Registrable

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CriticalFit:
    """Critical coupling located by one estimator

    Attributes:
        alpha_c (float): critical coupling
        uncertainty (float): positive uncertainty of ``alpha_c``
        beta (float): order-parameter exponent, ``nan`` unless fitted
        beta_uncertainty (float): its uncertainty
        estimator (str): registered name of the estimator
        window (Tuple[float, float]): alpha range the estimate rests on
        residual (float): misfit of the estimate, zero for brackets
    """

    alpha_c: float
    uncertainty: float
    beta: float
    beta_uncertainty: float
    estimator: str
    window: Tuple[float, float]
    residual: float

    def agrees_with(self, other: "CriticalFit", sigmas: float = 3.0) -> bool:
        """Whether two estimates lie within ``sigmas`` combined uncertainties"""
        return mirror_discrepancy(self, other) <= sigmas


@Registrable.root()
class TransitionEstimator(Registrable):
    """Locates a transition on a sweep table sorted by alpha"""

    default_name = "parity-jump"
    columns: Tuple[str, ...] = ()

    def locate(self, sweep: pd.DataFrame) -> CriticalFit:  # pragma: no cover
        """Estimate alpha_c

        Raises:
            NotImplementedError: This method must be overriden by a subclass
        """
        raise NotImplementedError


@TransitionEstimator.register("parity-jump")
class ParityJump(TransitionEstimator):
    """Midpoint of the first bracket where ``|<Pi>|`` jumps by more than one half"""

    columns = ("parity",)

    def locate(self, sweep: pd.DataFrame) -> CriticalFit:
        """Bracket of the first parity discontinuity"""
        sweep = check_sweep(sweep, self.columns)
        alpha = sweep["alpha"].to_numpy()
        jumps = np.flatnonzero(np.abs(np.diff(np.abs(sweep["parity"].to_numpy()))) > 0.5)
        if jumps.size == 0:
            raise NoTransitionError(self.name(), "parity never jumps")
        lo, hi = alpha[jumps[0]], alpha[jumps[0] + 1]
        return CriticalFit(
            alpha_c=0.5 * (lo + hi),
            uncertainty=max(0.5 * (hi - lo), UNCERTAINTY_FLOOR),
            beta=np.nan,
            beta_uncertainty=np.nan,
            estimator=self.name(),
            window=(float(lo), float(hi)),
            residual=0.0,
        )


@TransitionEstimator.register("powerlaw-fit")
class PowerLawFitEstimator(TransitionEstimator):
    """alpha_c minimizing the log-log misfit of the order parameter above it

    Args:
        floor (float): order parameters at or below this count as zero
    """

    columns = ("sigma_z_abs", "sigma_y_abs")

    def __init__(self, floor: float = 1e-3) -> None:
        self.floor = floor

    def _best(self, alpha: np.ndarray, y: np.ndarray, lo: float, hi: float) -> Tuple[float, float]:
        def misfit(alpha_c: float) -> float:
            return loglog_line(alpha - alpha_c, y)[2]

        result = minimize_scalar(misfit, bounds=(lo, hi), method="bounded", options={"xatol": 1e-10})
        return float(result.x), float(result.fun)

    def locate(self, sweep: pd.DataFrame) -> CriticalFit:
        """Scan alpha_c between the last disordered and first ordered point"""
        sweep = check_sweep(sweep, self.columns)
        alpha = sweep["alpha"].to_numpy()
        y = order_parameter(sweep)
        ordered = np.flatnonzero(y > self.floor)
        if ordered.size < MIN_POINTS:
            raise NoTransitionError(self.name(), f"{ordered.size} ordered points, need {MIN_POINTS}")
        first = ordered[0]
        if first > 0:
            lo = float(alpha[first - 1])
        else:
            lo = float(alpha[first] - (alpha[first + 1] - alpha[first]))
        hi = float(alpha[first]) - 1e-9 * max(abs(float(alpha[first])), 1.0)
        a, v = alpha[ordered], y[ordered]
        alpha_c, _ = self._best(a, v, lo, hi)
        try:
            fit = fit_power_law(a - alpha_c, v)
        except FitWindowError as error:
            raise NoTransitionError(self.name(), str(error)) from error
        uncertainty = 0.5 * (hi - lo)
        if a.size >= 2 * (MIN_POINTS - 1):
            even = self._best(a[::2], v[::2], lo, hi)[0]
            odd = self._best(a[1::2], v[1::2], lo, hi)[0]
            uncertainty = abs(even - odd) / 2.0
        return CriticalFit(
            alpha_c=alpha_c,
            uncertainty=max(uncertainty, UNCERTAINTY_FLOOR),
            beta=fit.exponent,
            beta_uncertainty=fit.uncertainty,
            estimator=self.name(),
            window=(float(a[0]), float(a[-1])),
            residual=fit.residual,
        )


def refine_peak(alpha: np.ndarray, values: np.ndarray) -> Tuple[float, float]:
    """Vertex of the parabola through the discrete maximum and its neighbours

    Returns:
        Tuple[float, float]: refined location and half the local grid spacing
            (or the shift from the discrete peak, if larger)

    Raises:
        FitWindowError: the maximum sits at an end of the sweep
    """
    i = int(np.nanargmax(values))
    if i == 0 or i == values.size - 1:
        raise FitWindowError("peak", f"maximum at the sweep edge alpha = {alpha[i]}")
    x, y = alpha[i - 1 : i + 2], values[i - 1 : i + 2]
    a, b, _ = np.polyfit(x - alpha[i], y, 2)
    vertex = alpha[i] if a >= 0 else alpha[i] - b / (2.0 * a)
    vertex = float(np.clip(vertex, x[0], x[-1]))
    spacing = 0.5 * max(x[1] - x[0], x[2] - x[1])
    return vertex, max(spacing, abs(vertex - alpha[i]), UNCERTAINTY_FLOOR)


class PeakEstimator(TransitionEstimator):
    """Parabolic refinement of the discrete maximum of one column"""

    column: str = ""

    def locate(self, sweep: pd.DataFrame) -> CriticalFit:
        """Refined peak of :attr:`column`"""
        sweep = check_sweep(sweep, (self.column,))
        alpha = sweep["alpha"].to_numpy()
        values = sweep[self.column].to_numpy(dtype=float)
        if values.size < 3 or not np.any(np.isfinite(values)):
            raise NoTransitionError(self.name(), "need three finite points")
        try:
            alpha_c, uncertainty = refine_peak(alpha, values)
        except FitWindowError as error:
            raise NoTransitionError(self.name(), str(error)) from error
        i = int(np.nanargmax(values))
        return CriticalFit(
            alpha_c=alpha_c,
            uncertainty=uncertainty,
            beta=np.nan,
            beta_uncertainty=np.nan,
            estimator=self.name(),
            window=(float(alpha[i - 1]), float(alpha[i + 1])),
            residual=0.0,
        )


@TransitionEstimator.register("entropy-cusp")
class EntropyCusp(PeakEstimator):
    """Cusp of the von Neumann entropy"""

    column = "S_vN"


@TransitionEstimator.register("qfmax-peak")
class QfMaxPeak(PeakEstimator):
    """Peak of the largest per-mode quantum fluctuation"""

    column = "QF_max"


@TransitionEstimator.register("variance-peak")
class VariancePeak(PeakEstimator):
    """Peak of the energy variance"""

    column = "varE"


def locate_transition(
    sweep: pd.DataFrame, estimator: Union[str, Dict[str, object], TransitionEstimator] = "parity-jump"
) -> CriticalFit:
    """alpha_c of ``sweep`` by the named estimator

    Raises:
        ConfigurationError: unknown estimator
        NoTransitionError: the estimator finds nothing
    """
    if not isinstance(estimator, TransitionEstimator):
        estimator = TransitionEstimator.from_params(estimator)
    fit = estimator.locate(sweep)
    logger.info(f"{fit.estimator}: alpha_c = {fit.alpha_c:.6f} +- {fit.uncertainty:.1e}")
    return fit


def locate_all(sweep: pd.DataFrame) -> List[CriticalFit]:
    """Every estimator that fires on ``sweep``"""
    fits = []
    for name in TransitionEstimator.list_available():
        try:
            fits.append(locate_transition(sweep, name))
        except (NoTransitionError, KeyError) as error:
            logger.info(f"{name} found no transition: {error}")
    return fits


def bisect_transition(
    probe: Callable[[float], float],
    lo: float,
    hi: float,
    width: float = 1e-4,
    tolerance: float = 0.05,
) -> CriticalFit:
    """Shrink a parity-jump bracket by repeated solves

    Args:
        probe (Callable[[float], float]): ``<Pi>`` of the ground state at alpha
        lo (float): alpha with definite parity
        hi (float): alpha with broken parity
        width (float): bracket width at which to stop
        tolerance (float): ``|<Pi>|`` above ``1 - tolerance`` is definite

    Raises:
        NoTransitionError: both ends are on the same side
    """

    def symmetric(alpha: float) -> bool:
        return abs(probe(alpha)) > 1.0 - tolerance

    low_side, high_side = symmetric(lo), symmetric(hi)
    if low_side == high_side:
        raise NoTransitionError("parity-jump", f"parity is the same at {lo} and {hi}")
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        if symmetric(mid) == low_side:
            lo = mid
        else:
            hi = mid
        logger.debug(f"parity bracket [{lo:.6f}, {hi:.6f}]")
    return CriticalFit(
        alpha_c=0.5 * (lo + hi),
        uncertainty=max(0.5 * (hi - lo), UNCERTAINTY_FLOOR),
        beta=np.nan,
        beta_uncertainty=np.nan,
        estimator="parity-jump",
        window=(lo, hi),
        residual=0.0,
    )


class Boundary(NamedTuple):
    """A change of phase label between neighbouring grid points"""

    position: float
    uncertainty: float
    before: PhaseLabel
    after: PhaseLabel


def label_boundaries(
    positions: Sequence[float], labels: Sequence[Union[PhaseLabel, str, None]]
) -> List[Boundary]:
    """Every label change along a row; unclassified points and holes are skipped"""
    known = [
        (float(x), PhaseLabel(label))
        for x, label in zip(positions, labels)
        if label is not None and PhaseLabel(label) is not PhaseLabel.UNCLASSIFIED
    ]
    known.sort(key=lambda item: item[0])
    boundaries = []
    for (x0, a), (x1, b) in zip(known, known[1:]):
        if a is not b:
            boundaries.append(Boundary(0.5 * (x0 + x1), 0.5 * (x1 - x0), a, b))
    return boundaries


def collapse_offset(curves: Mapping[str, Tuple[np.ndarray, np.ndarray]]) -> float:
    """Largest vertical log-log distance between any two ``(tau, y)`` curves
    over their shared tau range

    Raises:
        FitWindowError: two curves share no tau range
    """
    logged = {}
    for name, (tau, y) in curves.items():
        order = np.argsort(tau)
        logged[name] = (np.log(np.asarray(tau)[order]), np.log(np.asarray(y)[order]))
    worst = 0.0
    for (a, (xa, ya)), (b, (xb, yb)) in itertools.combinations(logged.items(), 2):
        lo, hi = max(xa[0], xb[0]), min(xa[-1], xb[-1])
        if lo > hi:
            raise FitWindowError("collapse", f"curves {a} and {b} do not overlap")
        grid = np.concatenate([xa[(xa >= lo) & (xa <= hi)], xb[(xb >= lo) & (xb <= hi)]])
        worst = max(worst, float(np.max(np.abs(np.interp(grid, xa, ya) - np.interp(grid, xb, yb)))))
    return worst


def mirror_discrepancy(a: CriticalFit, b: CriticalFit) -> float:
    """``|alpha_c(a) - alpha_c(b)|`` in units of the combined uncertainty"""
    return abs(a.alpha_c - b.alpha_c) / float(np.hypot(a.uncertainty, b.uncertainty))
