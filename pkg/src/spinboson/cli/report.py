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
"""Turn the records of a finished run into fits and tables"""
import logging
from dataclasses import asdict, is_dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from spinboson.analysis.classify import PhaseLabel, PhaseTolerances, classify_phase
from spinboson.analysis.fitting import (
    entropy_sharpness,
    fit_displacement,
    fit_entropy_cft,
    fit_power_law,
)
from spinboson.analysis.phase_map import GridPoint, PhaseMap, build_phase_map, mirror_table
from spinboson.analysis.sweep import SUMMARY_COLUMNS, order_parameter, summary_row
from spinboson.analysis.transition import CriticalFit, locate_all, locate_transition
from spinboson.exception.numerics_error import (
    FitWindowError,
    NotApplicableError,
    NoTransitionError,
)
from spinboson.model.bath import discretize_bath
from spinboson.solver.solve import GroundStateRecord

logger = logging.getLogger(__name__)

TRANSITION_COLUMNS = [
    "estimator",
    "alpha_c",
    "uncertainty",
    "beta",
    "beta_uncertainty",
    "window_lo",
    "window_hi",
    "residual",
]
DISPLACEMENT_FIT_COLUMNS = ["alpha", "branch", "chi", "sign", "residual", "relative_residual"]
CRITICAL_LINE_COLUMNS = ["delta", "alpha_c", "uncertainty", "sharpness"]
PHASE_SUMMARY_COLUMNS = ["delta"] + SUMMARY_COLUMNS

Report = Dict[str, Any]
Tables = Dict[str, pd.DataFrame]


def _attempt(what: str, fit: Callable[..., Any], *args: Any) -> Optional[Any]:
    try:
        return fit(*args)
    except (FitWindowError, NoTransitionError, NotApplicableError, KeyError) as error:
        logger.info(f"no {what}: {str(error).strip()}")
        return None


def _plain(result: Any) -> Any:
    return asdict(result) if is_dataclass(result) else result


def transitions_table(fits: Sequence[CriticalFit]) -> pd.DataFrame:
    """One row per estimator that located a transition"""
    rows = [
        [f.estimator, f.alpha_c, f.uncertainty, f.beta, f.beta_uncertainty, *f.window, f.residual]
        for f in fits
    ]
    return pd.DataFrame(rows, columns=TRANSITION_COLUMNS)


def reference_fit(fits: Sequence[CriticalFit]) -> Optional[CriticalFit]:
    """The parity-jump estimate when present, else the sharpest one"""
    if not fits:
        return None
    for fit in fits:
        if fit.estimator == "parity-jump":
            return fit
    return min(fits, key=lambda f: f.uncertainty)


def localized_side(summary: pd.DataFrame, alpha_c: float) -> Tuple[np.ndarray, np.ndarray]:
    """``(alpha - alpha_c, order parameter)`` of the rows above ``alpha_c``"""
    alpha = summary["alpha"].to_numpy(dtype=float)
    y = order_parameter(summary)
    keep = (alpha > alpha_c) & (y > 0)
    return alpha[keep] - alpha_c, y[keep]


def displacement_fits(
    records: Sequence[GroundStateRecord], tolerances: Optional[PhaseTolerances] = None
) -> pd.DataFrame:
    """``f_bar`` and ``g_bar`` fits of every localized record"""
    rows = []
    for record in sorted(records, key=lambda r: r.spec.alpha):
        obs = record.observables
        if obs is None:
            continue
        bath = discretize_bath(record.spec)
        if not classify_phase(record, tolerances, bath).is_localized:
            continue
        for branch, curve in (("f", obs.f_bar), ("g", obs.g_bar)):
            fit = _attempt("displacement fit", fit_displacement, curve, bath)
            if fit is not None:
                rows.append([record.spec.alpha, branch, *asdict(fit).values()])
    return pd.DataFrame(rows, columns=DISPLACEMENT_FIT_COLUMNS)


def analyze_sweep(
    summary: pd.DataFrame,
    records: Sequence[GroundStateRecord],
    tolerances: Optional[PhaseTolerances] = None,
) -> Tuple[Report, Tables]:
    """Critical coupling by every estimator, then the exponent, entropy and
    displacement fits measured from the reference estimate

    Args:
        summary (pd.DataFrame): sweep summary
        records (Sequence[GroundStateRecord]): the records behind it
        tolerances (Optional[PhaseTolerances]): classification thresholds

    Returns:
        Tuple[Report, Tables]: json-ready results and csv tables; fits that
        do not apply are ``None``
    """
    fits = locate_all(summary)
    reference = reference_fit(fits)
    report: Report = {
        "points": len(summary),
        "transitions": [asdict(f) for f in fits],
        "reference": _plain(reference),
        "agreement": None,
        "power_law": None,
        "entropy": None,
        "sharpness": None,
    }
    tables: Tables = {
        "transitions": transitions_table(fits),
        "displacement_fits": displacement_fits(records, tolerances),
    }
    if reference is None:
        logger.warning("no estimator located a transition")
        return report, tables
    report["agreement"] = all(reference.agrees_with(f) for f in fits)
    tau, y = localized_side(summary, reference.alpha_c)
    report["power_law"] = _plain(_attempt("order-parameter exponent", fit_power_law, tau, y))
    alpha, entropy = summary["alpha"].to_numpy(), summary["S_vN"].to_numpy()
    report["entropy"] = _plain(
        _attempt("entropy fit", fit_entropy_cft, alpha, entropy, reference.alpha_c)
    )
    report["sharpness"] = _attempt(
        "entropy sharpness", entropy_sharpness, alpha, entropy, reference.alpha_c
    )
    return report, tables


def phase_summary(
    records: Sequence[GroundStateRecord], tolerances: Optional[PhaseTolerances] = None
) -> pd.DataFrame:
    """Summary rows of a grid, sorted by delta then alpha"""
    rows = [{"delta": r.spec.delta, **summary_row(r, tolerances)} for r in records]
    table = pd.DataFrame(rows, columns=PHASE_SUMMARY_COLUMNS)
    return table.sort_values(["delta", "alpha"], kind="mergesort").reset_index(drop=True)


def critical_line(summary: pd.DataFrame, estimator: str = "parity-jump") -> pd.DataFrame:
    """alpha_c and the entropy sharpness of every delta row"""
    rows = []
    for delta, row in summary.groupby("delta", sort=True):
        fit = _attempt(f"transition at delta = {delta}", locate_transition, row, estimator)
        if fit is None:
            continue
        sharpness = _attempt(
            "entropy sharpness", entropy_sharpness, row["alpha"], row["S_vN"], fit.alpha_c
        )
        rows.append([delta, fit.alpha_c, fit.uncertainty, np.nan if sharpness is None else sharpness])
    return pd.DataFrame(rows, columns=CRITICAL_LINE_COLUMNS)


def grid_points(summary: pd.DataFrame, failed: Sequence[Tuple[float, float]] = ()) -> List[GridPoint]:
    """Labelled points of ``summary`` plus unlabelled ``(delta, alpha)`` holes"""
    points: List[GridPoint] = [
        (float(d), float(a), PhaseLabel(p))
        for d, a, p in zip(summary["delta"], summary["alpha"], summary["phase"])
    ]
    points += [(float(d), float(a), None) for d, a in failed]
    return points


def analyze_phase(
    summary: pd.DataFrame,
    failed: Sequence[Tuple[float, float]] = (),
    columns: bool = False,
    mirror: Optional[pd.DataFrame] = None,
) -> Tuple[Report, Tables, PhaseMap]:
    """Phase map, critical line and its power laws

    ``alpha_c(Delta)`` and the entropy sharpness against ``1/Delta`` are fitted
    over the positive tunneling rows.
    With a ``mirror`` phase summary, e.g. the counter-rotating run of a
    rotating-wave grid, every row is compared with the mirror run at
    ``-Delta``; otherwise a grid holding both signs of Delta is compared
    with itself.
    """
    phase_map = build_phase_map(grid_points(summary, failed), columns)
    line = critical_line(summary)
    positive = line[line["delta"] > 0]
    report: Report = {
        "delta_star": phase_map.delta_star,
        "delta_star_uncertainty": phase_map.delta_star_uncertainty,
        "holes": phase_map.holes,
        "critical_exponent": _plain(
            _attempt(
                "critical-line exponent",
                fit_power_law,
                positive["delta"].to_numpy(),
                positive["alpha_c"].to_numpy(),
            )
        ),
        "sharpness_exponent": None,
    }
    sharp = positive.dropna(subset=["sharpness"])
    sharp = sharp[sharp["sharpness"] > 0]
    report["sharpness_exponent"] = _plain(
        _attempt(
            "sharpness exponent",
            fit_power_law,
            1.0 / sharp["delta"].to_numpy(),
            sharp["sharpness"].to_numpy(),
        )
    )
    tables: Tables = {
        "phase_map": phase_map.long_table(),
        "boundaries": phase_map.boundaries,
        "critical_line": line,
    }
    if mirror is not None and not mirror.empty:
        tables["mirror"] = mirror_table(phase_map, build_phase_map(grid_points(mirror), columns))
    elif (summary["delta"] < 0).any() and (summary["delta"] > 0).any():
        table = mirror_table(phase_map, phase_map)
        tables["mirror"] = table[table["delta"] > 0].reset_index(drop=True)
    if "mirror" in tables:
        discrepancy = tables["mirror"]["discrepancy"]
        report["max_mirror_discrepancy"] = float(discrepancy.max()) if len(discrepancy) else None
    return report, tables, phase_map
