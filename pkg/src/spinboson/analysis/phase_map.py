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
"""Phase diagrams in the (Delta, alpha) plane"""
import logging
from dataclasses import dataclass
from typing import Iterable, List, Optional, Tuple, Union

import numpy as np
import pandas as pd

from spinboson.analysis.classify import PhaseLabel
from spinboson.analysis.fitting import UNCERTAINTY_FLOOR
from spinboson.analysis.transition import Boundary, CriticalFit, label_boundaries, mirror_discrepancy

logger = logging.getLogger(__name__)

BOUNDARY_COLUMNS = ["direction", "delta", "alpha", "uncertainty", "before", "after"]
GridPoint = Tuple[float, float, Optional[Union[PhaseLabel, str]]]
"""``(delta, alpha, label)``, with ``None`` for a point that failed"""


@dataclass(frozen=True, eq=False)
class PhaseMap:
    """Labelled grid with its boundaries

    Attributes:
        labels (pd.DataFrame): phase label per (delta row, alpha column),
            ``None`` at holes
        boundaries (pd.DataFrame): ``BOUNDARY_COLUMNS`` rows; ``direction``
            is ``alpha`` for alpha_c(Delta) along rows and ``delta`` for
            Delta_c(alpha) along columns. Each boundary sits midway between
            two neighbouring points whose labels differ, with half their
            spacing as uncertainty; the estimator-refined alpha_c(Delta) is
            the critical line of the phase report
        delta_star (float): largest Delta of the localized/delocalized
            boundary, ``nan`` with fewer than four boundary points
        delta_star_uncertainty (float): subgroup-split uncertainty, ``nan``
            with fewer than eight points
        holes (List[Tuple[float, float]]): (delta, alpha) without a label
    """

    labels: pd.DataFrame
    boundaries: pd.DataFrame
    delta_star: float
    delta_star_uncertainty: float
    holes: List[Tuple[float, float]]

    def row_boundaries(self, delta: float) -> pd.DataFrame:
        """Transitions along the row at ``delta``, ascending in alpha"""
        rows = self.boundaries[
            (self.boundaries["direction"] == "alpha") & np.isclose(self.boundaries["delta"], delta)
        ]
        return rows.sort_values("alpha")

    def critical_couplings(self, delta: float) -> List[float]:
        """alpha_c of every transition along the row at ``delta``"""
        return self.row_boundaries(delta)["alpha"].tolist()

    def long_table(self) -> pd.DataFrame:
        """One ``(delta, alpha, phase)`` row per grid point"""
        frame = self.labels.rename_axis(index="delta", columns="alpha").reset_index()
        return frame.melt(id_vars="delta", var_name="alpha", value_name="phase")


def _boundary_rows(direction: str, fixed: float, boundaries: List[Boundary]) -> List[dict]:
    rows = []
    for boundary in boundaries:
        where = {"alpha": boundary.position, "delta": fixed}
        if direction == "delta":
            where = {"alpha": fixed, "delta": boundary.position}
        rows.append(
            {
                "direction": direction,
                **where,
                "uncertainty": boundary.uncertainty,
                "before": boundary.before.value,
                "after": boundary.after.value,
            }
        )
    return rows


def _crosses_localization(before: str, after: str) -> bool:
    pair = {PhaseLabel(before), PhaseLabel(after)}
    return any(p.is_localized for p in pair) and any(p.is_delocalized for p in pair)


def cubic_maximum(alpha: np.ndarray, delta: np.ndarray) -> float:
    """Largest value of a cubic fit ``Delta(alpha)`` over the alpha range of the points"""
    poly = np.polynomial.Polynomial.fit(alpha, delta, 3)
    lo, hi = float(np.min(alpha)), float(np.max(alpha))
    candidates = [lo, hi]
    for root in poly.deriv().roots():
        if abs(root.imag) < 1e-12 and lo <= root.real <= hi:
            candidates.append(float(root.real))
    return float(max(poly(x) for x in candidates))


def estimate_delta_star(boundaries: pd.DataFrame) -> Tuple[float, float]:
    """Maximum tunneling of the localized/delocalized boundary from a cubic fit"""
    mask = np.array(
        [_crosses_localization(b, a) for b, a in zip(boundaries["before"], boundaries["after"])],
        dtype=bool,
    )
    crossing = boundaries.loc[mask].sort_values("alpha")
    if len(crossing) < 4:
        return np.nan, np.nan
    alpha = crossing["alpha"].to_numpy()
    delta = crossing["delta"].to_numpy()
    estimate = cubic_maximum(alpha, delta)
    uncertainty = np.nan
    if len(crossing) >= 8:
        split = abs(cubic_maximum(alpha[::2], delta[::2]) - cubic_maximum(alpha[1::2], delta[1::2]))
        uncertainty = max(split / 2.0, UNCERTAINTY_FLOOR)
    return estimate, uncertainty


def build_phase_map(points: Iterable[GridPoint], columns: bool = False) -> PhaseMap:
    """Label grid, boundaries along rows (and columns when asked) and Delta*

    Args:
        points (Iterable[GridPoint]): every grid point, failed ones with ``None``
        columns (bool): also trace Delta_c(alpha) along alpha columns

    Raises:
        ValueError: no points
    """
    table = pd.DataFrame(list(points), columns=["delta", "alpha", "phase"])
    if table.empty:
        raise ValueError("phase map needs at least one grid point")
    table["phase"] = [
        None if label is None else PhaseLabel(label).value for label in table["phase"]
    ]
    labels = table.drop_duplicates(["delta", "alpha"]).pivot(
        index="delta", columns="alpha", values="phase"
    ).reindex(index=sorted(table["delta"].unique()), columns=sorted(table["alpha"].unique()))
    labels = labels.astype(object).where(labels.notna(), None)
    holes = [
        (float(d), float(a))
        for d in labels.index
        for a in labels.columns
        if labels.at[d, a] is None
    ]
    if holes:
        logger.warning(f"phase map has {len(holes)} holes")

    rows: List[dict] = []
    for delta in labels.index:
        row = labels.loc[delta]
        rows += _boundary_rows("alpha", float(delta), label_boundaries(list(row.index), list(row)))
    if columns:
        for alpha in labels.columns:
            column = labels[alpha]
            rows += _boundary_rows(
                "delta", float(alpha), label_boundaries(list(column.index), list(column))
            )
    boundaries = pd.DataFrame(rows, columns=BOUNDARY_COLUMNS)
    delta_star, delta_star_uncertainty = estimate_delta_star(boundaries)
    return PhaseMap(labels, boundaries, delta_star, delta_star_uncertainty, holes)


def _as_fit(row: pd.Series) -> CriticalFit:
    alpha = float(row["alpha"])
    return CriticalFit(
        alpha, float(row["uncertainty"]), np.nan, np.nan, "parity-jump", (alpha, alpha), 0.0
    )


def mirror_table(first: PhaseMap, second: PhaseMap) -> pd.DataFrame:
    """First alpha_c of ``first`` at Delta against that of ``second`` at -Delta"""
    rows = []
    for delta in first.labels.index:
        a = first.row_boundaries(delta)
        b = second.row_boundaries(-delta)
        if a.empty or b.empty:
            continue
        fit_a, fit_b = _as_fit(a.iloc[0]), _as_fit(b.iloc[0])
        rows.append(
            {
                "delta": delta,
                "alpha_c": fit_a.alpha_c,
                "alpha_c_mirror": fit_b.alpha_c,
                "discrepancy": mirror_discrepancy(fit_a, fit_b),
            }
        )
    return pd.DataFrame(rows, columns=["delta", "alpha_c", "alpha_c_mirror", "discrepancy"])
