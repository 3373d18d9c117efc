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
"""Run grid points through the solver, one process per point"""
import json
import logging
import os
from multiprocessing import Pool
from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from spinboson.analysis.classify import PhaseTolerances
from spinboson.analysis.sweep import SUMMARY_COLUMNS, sweep_table
from spinboson.cli.manifest import RunManifest
from spinboson.cli.records import RecordEncoder, read_record, record_to_json, validate_record, write_json
from spinboson.exception.configuration_error import ConfigurationError
from spinboson.exception.numerics_error import NonConvergenceError, SpinBosonError
from spinboson.model.bath import discretize_bath, rotate_offdiagonal_to_diagonal
from spinboson.model.spec import ModelSpec
from spinboson.params import Params, unflatten
from spinboson.solver.config import SolverConfig
from spinboson.solver.solve import GroundStateRecord, solve

logger = logging.getLogger(__name__)

JOB_SECTIONS = ("model", "solver")
"""config sections consumed by a single solve"""


class PointResult(NamedTuple):
    """What a worker sends back for one grid point"""

    key: str
    record: Optional[Dict[str, Any]]
    error: Optional[str]
    nonconverged: bool


def point_seed(seed: int, indices: Sequence[int]) -> int:
    """Root seed of a grid point, mixed from the run seed and its indices"""
    state = np.random.SeedSequence([seed, *indices]).generate_state(1, dtype=np.uint64)
    return int(state[0])


def point_config(
    config: Params, overrides: Dict[str, Any], indices: Sequence[int], single_process: bool
) -> Params:
    """Configuration of one grid point

    Args:
        config (Params): run configuration
        overrides (Dict[str, Any]): dotted keys set by the grid axes
        indices (Sequence[int]): position on the grid, mixed into the seed
        single_process (bool): force serial restarts inside the point

    Returns:
        Params: merged configuration with a per-point seed
    """
    params = config.left_merge(unflatten(overrides)) if overrides else config.duplicate()
    solver = params.get("solver") or Params({})
    extra: Dict[str, Any] = {}
    if indices:
        extra["solver.seed"] = point_seed(int(solver.get("seed", 0)), indices)
    if single_process:
        extra["solver.workers"] = 1
    return params.left_merge(unflatten(extra)) if extra else params


def build_job(config: Params, rotate: bool = False) -> Tuple[ModelSpec, SolverConfig]:
    """Model and solver settings of a configuration

    Args:
        config (Params): holds ``model`` and optionally ``solver``
        rotate (bool): solve an off-diagonal model in the diagonal frame

    Raises:
        ConfigurationError: invalid sections
    """
    params = config.duplicate()
    spec = ModelSpec.from_params(params.pop("model"))
    solver = SolverConfig.from_params(params.pop("solver", {}) or Params({}))
    if rotate:
        spec = rotate_offdiagonal_to_diagonal(spec)
    return spec, solver


def run_point(config: Params, rotate: bool = False) -> GroundStateRecord:
    """Solve the single point described by ``config``"""
    spec, solver = build_job(config, rotate)
    return solve(spec, discretize_bath(spec), solver)


def solve_point(job: Tuple[str, Dict[str, Any], bool, str]) -> PointResult:
    """Worker entry point; never raises for a failed solve"""
    key, config, rotate, config_hash = job
    try:
        record = run_point(Params(config), rotate)
    except NonConvergenceError as error:
        logger.warning(f"{key} did not converge: {error}")
        return PointResult(key, None, str(error).strip(), True)
    except (SpinBosonError, ValueError) as error:
        logger.warning(f"{key} failed: {error}")
        return PointResult(key, None, f"{type(error).__name__}: {str(error).strip()}", False)
    return PointResult(key, record_to_json(record, config_hash), None, False)


def _store(manifest: RunManifest, result: PointResult) -> None:
    if result.record is None:
        manifest.mark_failed(result.key, result.error or "unknown", result.nonconverged)
        return
    path = manifest.record_path(result.key)
    write_json(path, validate_record(_plain(result.record), path))
    manifest.mark_done(result.key, os.path.relpath(path, manifest.output_dir))
    logger.info(f"{result.key} done: E_g = {result.record['energy']:.12f}")


def _plain(data: Dict[str, Any]) -> Dict[str, Any]:
    return json.loads(json.dumps(data, cls=RecordEncoder))  # type: ignore[no-any-return]


def run_grid(manifest: RunManifest, workers: int = 1) -> RunManifest:
    """Compute every pending point of ``manifest``, persisting after each one

    Args:
        manifest (RunManifest): run to advance
        workers (int): processes working on grid points; points run their
            restarts serially when more than one

    Raises:
        ConfigurationError: the configuration of some point is invalid
    """
    config, rotate = Params(manifest.config), manifest.rotate
    pending = manifest.pending()
    parallel = workers > 1 and len(pending) > 1
    jobs = []
    for point in pending:
        params = point_config(config, point.overrides, point.indices, parallel)
        build_job(params, rotate)
        jobs.append((point.key, params.as_dict(), rotate, manifest.fingerprint))
    logger.info(f"{len(jobs)} points to compute on {workers if parallel else 1} workers")
    if parallel:
        with Pool(min(workers, len(jobs))) as pool:
            for result in pool.imap_unordered(solve_point, jobs):
                _store(manifest, result)
    else:
        for job in jobs:
            _store(manifest, solve_point(job))
    return manifest


def collect_records(manifest: RunManifest) -> List[Tuple[Dict[str, Any], GroundStateRecord]]:
    """``(overrides, record)`` of every finished point, in grid order"""
    return [
        (point.overrides, read_record(os.path.join(manifest.output_dir, str(point.record))))
        for point in manifest.done()
    ]


def tolerances_from_params(params: Optional[Params]) -> PhaseTolerances:
    """Consume an ``analysis.tolerances`` section

    Raises:
        ConfigurationError: unknown fields
    """
    if not params:
        return PhaseTolerances()
    params = params.duplicate()
    displacement = params.pop("displacement", None)
    tolerances = PhaseTolerances(
        excitation=params.pop_float("excitation", 1e-4),
        displacement=None if displacement is None else float(displacement),
        parity=params.pop_float("parity", 0.05),
        shape=params.pop_float("shape", 0.05),
        require_partner=params.pop_bool("require_partner", True),
    )
    params.assert_empty("analysis.tolerances")
    return tolerances


def summary_from_records(
    records: Sequence[GroundStateRecord], tolerances: Optional[PhaseTolerances] = None
) -> pd.DataFrame:
    """Sweep summary of ``records``; empty with the fixed columns when none"""
    if not records:
        return pd.DataFrame(columns=SUMMARY_COLUMNS)
    return sweep_table(records, tolerances)


def check_grid(grid: List[Dict[str, Any]]) -> None:
    """Reject grids without points

    Raises:
        ConfigurationError: no axes
    """
    if not grid:
        raise ConfigurationError("the grid has no axes", field="grid")


def analysis_tolerances(config: Params) -> PhaseTolerances:
    """Classification thresholds from the ``analysis`` section of ``config``"""
    analysis = config.get("analysis")
    return tolerances_from_params(analysis.get("tolerances") if analysis else None)
