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
"""RunManifest: what a grid run was asked to do and how far it got.

The manifest is the only file written by more than one step of a run; the
parent process is its single writer.
"""
import json
import logging
import os
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import pandas as pd

import spinboson
from spinboson.cli.records import write_json
from spinboson.exception.configuration_error import ConfigurationError
from spinboson.exception.numerics_error import ManifestMismatchError
from spinboson.params import Params
from spinboson.search.grid import GridSearch

logger = logging.getLogger(__name__)

MANIFEST_FILE = "manifest.json"
RECORD_DIR = "records"
PENDING = "pending"
DONE = "done"
FAILED = "failed"
STATUSES = (PENDING, DONE, FAILED)


def point_key(indices: Sequence[int]) -> str:
    """Name of a grid point, ``p`` followed by its zero-padded indices"""
    return "p" + "-".join(f"{i:04d}" for i in indices) if indices else "p"


@dataclass
class PointStatus:
    """Progress of one grid point

    Attributes:
        indices (Tuple[int, ...]): position along every axis
        overrides (Dict[str, Any]): dotted config keys set at this point
        status (str): ``pending``, ``done`` or ``failed``
        record (Optional[str]): record file relative to the run directory
        error (Optional[str]): why the point failed
        nonconverged (bool): the failure was a search that never converged
    """

    indices: Tuple[int, ...]
    overrides: Dict[str, Any]
    status: str = PENDING
    record: Optional[str] = None
    error: Optional[str] = None
    nonconverged: bool = False

    @property
    def key(self) -> str:
        """See :func:`point_key`"""
        return point_key(self.indices)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "PointStatus":
        """Inverse of ``dataclasses.asdict``"""
        data = dict(data)
        data["indices"] = tuple(data["indices"])
        return cls(**data)


@dataclass
class RunManifest:
    """Definition and per-point progress of a run

    Attributes:
        run_id (str): ``<command>-<fingerprint>``
        command (str): subcommand that created the run
        config (Dict[str, Any]): merged configuration
        grid (List[Dict[str, Any]]): axis configurations, outermost first
        output_dir (str): run directory
        fingerprint (str): adler32 of command, configuration, grid, frame and
            package version
        rotate (bool): points are solved in the rotated diagonal frame
        points (Dict[str, PointStatus]): every grid point by key, in grid order
    """

    run_id: str
    command: str
    config: Dict[str, Any]
    grid: List[Dict[str, Any]]
    output_dir: str
    fingerprint: str
    points: Dict[str, PointStatus] = field(default_factory=dict)
    rotate: bool = False

    @staticmethod
    def compute_fingerprint(
        command: str, config: Params, grid: List[Dict[str, Any]], rotate: bool = False
    ) -> str:
        """Hash of everything that decides the content of a run"""
        return Params(
            {
                "command": command,
                "config": config.as_sorted_dict(),
                "grid": grid,
                "rotate": rotate,
                "version": spinboson.__version__,
            }
        ).get_hash()

    @classmethod
    def create(
        cls,
        command: str,
        config: Params,
        grid: List[Dict[str, Any]],
        output_dir: str,
        rotate: bool = False,
    ) -> "RunManifest":
        """Fresh manifest with every point pending"""
        fingerprint = cls.compute_fingerprint(command, config, grid, rotate)
        points = {}
        for indices, overrides in GridSearch.from_params(grid):
            status = PointStatus(indices, overrides)
            points[status.key] = status
        return cls(
            run_id=f"{command}-{fingerprint}",
            command=command,
            config=config.as_sorted_dict(),
            grid=grid,
            output_dir=output_dir,
            fingerprint=fingerprint,
            points=points,
            rotate=rotate,
        )

    @property
    def path(self) -> str:
        """Location of the manifest file"""
        return os.path.join(self.output_dir, MANIFEST_FILE)

    @property
    def record_dir(self) -> str:
        """Directory holding one record file per finished point"""
        return os.path.join(self.output_dir, RECORD_DIR)

    def record_path(self, key: str) -> str:
        """Absolute path of the record of point ``key``"""
        return os.path.join(self.record_dir, f"{key}.json")

    def save(self) -> None:
        """Write the manifest in place"""
        os.makedirs(self.record_dir, exist_ok=True)
        data = asdict(self)
        data["points"] = [asdict(p) for p in self.points.values()]
        write_json(self.path, data)

    @classmethod
    def load(cls, output_dir: str) -> "RunManifest":
        """Read the manifest of ``output_dir``

        Raises:
            ConfigurationError: no readable manifest
        """
        path = os.path.join(output_dir, MANIFEST_FILE)
        try:
            with open(path) as handle:
                data = json.load(handle)
        except (OSError, ValueError) as err:
            raise ConfigurationError(f"cannot read {path}: {err}", field="resume") from err
        points = [PointStatus.from_dict(p) for p in data.pop("points")]
        data["output_dir"] = output_dir
        return cls(**data, points={p.key: p for p in points})

    @classmethod
    def open(
        cls,
        command: str,
        config: Params,
        grid: List[Dict[str, Any]],
        output_dir: str,
        resume: bool = False,
        rotate: bool = False,
    ) -> "RunManifest":
        """Start a run in ``output_dir`` or pick one up again

        Raises:
            ConfigurationError: the directory already holds a run and
                ``resume`` is off, or ``resume`` is on and it holds none
            ManifestMismatchError: the existing run was made from another
                configuration or code version
        """
        exists = os.path.exists(os.path.join(output_dir, MANIFEST_FILE))
        if exists and not resume:
            raise ConfigurationError(
                f"{output_dir} already holds a run, pass --resume or choose another directory",
                field="output",
            )
        if resume and not exists:
            raise ConfigurationError(f"nothing to resume in {output_dir}", field="resume")
        if not exists:
            manifest = cls.create(command, config, grid, output_dir, rotate)
            manifest.save()
            logger.info(f"run {manifest.run_id}: {len(manifest.points)} points")
            return manifest
        manifest = cls.load(output_dir)
        expected = cls.compute_fingerprint(command, config, grid, rotate)
        if manifest.fingerprint != expected:
            raise ManifestMismatchError(output_dir, manifest.fingerprint, expected)
        counts = manifest.counts()
        logger.info(
            f"resuming {manifest.run_id}: {counts[DONE]} done, "
            f"{counts[FAILED]} failed, {counts[PENDING]} pending"
        )
        return manifest

    def pending(self) -> List[PointStatus]:
        """Points still to compute; failed points are retried"""
        return [p for p in self.points.values() if p.status != DONE]

    def done(self) -> List[PointStatus]:
        """Points with a record, in grid order"""
        return [p for p in self.points.values() if p.status == DONE]

    def mark_done(self, key: str, record: str) -> None:
        """Record the finished point ``key`` and persist"""
        point = self.points[key]
        point.status, point.record, point.error, point.nonconverged = DONE, record, None, False
        self.save()

    def mark_failed(self, key: str, error: str, nonconverged: bool = False) -> None:
        """Record the failure of point ``key`` and persist"""
        point = self.points[key]
        point.status, point.record, point.error, point.nonconverged = FAILED, None, error, nonconverged
        self.save()

    def counts(self) -> Counter:  # type: ignore[type-arg]
        """Number of points in every status"""
        counts: Counter = Counter({status: 0 for status in STATUSES})  # type: ignore[type-arg]
        counts.update(p.status for p in self.points.values())
        return counts

    def status_table(self) -> pd.DataFrame:
        """One row per point: key, status, error and its overrides"""
        rows = [
            {"key": p.key, "status": p.status, "error": p.error, **p.overrides}
            for p in self.points.values()
        ]
        return pd.DataFrame(rows)
