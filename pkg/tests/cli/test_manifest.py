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
import os

import pytest

from spinboson.cli.manifest import (
    DONE,
    FAILED,
    MANIFEST_FILE,
    PENDING,
    PointStatus,
    RunManifest,
    point_key,
)
from spinboson.exception.configuration_error import ConfigurationError
from spinboson.exception.numerics_error import ManifestMismatchError
from spinboson.params import Params

from tests.state_examples import SMALL_MODEL

GRID = [
    {"type": "values", "keys": "model.delta", "values": [0.1, 0.2]},
    {"type": "values", "keys": "model.alpha", "values": [0.0, 0.01, 0.02]},
]
POINT_KEYS = [((), "p"), ((3,), "p0003"), ((1, 12), "p0001-0012")]


@pytest.fixture
def config():
    return Params({"model": dict(SMALL_MODEL), "solver": {"restarts": 2}})


@pytest.fixture
def run_dir(tmp_path):
    return str(tmp_path / "run")


@pytest.fixture
def manifest(config, run_dir):
    return RunManifest.open("phase", config, GRID, run_dir)


@pytest.fixture(params=POINT_KEYS)
def key_example(request):
    return request.param


def test_point_key(key_example):
    indices, key = key_example
    assert point_key(indices) == key


def test_create(manifest, run_dir):
    assert len(manifest.points) == 6
    assert list(manifest.points)[:2] == ["p0000-0000", "p0000-0001"]
    first = manifest.points["p0001-0002"]
    assert first.overrides == {"model.delta": 0.2, "model.alpha": 0.02}
    assert first.status == PENDING
    assert manifest.run_id == f"phase-{manifest.fingerprint}"
    assert os.path.exists(os.path.join(run_dir, MANIFEST_FILE))
    assert os.path.isdir(manifest.record_dir)


def test_fingerprint_tracks_inputs(config):
    base = RunManifest.compute_fingerprint("phase", config, GRID)
    assert base == RunManifest.compute_fingerprint("phase", config.duplicate(), GRID)
    assert base != RunManifest.compute_fingerprint("sweep", config, GRID)
    assert base != RunManifest.compute_fingerprint("phase", config, GRID[1:])
    changed = config.left_merge({"solver.restarts": 3})
    assert base != RunManifest.compute_fingerprint("phase", changed, GRID)
    assert base != RunManifest.compute_fingerprint("phase", config, GRID, rotate=True)


def test_refuses_existing_without_resume(manifest, config, run_dir):
    with pytest.raises(ConfigurationError) as excinfo:
        RunManifest.open("phase", config, GRID, run_dir)
    assert excinfo.value.field == "output"


def test_nothing_to_resume(config, run_dir):
    with pytest.raises(ConfigurationError) as excinfo:
        RunManifest.open("phase", config, GRID, run_dir, resume=True)
    assert excinfo.value.field == "resume"


def test_resume_mismatch(manifest, config, run_dir):
    with pytest.raises(ManifestMismatchError):
        RunManifest.open("phase", config.left_merge({"model.s": 0.3}), GRID, run_dir, resume=True)


def test_resume_in_another_frame(config, run_dir):
    manifest = RunManifest.open("phase", config, GRID, run_dir, rotate=True)
    assert RunManifest.load(run_dir).rotate
    with pytest.raises(ManifestMismatchError):
        RunManifest.open("phase", config, GRID, run_dir, resume=True)
    resumed = RunManifest.open("phase", config, GRID, run_dir, resume=True, rotate=True)
    assert resumed.fingerprint == manifest.fingerprint


def test_progress_persists(manifest, config, run_dir):
    manifest.mark_done("p0000-0000", "records/p0000-0000.json")
    manifest.mark_failed("p0000-0001", "DegenerateStateError: norm", nonconverged=False)
    manifest.mark_failed("p0000-0002", "none of 2 trajectories converged", nonconverged=True)
    resumed = RunManifest.open("phase", config, GRID, run_dir, resume=True)
    counts = resumed.counts()
    assert (counts[DONE], counts[FAILED], counts[PENDING]) == (1, 2, 3)
    assert resumed.points["p0000-0002"].nonconverged
    assert resumed.points["p0000-0000"].indices == (0, 0)
    assert [p.key for p in resumed.done()] == ["p0000-0000"]
    assert len(resumed.pending()) == 5


def test_retry_clears_failure(manifest):
    manifest.mark_failed("p0000-0001", "boom", nonconverged=True)
    manifest.mark_done("p0000-0001", "records/p0000-0001.json")
    point = manifest.points["p0000-0001"]
    assert (point.status, point.error, point.nonconverged) == (DONE, None, False)


def test_record_path(manifest, run_dir):
    assert manifest.record_path("p0000-0001") == os.path.join(run_dir, "records", "p0000-0001.json")


def test_status_table(manifest):
    manifest.mark_failed("p0001-0000", "boom")
    table = manifest.status_table()
    assert list(table.columns) == ["key", "status", "error", "model.delta", "model.alpha"]
    assert table.set_index("key").at["p0001-0000", "status"] == FAILED


def test_load_without_manifest(tmp_path):
    with pytest.raises(ConfigurationError):
        RunManifest.load(str(tmp_path))


def test_point_status_from_dict():
    status = PointStatus.from_dict({"indices": [1, 2], "overrides": {"model.alpha": 0.1}})
    assert status.indices == (1, 2)
    assert status.key == "p0001-0002"
    assert status.status == PENDING
