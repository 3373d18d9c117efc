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
import json
import os

import pandas as pd
import pytest

from spinboson.cli import main as cli_main
from spinboson.cli import runner
from spinboson.cli.manifest import RunManifest
from spinboson.cli.main import EXIT_CONFIG, EXIT_NONCONVERGENCE, EXIT_OK, EXIT_PARTIAL, build_parser, main
from spinboson.exception.numerics_error import DegenerateStateError, NonConvergenceError
from spinboson.solver import benchmark

from tests.state_examples import (
    FAST_SOLVER,
    multiplicity_dependent_solve,
    synthetic_observables,
    synthetic_record,
)

MODEL_ARGS = ["--s", "0.5", "--delta", "0.1", "--num-modes", "3", "--lambda-grid", "2.0"]
FAST_ARGS = [arg for key, value in FAST_SOLVER.items() for arg in ("--set", f"solver.{key}={value}")]
COMMON = MODEL_ARGS + FAST_ARGS + ["--workers", "1", "-q"]
OFF_DIAGONAL = ["--case", "offdiagonal", "--epsilon", "0"]
BAD_SOLVES = [
    ["--alpha", "-1"],
    ["--alpha", "0", "--set", "model.alpah=0.1"],
    ["--alpha", "0", "--set", "plots.dpi=300"],
    ["--alpha", "0", "--set", "solver.restarts"],
    ["--alpha", "0", "--config", "missing.yaml"],
    ["--alpha", "0", "--rotate"],
]


@pytest.fixture
def out(tmp_path):
    return str(tmp_path / "run")


@pytest.fixture(params=BAD_SOLVES)
def bad_solve(request):
    return request.param


def fail_every_point(config, rotate=False):
    raise DegenerateStateError(0.0, 1e-14)


def sweep(out, *extra):
    return main(["sweep", "--alphas", "0.0", "--output", out, *COMMON, *extra])


def read(directory, name):
    return pd.read_csv(os.path.join(directory, name))


def test_parser_requires_command():
    with pytest.raises(SystemExit):
        build_parser().parse_args([])


def test_solve(out):
    assert main(["solve", "--alpha", "0", "--output", out, *COMMON]) == EXIT_OK
    with open(os.path.join(out, "record.json")) as handle:
        record = json.load(handle)
    assert record["energy"] == pytest.approx(-0.05, abs=1e-10)
    assert record["spec"]["alpha"] == 0.0
    for name in ("config.json", "qf_curve.csv", "displacements.csv", "bath.csv"):
        assert os.path.exists(os.path.join(out, name))
    assert len(read(out, "bath.csv")) == 3


def test_solve_resume(out):
    assert main(["solve", "--alpha", "0", "--output", out, *COMMON]) == EXIT_OK
    assert main(["solve", "--alpha", "0", "--output", out, *COMMON]) == EXIT_CONFIG
    assert main(["solve", "--alpha", "0", "--output", out, "--resume", *COMMON]) == EXIT_OK
    assert main(["solve", "--alpha", "0.01", "--output", out, "--resume", *COMMON]) == EXIT_CONFIG


def test_solve_resume_in_another_frame(out):
    args = ["solve", "--alpha", "0", "--output", out, *OFF_DIAGONAL, *COMMON]
    assert main(args) == EXIT_OK
    assert main([*args, "--resume", "--rotate"]) == EXIT_CONFIG
    assert main([*args, "--resume"]) == EXIT_OK


def test_solve_nonconvergence(out, monkeypatch):
    def never(spec, bath, solver):
        raise NonConvergenceError(solver.restarts)

    monkeypatch.setattr(cli_main, "solve", never)
    assert main(["solve", "--alpha", "0", "--output", out, *COMMON]) == EXIT_NONCONVERGENCE
    assert not os.path.exists(os.path.join(out, "record.json"))


def test_bad_configuration(out, bad_solve):
    assert main(["solve", "--output", out, *COMMON, *bad_solve]) == EXIT_CONFIG


def test_config_file(tmp_path, out):
    path = tmp_path / "run.yaml"
    path.write_text("model:\n  alpha: 0.0\n  num_modes: 2\n")
    args = ["solve", "--config", str(path), "--output", out, *COMMON]
    assert main(args) == EXIT_OK
    with open(os.path.join(out, "record.json")) as handle:
        assert json.load(handle)["spec"]["num_modes"] == 3


def test_sweep(out):
    assert sweep(out) == EXIT_OK
    summary = read(out, "summary.csv")
    assert summary["alpha"].tolist() == [0.0]
    assert summary["E_g"].iloc[0] == pytest.approx(-0.05, abs=1e-10)
    assert summary["phase"].tolist() == ["Free"]
    for name in ("order_parameter.csv", "entropy.csv", "status.csv", "manifest.json"):
        assert os.path.exists(os.path.join(out, name))
    assert read(out, "status.csv")["status"].tolist() == ["done"]


def test_sweep_resume_is_idempotent(out, monkeypatch):
    assert sweep(out) == EXIT_OK
    with open(os.path.join(out, "summary.csv"), "rb") as handle:
        before = handle.read()
    monkeypatch.setattr(runner, "run_point", fail_every_point)
    assert sweep(out, "--resume") == EXIT_OK
    with open(os.path.join(out, "summary.csv"), "rb") as handle:
        assert handle.read() == before


def test_sweep_partial_failure(out, monkeypatch):
    monkeypatch.setattr(runner, "run_point", fail_every_point)
    assert sweep(out) == EXIT_PARTIAL
    status = read(out, "status.csv")
    assert status["status"].tolist() == ["failed"]
    assert status["error"].iloc[0].startswith("DegenerateStateError")
    assert read(out, "summary.csv").empty
    monkeypatch.undo()
    assert sweep(out, "--resume") == EXIT_OK
    assert read(out, "status.csv")["status"].tolist() == ["done"]


def test_sweep_refuses_other_configuration(out):
    assert sweep(out) == EXIT_OK
    assert sweep(out) == EXIT_CONFIG
    assert sweep(out, "--resume", "--set", "solver.seed=3") == EXIT_CONFIG


def test_sweep_resume_in_another_frame(out):
    assert sweep(out, *OFF_DIAGONAL, "--rotate") == EXIT_OK
    assert RunManifest.load(out).rotate
    assert sweep(out, *OFF_DIAGONAL, "--resume") == EXIT_CONFIG
    assert sweep(out, *OFF_DIAGONAL, "--resume", "--rotate") == EXIT_OK


def test_sweep_needs_alphas(out):
    args = ["sweep", "--alpha-start", "0.01", "--output", out, *COMMON]
    assert main(args) == EXIT_CONFIG


def test_phase(out):
    args = ["phase", "--deltas", "0.1", "0.2", "--alphas", "0.0", "--output", out, *COMMON]
    assert main(args) == EXIT_OK
    summary = read(out, "phase_summary.csv")
    assert summary["delta"].tolist() == [0.1, 0.2]
    assert summary["phase"].tolist() == ["Free", "Free"]
    assert len(read(out, "phase_map.csv")) == 2
    with open(os.path.join(out, "phase_map.json")) as handle:
        assert json.load(handle)["holes"] == []


def test_phase_needs_deltas(out):
    assert main(["phase", "--alphas", "0.0", "--output", out, *COMMON]) == EXIT_CONFIG


def test_analyze(out, tmp_path):
    assert sweep(out) == EXIT_OK
    analysis = str(tmp_path / "analysis")
    assert main(["analyze", out, "--output", analysis, "-q"]) == EXIT_OK
    with open(os.path.join(analysis, "analysis.json")) as handle:
        results = json.load(handle)
    assert results["points"] == 1
    assert results["reference"] is None
    assert os.path.exists(os.path.join(analysis, "transitions.csv"))


def free_point(config, rotate=False):
    spec, _ = runner.build_job(config, rotate)
    return synthetic_record(spec, synthetic_observables(spec.num_modes))


def test_analyze_mirror(tmp_path, monkeypatch):
    monkeypatch.setattr(runner, "run_point", free_point)
    rw, crw, other = (str(tmp_path / name) for name in ("rw", "crw", "sweep"))
    phase = ["phase", "--alphas", "0.0", "0.01", *COMMON]
    assert main([*phase, "--case", "rw", "--deltas", "0.1", "0.2", "--output", rw]) == EXIT_OK
    assert main([*phase, "--case", "crw", "--deltas", "-0.2", "-0.1", "--output", crw]) == EXIT_OK
    assert main(["analyze", rw, "--mirror", crw, "-q"]) == EXIT_OK
    assert list(read(rw, "mirror.csv").columns) == ["delta", "alpha_c", "alpha_c_mirror", "discrepancy"]
    with open(os.path.join(rw, "analysis.json")) as handle:
        assert json.load(handle)["max_mirror_discrepancy"] is None
    assert sweep(other) == EXIT_OK
    assert main(["analyze", rw, "--mirror", other, "-q"]) == EXIT_CONFIG
    assert main(["analyze", other, "--mirror", rw, "-q"]) == EXIT_CONFIG


def test_analyze_without_run(tmp_path):
    assert main(["analyze", str(tmp_path), "-q"]) == EXIT_CONFIG


def test_bench(out):
    args = ["bench", "--alpha", "0", "--modes", "3", "2", "--multiplicities", "1", "--output", out]
    assert main(args + COMMON) == EXIT_OK
    assert len(read(out, "convergence_modes.csv")) == 2
    assert len(read(out, "convergence_multiplicity.csv")) == 1
    assert os.path.exists(os.path.join(out, "convergence.json"))


def test_bench_compares_multiplicities(out, monkeypatch):
    monkeypatch.setattr(benchmark, "solve", multiplicity_dependent_solve)
    args = ["bench", "--alpha", "0", "--modes", "3", "--multiplicities", "4", "6"]
    assert main([*args, "--alphas", "0.1", "0.2", "--output", out, *COMMON]) == EXIT_OK
    table = read(out, "multiplicity_sweep.csv")
    assert table["N"].tolist() == [4, 6, 4, 6]
    with open(os.path.join(out, "convergence.json")) as handle:
        summary = json.load(handle)
    assert summary["max_multiplicity_deviation"] == pytest.approx(0.2e-3 / 12)
    assert summary["multiplicity_deviation"]["sigma_z"] == 0.0
