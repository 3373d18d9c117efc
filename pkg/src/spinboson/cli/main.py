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
"""Command line entry point: ``spinboson solve | sweep | phase | bench | analyze``"""
import argparse
import logging
import os
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import pandas as pd

from spinboson.analysis.classify import PhaseTolerances, classify_phase
from spinboson.cli import report
from spinboson.cli.manifest import FAILED, RunManifest
from spinboson.cli.records import (
    RECORD_FILE,
    read_record_with_hash,
    write_curves,
    write_json,
    write_record,
    write_sweep_tables,
    write_table,
)
from spinboson.cli.runner import (
    analysis_tolerances,
    build_job,
    check_grid,
    collect_records,
    run_grid,
    summary_from_records,
)
from spinboson.exception.configuration_error import ConfigurationError
from spinboson.exception.numerics_error import ManifestMismatchError, NonConvergenceError
from spinboson.model.bath import bath_table, discretize_bath
from spinboson.params import Params, layered, output_root, parse_overrides
from spinboson.solver.benchmark import benchmark_convergence, compare_multiplicities
from spinboson.solver.solve import solve

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NONCONVERGENCE = 3
EXIT_PARTIAL = 4

SECTIONS = ("model", "solver", "grid", "bench", "analysis")
"""top-level keys a configuration may hold"""

MODEL_FLAGS: List[Tuple[str, str, Callable[[str], Any], str]] = [
    ("--case", "model.coupling_case", str, "coupling case or alias (rw, crw, offdiagonal)"),
    ("--s", "model.s", float, "spectral exponent"),
    ("--alpha", "model.alpha", float, "dimensionless coupling"),
    ("--delta", "model.delta", float, "tunneling amplitude"),
    ("--epsilon", "model.epsilon", float, "energy bias"),
    ("--omega-c", "model.omega_c", float, "cutoff frequency"),
    ("--lambda-grid", "model.lambda_grid", float, "logarithmic mesh parameter"),
    ("--num-modes", "model.num_modes", int, "number of bath modes"),
]
SOLVER_FLAGS: List[Tuple[str, str, Callable[[str], Any], str]] = [
    ("--multiplicity", "solver.multiplicity", int, "coherent states per spin branch"),
    ("--restarts", "solver.restarts", int, "independent trajectories"),
    ("--max-sweeps", "solver.max_sweeps", int, "sweep budget of one trajectory"),
    ("--seed", "solver.seed", int, "root random seed"),
    ("--energy-tolerance", "solver.energy_tolerance", float, "relative energy change at convergence"),
]


def _common_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("--config", help="json, yaml or toml configuration file")
    parser.add_argument("--preset", help="named settings, e.g. canonical or desk")
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override a dotted configuration key, may repeat",
    )
    parser.add_argument("--output", help="run directory (default: $SPINBOSON_OUTPUT/<run id>)")
    parser.add_argument("--resume", action="store_true", help="continue the run in --output")
    parser.add_argument(
        "--workers", type=int, default=None, help="processes to use, 0 for every core"
    )
    loudness = parser.add_mutually_exclusive_group()
    loudness.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    loudness.add_argument("-q", "--quiet", action="store_true", help="warnings only")
    return parser


def _model_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    for flag, key, kind, text in MODEL_FLAGS + SOLVER_FLAGS:
        parser.add_argument(flag, dest=key, type=kind, default=None, help=text)
    parser.add_argument(
        "--real-mode",
        dest="solver.real_mode",
        action="store_const",
        const=True,
        default=None,
        help="real parameters only (diagonal case)",
    )
    parser.add_argument(
        "--log-trajectories",
        dest="solver.verbose",
        action="store_const",
        const=True,
        default=None,
        help="keep per-window trajectory logs",
    )
    parser.add_argument(
        "--rotate",
        action="store_true",
        help="solve an off-diagonal model in the rotated diagonal frame",
    )
    return parser


def _alpha_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--alphas", type=float, nargs="+", help="explicit alpha values")
    parser.add_argument("--alpha-start", type=float, help="first alpha")
    parser.add_argument("--alpha-stop", type=float, help="last alpha")
    parser.add_argument("--points", type=int, help="number of alpha values")
    parser.add_argument("--log", action="store_true", help="logarithmic alpha spacing")


def build_parser() -> argparse.ArgumentParser:
    """Parser of every subcommand"""
    common, model = _common_parser(), _model_parser()
    parser = argparse.ArgumentParser(
        prog="spinboson",
        description="Variational ground states of the anisotropic spin-boson model",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    commands.add_parser("solve", parents=[common, model], help="one ground state")

    sweep = commands.add_parser("sweep", parents=[common, model], help="ground states over alpha")
    _alpha_arguments(sweep)

    phase = commands.add_parser("phase", parents=[common, model], help="(delta, alpha) phase map")
    phase.add_argument("--deltas", type=float, nargs="+", help="tunneling values, one row each")
    phase.add_argument(
        "--columns", action="store_true", help="also trace boundaries along alpha columns"
    )
    _alpha_arguments(phase)

    bench = commands.add_parser("bench", parents=[common, model], help="convergence in M and N")
    bench.add_argument("--modes", type=int, nargs="+", help="bath sizes M")
    bench.add_argument("--multiplicities", type=int, nargs="+", help="multiplicities N")
    bench.add_argument(
        "--alphas", type=float, nargs="+", help="also solve these alphas at every multiplicity"
    )

    analyze = commands.add_parser("analyze", parents=[common], help="fits of a finished run")
    analyze.add_argument("input", help="directory of a sweep or phase run")
    analyze.add_argument("--mirror", help="phase run compared row by row at -Delta")
    return parser


def configure_logging(verbose: bool = False, quiet: bool = False) -> None:
    """Send log records to stderr at the requested level"""
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(format="%(asctime)s %(levelname)s %(name)s: %(message)s", level=level)
    logging.getLogger("spinboson").setLevel(level)


def flag_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    """Dotted keys set by model and solver flags"""
    return {
        key: value
        for key, value in vars(args).items()
        if key.startswith(("model.", "solver.")) and value is not None
    }


def load_config(args: argparse.Namespace) -> Params:
    """Preset, then file, then flags, then ``--set``

    Raises:
        ConfigurationError: unreadable file, bad override or unknown section
    """
    overrides = flag_overrides(args)
    overrides.update(parse_overrides(args.overrides))
    config = layered(args.preset, args.config, overrides)
    unknown = sorted(set(config) - set(SECTIONS))
    if unknown:
        raise ConfigurationError(f"unknown sections {unknown}, expected {list(SECTIONS)}")
    return config


def run_directory(args: argparse.Namespace, run_id: str) -> str:
    """``--output`` or ``<output root>/<run id>``"""
    directory = args.output or os.path.join(output_root(), run_id)
    os.makedirs(directory, exist_ok=True)
    return directory


def _split(config: Params, *sections: str) -> Tuple[Params, Dict[str, Any]]:
    params = config.duplicate()
    popped = {name: params.pop(name, None, keep_as_dict=True) for name in sections}
    return params, popped


def cmd_solve(args: argparse.Namespace) -> int:
    """One ground state with its record, curves and bath table"""
    config, _ = _split(load_config(args), "grid", "bench", "analysis")
    config_hash = RunManifest.compute_fingerprint("solve", config, [], args.rotate)
    spec, solver = build_job(config, args.rotate)
    if args.workers is not None:
        solver = solver.replace(workers=args.workers)
    directory = run_directory(args, f"solve-{config_hash}")
    path = os.path.join(directory, RECORD_FILE)
    if os.path.exists(path):
        if not args.resume:
            raise ConfigurationError(
                f"{directory} already holds a record, pass --resume or choose another directory",
                field="output",
            )
        previous, stored = read_record_with_hash(path)
        if stored != config_hash:
            raise ManifestMismatchError(directory, stored, config_hash)
        logger.info(f"record in {directory} is up to date, E_g = {previous.energy:.12f}")
        return EXIT_OK
    bath = discretize_bath(spec)
    record = solve(spec, bath, solver)
    config.to_file(os.path.join(directory, "config.json"))
    write_record(path, record, config_hash)
    write_curves(directory, record)
    write_table(bath_table(bath), directory, "bath")
    if record.trajectory_log is not None:
        write_table(record.trajectory_log, directory, "trajectories")
    phase = classify_phase(record) if record.observables is not None else None
    logger.info(
        f"E_g = {record.energy:.12f}, variance = {record.variance:.3e}, "
        f"phase {None if phase is None else phase.value}"
    )
    return EXIT_OK


def alpha_axis(args: argparse.Namespace) -> Dict[str, Any]:
    """Grid axis over ``model.alpha`` from the command line

    Raises:
        ConfigurationError: neither explicit values nor a complete range
    """
    if args.alphas:
        return {"type": "values", "keys": "model.alpha", "values": list(args.alphas)}
    if None in (args.alpha_start, args.alpha_stop, args.points):
        raise ConfigurationError(
            "give --alphas, or --alpha-start, --alpha-stop and --points", field="grid"
        )
    return {
        "type": "log" if args.log else "linear",
        "keys": "model.alpha",
        "start": args.alpha_start,
        "stop": args.alpha_stop,
        "num": args.points,
    }


def _grid(configured: Any, axes: Callable[[], List[Dict[str, Any]]]) -> List[Dict[str, Any]]:
    grid = list(configured) if configured else axes()
    check_grid(grid)
    return grid


def _execute(
    args: argparse.Namespace, command: str, config: Params, grid: List[Dict[str, Any]]
) -> RunManifest:
    fingerprint = RunManifest.compute_fingerprint(command, config, grid, args.rotate)
    directory = run_directory(args, f"{command}-{fingerprint}")
    manifest = RunManifest.open(command, config, grid, directory, args.resume, args.rotate)
    config.to_file(os.path.join(directory, "config.json"))
    workers = args.workers if args.workers is not None else 0
    return run_grid(manifest, workers or os.cpu_count() or 1)


def _finish(manifest: RunManifest) -> int:
    write_table(manifest.status_table(), manifest.output_dir, "status")
    counts = manifest.counts()
    if counts[FAILED]:
        logger.warning(
            f"{counts[FAILED]} of {len(manifest.points)} points failed, see status.csv"
        )
        return EXIT_PARTIAL
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    """Ground states along alpha with a summary table"""
    config, popped = _split(load_config(args), "grid", "bench")
    grid = _grid(popped["grid"], lambda: [alpha_axis(args)])
    manifest = _execute(args, "sweep", config, grid)
    tolerances = analysis_tolerances(config)
    records = [record for _, record in collect_records(manifest)]
    write_sweep_tables(manifest.output_dir, summary_from_records(records, tolerances))
    return _finish(manifest)


def _failed_points(manifest: RunManifest, config: Params) -> List[Tuple[float, float]]:
    model = config.get("model") or {}
    failed = []
    for point in manifest.points.values():
        if point.status != FAILED:
            continue
        delta = point.overrides.get("model.delta", model.get("delta"))
        alpha = point.overrides.get("model.alpha", model.get("alpha"))
        if delta is not None and alpha is not None:
            failed.append((float(delta), float(alpha)))
    return failed


def cmd_phase(args: argparse.Namespace) -> int:
    """Rows of alpha sweeps over a list of tunneling values"""
    config, popped = _split(load_config(args), "grid", "bench")

    def axes() -> List[Dict[str, Any]]:
        if not args.deltas:
            raise ConfigurationError("give at least one --deltas value", field="grid")
        return [{"type": "values", "keys": "model.delta", "values": list(args.deltas)}, alpha_axis(args)]

    grid = _grid(popped["grid"], axes)
    manifest = _execute(args, "phase", config, grid)
    tolerances = analysis_tolerances(config)
    records = [record for _, record in collect_records(manifest)]
    summary = report.phase_summary(records, tolerances)
    directory = manifest.output_dir
    write_table(summary, directory, "phase_summary")
    if summary.empty:
        logger.warning("no grid point finished, no phase map")
        return _finish(manifest)
    results, tables, _ = report.analyze_phase(summary, _failed_points(manifest, config), args.columns)
    for name, table in tables.items():
        write_table(table, directory, name)
    write_json(os.path.join(directory, "phase_map.json"), results)
    return _finish(manifest)


def cmd_bench(args: argparse.Namespace) -> int:
    """Energy convergence in the number of modes and in the multiplicity"""
    config, popped = _split(load_config(args), "grid", "bench", "analysis")
    bench = Params(popped["bench"] or {})
    modes = list(args.modes or bench.pop("modes", []))
    multiplicities = list(args.multiplicities or bench.pop("multiplicities", []))
    alphas = list(args.alphas or bench.pop("alphas", []))
    bench.assert_empty("bench")
    spec, solver = build_job(config, args.rotate)
    if args.workers is not None:
        solver = solver.replace(workers=args.workers)
    directory = run_directory(args, f"bench-{config.get_hash()}")
    result = benchmark_convergence(spec, solver, modes, multiplicities)
    config.to_file(os.path.join(directory, "config.json"))
    write_table(result.modes, directory, "convergence_modes")
    summary = {
        "decay_rate": result.decay_rate,
        "r_squared": result.r_squared,
        "reference_rate": result.reference_rate,
        "fitted": result.fitted,
        "monotone_in_multiplicity": result.monotone_in_multiplicity,
    }
    if alphas:
        comparison = compare_multiplicities(spec, solver, alphas, multiplicities)
        write_table(comparison.table, directory, "multiplicity_sweep")
        summary["multiplicity_deviation"] = comparison.deviation
        summary["max_multiplicity_deviation"] = comparison.max_deviation
        logger.info(f"largest disagreement between multiplicities {comparison.max_deviation:.3g}")
    write_table(result.multiplicity, directory, "convergence_multiplicity")
    write_json(os.path.join(directory, "convergence.json"), summary)
    logger.info(
        f"decay rate {result.decay_rate:.4f} per mode against {result.reference_rate:.4f}"
    )
    return EXIT_OK


def _mirror_summary(directory: str, tolerances: PhaseTolerances) -> pd.DataFrame:
    manifest = RunManifest.load(directory)
    if manifest.command != "phase":
        raise ConfigurationError(
            f"{directory} is a {manifest.command} run, not a phase run", field="mirror"
        )
    summary = report.phase_summary([record for _, record in collect_records(manifest)], tolerances)
    if summary.empty:
        raise ConfigurationError(f"{directory} holds no finished points", field="mirror")
    return summary


def cmd_analyze(args: argparse.Namespace) -> int:
    """Transition estimates and fits of a finished sweep or phase run"""
    manifest = RunManifest.load(args.input)
    config = Params(manifest.config).left_merge(load_config(args))
    tolerances = analysis_tolerances(config)
    records = [record for _, record in collect_records(manifest)]
    if not records:
        raise ConfigurationError(f"{args.input} holds no finished points", field="input")
    directory = args.output or args.input
    os.makedirs(directory, exist_ok=True)
    if args.mirror and manifest.command != "phase":
        raise ConfigurationError("--mirror needs a phase run as input", field="mirror")
    if manifest.command == "phase":
        summary = report.phase_summary(records, tolerances)
        mirror = _mirror_summary(args.mirror, tolerances) if args.mirror else None
        results, tables, _ = report.analyze_phase(
            summary, _failed_points(manifest, config), mirror=mirror
        )
    else:
        summary = summary_from_records(records, tolerances)
        results, tables = report.analyze_sweep(summary, records, tolerances)
    for name, table in tables.items():
        write_table(table, directory, name)
    write_json(os.path.join(directory, "analysis.json"), results)
    return EXIT_OK


COMMANDS: Dict[str, Callable[[argparse.Namespace], int]] = {
    "solve": cmd_solve,
    "sweep": cmd_sweep,
    "phase": cmd_phase,
    "bench": cmd_bench,
    "analyze": cmd_analyze,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run a subcommand and map its outcome to an exit code

    Returns:
        int: 0 on success, 2 for invalid configuration, 3 when a solve did not
        converge, 4 when some grid points failed
    """
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose, args.quiet)
    try:
        return COMMANDS[args.command](args)
    except (ConfigurationError, ManifestMismatchError) as error:
        logger.error(f"{str(error).strip()}")
        return EXIT_CONFIG
    except NonConvergenceError as error:
        logger.error(f"no converged solution: {str(error).strip()}")
        return EXIT_NONCONVERGENCE


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
