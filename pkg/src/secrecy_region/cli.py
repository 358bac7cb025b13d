"""Command-line front end for secrecy-region.

Each command reads a run configuration, computes rows, and writes a CSV file
plus a ``<out>.manifest.json`` sidecar; the fading command also writes its
per-state allocations to ``<out>.states.csv``. Every file is written
atomically.
"""

import csv
import io
import json
import logging
import os
import tempfile
from collections.abc import Callable, Iterable, Sequence
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, TypeVar

import numpy as np

from secrecy_region import __version__
from secrecy_region.channel_model import (
    Allocation,
    ParallelChannel,
    Weights,
    total_power,
    weighted_objective,
)
from secrecy_region.config import RunConfig, load_config, parse_cli_args
from secrecy_region.errors import (
    ConfigError,
    ConvergenceError,
    NoRootError,
    SecrecyRegionError,
    ValidationError,
    VerificationGapError,
    exit_code_for,
    format_error_response,
)
from secrecy_region.fading_ergodic import (
    Empirical,
    FadingSpec,
    Rayleigh,
    boundary_for_states,
    sample_states,
)
from secrecy_region.oracle import GridSpec, Instance, grid_search, random_instance
from secrecy_region.power_allocator import optimal_allocation
from secrecy_region.region_tracer import (
    BoundaryPoint,
    gaussian_beta_sweep,
    trace_region,
)

logger = logging.getLogger("secrecy_region.cli")

T = TypeVar("T")

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

POINT_COLUMNS = [
    "gamma_ratio",
    "R0_bits",
    "R1_bits",
    "R01_bits",
    "R02_bits",
    "case",
    "alpha",
    "lambda",
]

VERIFY_COLUMNS = [
    "instance",
    "L",
    "ratio",
    "P",
    "allocator_objective",
    "oracle_objective",
    "gap",
    "passed",
]

STATE_COLUMNS = ["sigma2", "gamma_ratio", "state", "g1", "g2", "p0", "p1"]

# relative slack on the budget before an allocation counts as infeasible
BUDGET_SLACK = 1e-6


def fmt(value: Any) -> str:
    """Render a CSV cell; floats use the shortest round-trip form."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float | np.floating):
        return repr(float(value))
    return str(value)


def atomic_write(path: Path, text: str) -> None:
    """Write text as UTF-8 via a temp file in the same directory."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> int:
    """Write a CSV file with LF line endings.

    Returns:
        Number of data rows written

    """
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    count = 0
    for row in rows:
        writer.writerow([fmt(v) for v in row])
        count += 1
    atomic_write(path, buffer.getvalue())
    logger.info(f"Wrote {count} rows to {path}")
    return count


def manifest_path(out: Path) -> Path:
    """Sidecar manifest path for an output file."""
    return out.with_name(out.name + ".manifest.json")


def write_manifest(config: RunConfig, out: Path, rows: int) -> Path:
    """Record what produced an output file."""
    manifest = {
        "command": config.command,
        "config_file": str(config.config_file) if config.config_file else None,
        "config_hash": config.config_hash(),
        "seed": config.seed,
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "output": out.name,
        "rows": rows,
    }
    if config.command == "fading":
        manifest["states_output"] = states_path(out).name
    path = manifest_path(out)
    atomic_write(path, json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def point_cells(point: BoundaryPoint) -> list[Any]:
    """Rate, case and multiplier cells of a traced point."""
    case = point.case
    return [
        point.ratio,
        point.rate.r0,
        point.rate.r1,
        point.rate.r01,
        point.rate.r02,
        case.case if case is not None else None,
        case.alpha if case is not None else None,
        point.lam,
    ]


def _required(value: T | None, field: str) -> T:
    """Unwrap a config field the command cannot run without."""
    if value is None:
        raise ConfigError(f"{field} is required for this command", field=field)
    return value


def _allocation(point: BoundaryPoint) -> Allocation:
    if point.alloc is None:
        raise ValidationError("Boundary point carries no allocation", "alloc")
    return point.alloc


def cmd_region(config: RunConfig, out: Path) -> int:
    """Trace a parallel-channel boundary; one row per ratio."""
    subchannels = _required(config.subchannels, "channel.subchannels")
    power = _required(config.power, "P")
    channel = ParallelChannel.from_pairs(subchannels, prefactor=config.prefactor)
    boundary = trace_region(
        channel, power, config.ratios, config.solver, config.threads
    )
    header = list(POINT_COLUMNS)
    for i in range(1, len(channel) + 1):
        header += [f"p0_{i}", f"p1_{i}"]

    def rows() -> Iterable[list[Any]]:
        for point in sorted(boundary.points, key=lambda p: p.ratio):
            powers = [x for pair in _allocation(point).entries for x in pair]
            yield point_cells(point) + powers

    return write_csv(out, header, rows())


def cmd_gaussian(config: RunConfig, out: Path) -> int:
    """Trace a single Gaussian BCC by its power split; one row per beta."""
    [(mu_sq, nu_sq)] = _required(config.subchannels, "channel.subchannels")
    boundary = gaussian_beta_sweep(
        _required(config.power, "P"),
        mu_sq,
        nu_sq,
        config.betas,
        prefactor=config.prefactor,
    )
    rows = (
        [p.beta, p.rate.r0, p.rate.r1]
        for p in sorted(boundary.points, key=lambda p: p.beta)
    )
    return write_csv(out, ["beta", "R0_bits", "R1_bits"], rows)


def fading_specs(config: RunConfig) -> list[tuple[float | None, FadingSpec]]:
    """Fading specs to sweep, keyed by sigma2 (None for empirical gains)."""
    if config.gains is not None:
        spec = FadingSpec(Empirical(tuple(config.gains)), config.mu_sq, config.nu_sq)
        return [(None, spec)]
    return [
        (s2, FadingSpec(Rayleigh(config.sigma1, s2), config.mu_sq, config.nu_sq))
        for s2 in config.sigma2
    ]


def states_path(out: Path) -> Path:
    """Sidecar path for the per-state allocations of a fading run."""
    return out.with_name(out.name + ".states.csv")


def cmd_fading(config: RunConfig, out: Path) -> int:
    """Trace ergodic boundaries, one block of rows per sigma2 value.

    The per-state gains and powers behind every row go to the
    ``<out>.states.csv`` sidecar, keyed by (sigma2, gamma_ratio). Rebuilding
    the subchannels from those gains and scaling ``rate_point`` by 1/N gives
    the row's rates back.
    """
    power = _required(config.power, "P")
    header = ["sigma2", *POINT_COLUMNS, "mean_power", "n_states", "seed"]
    rows: list[list[Any]] = []
    state_rows: list[list[Any]] = []
    for sigma2, spec in fading_specs(config):
        states = sample_states(spec, config.n_states, config.seed)
        boundary = boundary_for_states(
            spec, states, power, config.ratios, config.solver, config.threads
        )
        seed = None if isinstance(spec.gain_model, Empirical) else config.seed
        g1 = states.g1.tolist()
        g2 = states.g2.tolist()
        for point in sorted(boundary.points, key=lambda p: p.ratio):
            alloc = _allocation(point)
            n = len(alloc)
            rows.append(
                [sigma2, *point_cells(point), total_power(alloc) / n, n, seed]
            )
            state_rows.extend(
                [sigma2, point.ratio, j, g1[j], g2[j], p0, p1]
                for j, (p0, p1) in enumerate(alloc.entries)
            )
        logger.info(f"sigma2={sigma2}: {len(boundary)} boundary points")
    write_csv(states_path(out), STATE_COLUMNS, state_rows)
    return write_csv(out, header, rows)


def verify_instances(config: RunConfig) -> list[Instance]:
    """Explicit instances first, then seeded random ones."""
    instances = [
        Instance(
            channel=ParallelChannel.from_pairs(
                item["subchannels"], prefactor=item["prefactor"]
            ),
            weights=Weights.from_ratio(item["ratio"]),
            budget=item["P"],
        )
        for item in config.instances or []
    ]
    rng = np.random.default_rng(config.seed)
    instances += [random_instance(rng) for _ in range(config.n_random)]
    return instances


def cmd_verify(config: RunConfig, out: Path) -> int:
    """Certify the allocator against the grid oracle.

    An instance passes when the oracle beats the allocator by at most the gap
    tolerance and the allocation stays within its budget. An allocator that
    raises fails its instance and leaves the gap cells empty.

    Raises:
        VerificationGapError: After writing the report, if any instance fails
        OracleRefusalError: If an instance exceeds the oracle's dimension cap

    """
    rows = []
    failed = 0
    worst = 0.0
    instances = verify_instances(config)
    for i, inst in enumerate(instances):
        oracle = grid_search(
            inst.channel, inst.weights, inst.budget, GridSpec.for_channel(inst.channel)
        )
        try:
            solution = optimal_allocation(
                inst.channel, inst.weights, inst.budget, config.solver
            )
        except (ConvergenceError, NoRootError) as e:
            # an allocator failure fails the instance, not the run
            failed += 1
            logger.warning(f"instance {i} failed: {e.error_code}: {e.message}")
            rows.append(
                [i, len(inst.channel), inst.weights.ratio, inst.budget]
                + [None, oracle.objective, None, False]
            )
            continue
        ours = weighted_objective(inst.channel, inst.weights, solution.alloc)
        gap = oracle.objective - ours
        feasible = total_power(solution.alloc) <= inst.budget * (1 + BUDGET_SLACK)
        passed = gap <= config.gap_tolerance and feasible
        if not passed:
            failed += 1
            logger.warning(
                f"instance {i} failed: gap {gap:.3e} bits, "
                f"power {total_power(solution.alloc):.9g} of {inst.budget:.9g}"
            )
        worst = max(worst, gap)
        rows.append(
            [
                i,
                len(inst.channel),
                inst.weights.ratio,
                inst.budget,
                ours,
                oracle.objective,
                gap,
                passed,
            ]
        )

    count = write_csv(out, VERIFY_COLUMNS, rows)
    logger.info(
        f"Verified {len(instances) - failed}/{len(instances)} instances, "
        f"worst gap {worst:.3e} bits"
    )
    if failed:
        write_manifest(config, out, count)
        raise VerificationGapError(failed, len(instances), worst, config.gap_tolerance)
    return count


COMMANDS: dict[str, Callable[[RunConfig, Path], int]] = {
    "region": cmd_region,
    "gaussian": cmd_gaussian,
    "fading": cmd_fading,
    "verify": cmd_verify,
}


def _log_level(name: str | None) -> int:
    level = getattr(logging, (name or "INFO").upper(), None)
    return level if isinstance(level, int) else logging.INFO


def main(argv: list[str] | None = None) -> int:
    """Run one command and return the process exit code."""
    args = parse_cli_args(argv)
    level_name = args.log_level or os.environ.get("SECRECY_REGION_LOG_LEVEL")
    logging.basicConfig(level=_log_level(level_name), format=LOG_FORMAT)

    try:
        config = load_config(args)
        if args.validate_only:
            logger.info(f"Configuration is valid: {config!r}")
            return 0
        if args.out is None:
            raise ConfigError("--out is required", field="--out")

        logger.info(f"Running {config.command} (seed {config.seed})")
        rows = COMMANDS[config.command](config, args.out)
        write_manifest(config, args.out, rows)
    except SecrecyRegionError as e:
        logger.error(f"{e.error_code}: {e.message}")
        print(format_error_response(e))
        return exit_code_for(e)
    return 0
