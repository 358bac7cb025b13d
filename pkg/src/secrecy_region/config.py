"""Configuration management for secrecy-region.

Supports multiple configuration sources with priority:
1. CLI arguments (highest priority)
2. Config file (JSON or TOML)
3. Environment variables
4. Defaults (lowest priority)
"""

import argparse
import hashlib
import json
import logging
import math
import os
from pathlib import Path
from typing import Any

from secrecy_region.channel_model import (
    PREFACTOR_COMPLEX,
    PREFACTOR_REAL,
    db_to_linear,
)
from secrecy_region.errors import ConfigError

logger = logging.getLogger("secrecy_region.config")

COMMANDS = ("region", "gaussian", "fading", "verify")


class SolverConfig:
    """Tolerances and limits of the power-allocation solver."""

    def __init__(
        self,
        lambda_tol: float = 1e-9,
        alpha_tol: float = 1e-6,
        lambda_bracket_growth: float = 4.0,
        max_iters: int = 200,
    ):
        """Initialize solver configuration.

        Args:
            lambda_tol: Relative tolerance on the power budget
            alpha_tol: Tolerance in bits on |R01 - R02| for Case 3
            lambda_bracket_growth: Factor used to widen the multiplier bracket
            max_iters: Iteration cap for each search phase

        """
        self.lambda_tol = lambda_tol
        self.alpha_tol = alpha_tol
        self.lambda_bracket_growth = lambda_bracket_growth
        self.max_iters = max_iters

    def validate(self) -> list[str]:
        """Validate configuration and return list of errors.

        Returns:
            List of validation error messages (empty if valid)

        """
        errors = []
        if not self.lambda_tol > 0:
            errors.append(f"lambda_tol must be positive (got {self.lambda_tol})")
        if not self.alpha_tol > 0:
            errors.append(f"alpha_tol must be positive (got {self.alpha_tol})")
        if not self.lambda_bracket_growth > 1:
            errors.append(
                "lambda_bracket_growth must be greater than 1 "
                f"(got {self.lambda_bracket_growth})"
            )
        if self.max_iters < 1:
            errors.append(f"max_iters must be at least 1 (got {self.max_iters})")
        return errors

    def to_dict(self) -> dict[str, Any]:
        """Convert configuration to dictionary."""
        return {
            "lambda_tol": self.lambda_tol,
            "alpha_tol": self.alpha_tol,
            "lambda_bracket_growth": self.lambda_bracket_growth,
            "max_iters": self.max_iters,
        }

    def __repr__(self) -> str:
        """Return string representation."""
        return (
            f"SolverConfig(lambda_tol={self.lambda_tol}, "
            f"alpha_tol={self.alpha_tol}, "
            f"lambda_bracket_growth={self.lambda_bracket_growth}, "
            f"max_iters={self.max_iters})"
        )


class RunConfig:
    """Parameters of one CLI invocation.

    Only the fields used by ``command`` are required; ``validate`` checks
    exactly those.
    """

    def __init__(
        self,
        command: str = "region",
        subchannels: list[tuple[float, float]] | None = None,
        prefactor: float = PREFACTOR_REAL,
        power: float | None = None,
        ratios: list[float] | None = None,
        betas: list[float] | None = None,
        gains: list[tuple[float, float]] | None = None,
        sigma1: float = 1.0,
        sigma2: list[float] | None = None,
        mu_sq: float = 1.0,
        nu_sq: float = 1.0,
        n_states: int = 20000,
        seed: int = 0,
        instances: list[dict[str, Any]] | None = None,
        n_random: int = 50,
        gap_tolerance: float = 1e-3,
        solver: SolverConfig | None = None,
        threads: int = 1,
        raw: dict[str, Any] | None = None,
        config_file: Path | None = None,
    ):
        """Initialize run configuration.

        Args:
            command: One of region, gaussian, fading, verify
            subchannels: (mu_sq, nu_sq) pairs for region/gaussian
            prefactor: Rate scale, 0.5 (real) or 1 (complex)
            power: Total power budget in linear scale
            ratios: gamma1/gamma0 sweep (None selects the default grid)
            betas: beta sweep for the Gaussian BCC (None selects the default grid)
            gains: Empirical (|h1|^2, |h2|^2) pairs; None selects Rayleigh fading
            sigma1: Mean of |h1|^2 under Rayleigh fading
            sigma2: Means of |h2|^2, one boundary per value
            mu_sq: Receiver-1 noise variance of the fading channel
            nu_sq: Receiver-2 noise variance of the fading channel
            n_states: Monte Carlo fading states
            seed: Random seed
            instances: Explicit verification instances
            n_random: Seeded random verification instances
            gap_tolerance: Verification gap tolerance in bits
            solver: Solver tolerances
            threads: Worker threads for boundary points
            raw: The parsed config document (hashed into the manifest)
            config_file: Path the config was read from

        """
        self.command = command
        self.subchannels = subchannels
        self.prefactor = prefactor
        self.power = power
        self.ratios = ratios
        self.betas = betas
        self.gains = gains
        self.sigma1 = sigma1
        self.sigma2 = sigma2 if sigma2 is not None else [1.0]
        self.mu_sq = mu_sq
        self.nu_sq = nu_sq
        self.n_states = n_states
        self.seed = seed
        self.instances = instances
        self.n_random = n_random
        self.gap_tolerance = gap_tolerance
        self.solver = solver or SolverConfig()
        self.threads = threads
        self.raw = raw if raw is not None else {}
        self.config_file = config_file

    def validate(self) -> list[str]:
        """Validate configuration and return list of errors.

        Returns:
            List of validation error messages (empty if valid)

        """
        errors: list[str] = []

        if self.command not in COMMANDS:
            errors.append(f"Unknown command {self.command!r}")
            return errors

        if self.command in ("region", "gaussian", "fading"):
            if self.power is None:
                errors.append("Power budget is required (P or P_dB)")
            elif not (math.isfinite(self.power) and self.power >= 0):
                errors.append(f"Power must be finite and >= 0 (got {self.power})")

        if self.command in ("region", "gaussian"):
            if not self.subchannels:
                errors.append("Channel must have at least one subchannel")
            else:
                for i, (mu, nu) in enumerate(self.subchannels):
                    if not mu > 0:
                        errors.append(f"subchannels[{i}].mu_sq must be > 0 (got {mu})")
                    if not nu > 0:
                        errors.append(f"subchannels[{i}].nu_sq must be > 0 (got {nu})")
            if self.command == "gaussian" and self.subchannels:
                if len(self.subchannels) != 1:
                    errors.append("gaussian command takes exactly one subchannel")

        if self.prefactor not in (PREFACTOR_REAL, PREFACTOR_COMPLEX):
            errors.append(f"prefactor must be 0.5 or 1 (got {self.prefactor})")

        if self.ratios is not None:
            if not self.ratios:
                errors.append("ratios must not be empty")
            for r in self.ratios:
                if not (math.isfinite(r) and r > 0):
                    errors.append(f"ratios must be finite and > 0 (got {r})")
            if self.ratios != sorted(self.ratios):
                errors.append("ratios must be sorted ascending")

        if self.betas is not None:
            for b in self.betas:
                if not 0 <= b <= 1:
                    errors.append(f"betas must lie in [0, 1] (got {b})")

        if self.command == "fading":
            if self.gains is not None:
                if not self.gains:
                    errors.append("gains must not be empty")
                for g1, g2 in self.gains:
                    if g1 < 0 or g2 < 0:
                        errors.append(f"gains must be >= 0 (got {(g1, g2)})")
            else:
                if not self.sigma1 > 0:
                    errors.append(f"sigma1 must be > 0 (got {self.sigma1})")
                if not self.sigma2:
                    errors.append("sigma2 must list at least one value")
                for s in self.sigma2:
                    if not s > 0:
                        errors.append(f"sigma2 values must be > 0 (got {s})")
            if not self.mu_sq > 0:
                errors.append(f"mu_sq must be > 0 (got {self.mu_sq})")
            if not self.nu_sq > 0:
                errors.append(f"nu_sq must be > 0 (got {self.nu_sq})")
            if self.n_states < 1:
                errors.append(f"n_states must be >= 1 (got {self.n_states})")

        if self.command == "verify":
            if self.n_random < 0:
                errors.append(f"n_random must be >= 0 (got {self.n_random})")
            if not self.instances and self.n_random == 0:
                errors.append("verify needs instances or n_random > 0")
            for i, inst in enumerate(self.instances or []):
                if not inst["subchannels"]:
                    errors.append(f"instances[{i}] has no subchannels")
                if any(not (mu > 0 and nu > 0) for mu, nu in inst["subchannels"]):
                    errors.append(f"instances[{i}] noise variances must be > 0")
                if not (math.isfinite(inst["P"]) and inst["P"] >= 0):
                    errors.append(f"instances[{i}].P must be >= 0 (got {inst['P']})")
                if not inst["ratio"] > 0:
                    errors.append(
                        f"instances[{i}].ratio must be > 0 (got {inst['ratio']})"
                    )
            if not self.gap_tolerance > 0:
                errors.append(
                    f"gap_tolerance must be positive (got {self.gap_tolerance})"
                )

        if self.seed < 0:
            errors.append(f"seed must be non-negative (got {self.seed})")
        if self.threads < 1:
            errors.append(f"threads must be >= 1 (got {self.threads})")

        errors.extend(self.solver.validate())
        return errors

    def to_dict(self) -> dict[str, Any]:
        """Convert configuration to dictionary."""
        return {
            "command": self.command,
            "subchannels": self.subchannels,
            "prefactor": self.prefactor,
            "P": self.power,
            "ratios": self.ratios,
            "betas": self.betas,
            "gains": self.gains,
            "sigma1": self.sigma1,
            "sigma2": self.sigma2,
            "mu_sq": self.mu_sq,
            "nu_sq": self.nu_sq,
            "n_states": self.n_states,
            "seed": self.seed,
            "instances": self.instances,
            "n_random": self.n_random,
            "gap_tolerance": self.gap_tolerance,
            "solver": self.solver.to_dict(),
            "threads": self.threads,
        }

    def config_hash(self) -> str:
        """SHA-256 of the canonicalized config document."""
        canonical = json.dumps(
            self.raw, sort_keys=True, separators=(",", ":"), ensure_ascii=True
        )
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def __repr__(self) -> str:
        """Return string representation."""
        return (
            f"RunConfig(command={self.command!r}, P={self.power}, "
            f"seed={self.seed}, threads={self.threads})"
        )


def _number(data: dict[str, Any], key: str, path: str, default: Any = None) -> Any:
    value = data.get(key, default)
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, int | float):
        raise ConfigError(f"Expected a number, got {value!r}", field=f"{path}{key}")
    return float(value)


def _number_list(data: dict[str, Any], key: str, path: str) -> list[float] | None:
    value = data.get(key)
    if value is None:
        return None
    if not isinstance(value, list):
        raise ConfigError(f"Expected a list, got {value!r}", field=f"{path}{key}")
    out = []
    for i, item in enumerate(value):
        if isinstance(item, bool) or not isinstance(item, int | float):
            raise ConfigError(
                f"Expected a number, got {item!r}", field=f"{path}{key}[{i}]"
            )
        out.append(float(item))
    return out


def _pairs(
    value: Any, field: str, names: tuple[str, str]
) -> list[tuple[float, float]]:
    if not isinstance(value, list):
        raise ConfigError(f"Expected a list, got {value!r}", field=field)
    out = []
    for i, item in enumerate(value):
        item_path = f"{field}[{i}]"
        if isinstance(item, dict):
            pair = []
            for name in names:
                if name not in item:
                    raise ConfigError(f"Missing {name}", field=f"{item_path}.{name}")
                pair.append(_number(item, name, f"{item_path}."))
            out.append((pair[0], pair[1]))
        elif isinstance(item, list) and len(item) == 2:
            for j, x in enumerate(item):
                if isinstance(x, bool) or not isinstance(x, int | float):
                    raise ConfigError(
                        f"Expected a number, got {x!r}", field=f"{item_path}[{j}]"
                    )
            out.append((float(item[0]), float(item[1])))
        else:
            raise ConfigError(
                f"Expected an object or a pair, got {item!r}", field=item_path
            )
    return out


def parse_power(data: dict[str, Any], path: str = "") -> float | None:
    """Read the power budget from ``P`` (linear) or ``P_dB``.

    The only place where dB values are converted.
    """
    if "P" in data and "P_dB" in data:
        raise ConfigError("Give either P or P_dB, not both", field=f"{path}P")
    if "P_dB" in data:
        return db_to_linear(_number(data, "P_dB", path))
    return _number(data, "P", path)


def parse_solver(data: Any, path: str = "solver") -> SolverConfig:
    """Build a SolverConfig from a config section."""
    if data is None:
        return SolverConfig()
    if not isinstance(data, dict):
        raise ConfigError(f"Expected a table, got {data!r}", field=path)
    defaults = SolverConfig()
    max_iters = data.get("max_iters", defaults.max_iters)
    if isinstance(max_iters, bool) or not isinstance(max_iters, int):
        raise ConfigError(
            f"Expected an integer, got {max_iters!r}", field=f"{path}.max_iters"
        )
    return SolverConfig(
        lambda_tol=_number(data, "lambda_tol", f"{path}.", defaults.lambda_tol),
        alpha_tol=_number(data, "alpha_tol", f"{path}.", defaults.alpha_tol),
        lambda_bracket_growth=_number(
            data, "lambda_bracket_growth", f"{path}.", defaults.lambda_bracket_growth
        ),
        max_iters=max_iters,
    )


def parse_instance(item: Any, path: str) -> dict[str, Any]:
    """Normalize one explicit verification instance.

    Returns:
        Mapping with ``subchannels``, ``prefactor``, ``P`` and ``ratio``

    """
    if not isinstance(item, dict):
        raise ConfigError(f"Expected a table, got {item!r}", field=path)
    if "subchannels" not in item:
        raise ConfigError("Missing subchannels", field=f"{path}.subchannels")
    power = parse_power(item, f"{path}.")
    if power is None:
        raise ConfigError("Missing P or P_dB", field=f"{path}.P")
    return {
        "subchannels": _pairs(
            item["subchannels"], f"{path}.subchannels", ("mu_sq", "nu_sq")
        ),
        "prefactor": _number(item, "prefactor", f"{path}.", PREFACTOR_REAL),
        "P": power,
        "ratio": _number(item, "ratio", f"{path}.", 1.0),
    }


def _integer(data: dict[str, Any], key: str, default: int) -> int:
    value = data.get(key, default)
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"Expected an integer, got {value!r}", field=key)
    return value


def parse_document(data: dict[str, Any], command: str) -> RunConfig:
    """Turn a parsed config document into a RunConfig.

    Args:
        data: Parsed JSON/TOML document
        command: The CLI command the document is used for

    Returns:
        Unvalidated run configuration

    Raises:
        ConfigError: If a field has the wrong type; the dotted path is kept

    """
    if not isinstance(data, dict):
        raise ConfigError("Config document must be an object")

    subchannels = None
    prefactor = PREFACTOR_REAL
    channel = data.get("channel")
    if channel is not None:
        if not isinstance(channel, dict):
            raise ConfigError(f"Expected a table, got {channel!r}", field="channel")
        if "subchannels" not in channel:
            raise ConfigError("Missing subchannels", field="channel.subchannels")
        subchannels = _pairs(
            channel["subchannels"], "channel.subchannels", ("mu_sq", "nu_sq")
        )
        prefactor = _number(channel, "prefactor", "channel.", PREFACTOR_REAL)

    gains = None
    sigma1 = 1.0
    sigma2: list[float] | None = None
    mu_sq = nu_sq = 1.0
    fading = data.get("fading")
    if fading is not None:
        if not isinstance(fading, dict):
            raise ConfigError(f"Expected a table, got {fading!r}", field="fading")
        if "gains" in fading:
            gains = _pairs(fading["gains"], "fading.gains", ("g1", "g2"))
        sigma1 = _number(fading, "sigma1", "fading.", 1.0)
        s2 = fading.get("sigma2", 1.0)
        if isinstance(s2, list):
            sigma2 = _number_list(fading, "sigma2", "fading.")
        else:
            sigma2 = [_number(fading, "sigma2", "fading.", 1.0)]
        mu_sq = _number(fading, "mu_sq", "fading.", 1.0)
        nu_sq = _number(fading, "nu_sq", "fading.", 1.0)
        prefactor = PREFACTOR_COMPLEX

    instances = data.get("instances")
    if instances is not None:
        if not isinstance(instances, list):
            raise ConfigError(f"Expected a list, got {instances!r}", field="instances")
        instances = [
            parse_instance(item, f"instances[{i}]") for i, item in enumerate(instances)
        ]

    return RunConfig(
        command=command,
        subchannels=subchannels,
        prefactor=prefactor,
        power=parse_power(data),
        ratios=_number_list(data, "ratios", ""),
        betas=_number_list(data, "betas", ""),
        gains=gains,
        sigma1=sigma1,
        sigma2=sigma2,
        mu_sq=mu_sq,
        nu_sq=nu_sq,
        n_states=_integer(data, "n_states", 20000),
        seed=_integer(data, "seed", 0),
        instances=instances,
        n_random=_integer(data, "n_random", 50 if instances is None else 0),
        gap_tolerance=_number(data, "gap_tolerance", "", 1e-3),
        solver=parse_solver(data.get("solver")),
        threads=_integer(data, "threads", 1),
        raw=data,
    )


def read_document(config_path: Path) -> dict[str, Any]:
    """Read a JSON or TOML config file, chosen by suffix.

    Raises:
        FileNotFoundError: If config file doesn't exist
        ConfigError: If the file cannot be parsed

    """
    if not config_path.exists():
        raise FileNotFoundError(f"Config file not found: {config_path}")

    if config_path.suffix == ".toml":
        try:
            import tomli
        except ImportError:
            # Try tomllib (Python 3.11+)
            try:
                import tomllib as tomli  # type: ignore
            except ImportError:
                raise ImportError(
                    "TOML support requires the tomli package"
                ) from None
        try:
            with config_path.open("rb") as f:
                return tomli.load(f)
        except tomli.TOMLDecodeError as e:
            raise ConfigError(f"Invalid TOML in {config_path}: {e}") from e

    try:
        data = json.loads(config_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigError(f"Invalid JSON in {config_path}: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError("Config document must be an object")
    return data


def load_from_env() -> dict[str, Any]:
    """Read the environment overrides.

    Returns:
        Mapping with ``threads``, ``seed`` and ``log_level`` when set

    """
    env: dict[str, Any] = {}
    try:
        if "SECRECY_REGION_THREADS" in os.environ:
            env["threads"] = int(os.environ["SECRECY_REGION_THREADS"])
        if "SECRECY_REGION_SEED" in os.environ:
            env["seed"] = int(os.environ["SECRECY_REGION_SEED"])
    except ValueError as e:
        raise ConfigError(f"Invalid environment override: {e}") from e
    if "SECRECY_REGION_LOG_LEVEL" in os.environ:
        env["log_level"] = os.environ["SECRECY_REGION_LOG_LEVEL"]
    return env


def parse_cli_args(args: list[str] | None = None) -> argparse.Namespace:
    """Parse command-line arguments.

    Args:
        args: Command-line arguments (defaults to sys.argv)

    Returns:
        Parsed arguments namespace

    """
    parser = argparse.ArgumentParser(
        prog="secrecy-region",
        description="Secrecy capacity regions of parallel and fading Gaussian BCCs",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Configuration Priority (highest to lowest):
  1. CLI arguments
  2. Config file (--config, .json or .toml)
  3. Environment variables
  4. Defaults

Environment Variables:
  SECRECY_REGION_THREADS    Worker threads for boundary points (default: 1)
  SECRECY_REGION_SEED       Random seed (default: 0)
  SECRECY_REGION_LOG_LEVEL  Logging level (default: INFO)

Exit Codes:
  0 success, 1 config error, 2 solver error, 3 verification gap exceeded

Example:
  secrecy-region region --config configs/region.json --out region.csv
  secrecy-region fading --config configs/fading.toml --out fading.csv --threads 4
        """,
    )
    parser.add_argument("command", choices=COMMANDS, help="What to compute")
    parser.add_argument(
        "--config", type=Path, required=True, help="Path to JSON or TOML config file"
    )
    parser.add_argument("--out", type=Path, help="Output CSV path")
    parser.add_argument("--seed", type=int, help="Random seed")
    parser.add_argument("--threads", type=int, help="Worker threads")
    parser.add_argument("--log-level", help="Logging level (DEBUG, INFO, ...)")
    parser.add_argument(
        "--validate-only",
        action="store_true",
        help="Validate configuration and exit",
    )
    return parser.parse_args(args)


def load_config(cli_args: argparse.Namespace) -> RunConfig:
    """Load configuration from all sources with proper priority.

    Args:
        cli_args: Parsed command-line arguments

    Returns:
        Merged and validated configuration

    Raises:
        ConfigError: If the file is unreadable, malformed, holds values with no
            JSON form (TOML dates), or fails validation

    """
    env = load_from_env()
    try:
        document = read_document(cli_args.config)
    except FileNotFoundError as e:
        raise ConfigError(str(e), field="--config") from e
    except (OSError, UnicodeDecodeError) as e:
        raise ConfigError(
            f"Cannot read {cli_args.config}: {e}", field="--config"
        ) from e
    config = parse_document(document, cli_args.command)
    config.config_file = cli_args.config
    # the manifest hashes the document as JSON
    try:
        config.config_hash()
    except (TypeError, ValueError) as e:
        raise ConfigError(f"Config values must be JSON-representable: {e}") from e
    logger.info(f"Loaded configuration from {cli_args.config}")

    # Environment only fills what the file leaves unset
    if "threads" not in document and "threads" in env:
        config.threads = env["threads"]
    if "seed" not in document and "seed" in env:
        config.seed = env["seed"]

    # Override with CLI arguments (highest priority)
    if cli_args.seed is not None:
        config.seed = cli_args.seed
    if cli_args.threads is not None:
        config.threads = cli_args.threads

    errors = config.validate()
    if errors:
        logger.error("Configuration validation failed:")
        for error in errors:
            logger.error(f"  - {error}")
        raise ConfigError("; ".join(errors))

    return config
