"""Error handling for secrecy-region.

Defines typed exceptions for the failure modes of the solvers and the CLI,
each with a machine-readable code so that callers (and the CLI exit code
mapping) can react without parsing messages.
"""

import json
from typing import Any


class SecrecyRegionError(Exception):
    """Base exception for all secrecy-region errors.

    Attributes:
        error_code: Machine-readable error code
        message: Human-readable error message
        details: Optional additional context

    """

    def __init__(
        self,
        message: str,
        error_code: str | None = None,
        details: dict[str, str] | None = None,
    ):
        """Initialize secrecy-region error.

        Args:
            message: Human-readable error message
            error_code: Machine-readable error code
            details: Additional error context

        """
        super().__init__(message)
        self.message = message
        self.error_code = error_code or self.__class__.__name__
        self.details = details or {}

    def to_dict(self) -> dict[str, Any]:
        """Convert error to dictionary for JSON serialization.

        Returns:
            Error data as dictionary

        """
        return {
            "error": self.error_code,
            "message": self.message,
            "details": self.details,
        }


class ValidationError(SecrecyRegionError):
    """Invalid input parameters.

    Raised when an argument lies outside the domain of an operation:
    nonpositive noise variance, weight or multiplier, negative budget,
    interpolation parameters outside [0, 1].
    """

    def __init__(
        self,
        message: str,
        parameter: str | None = None,
        value: Any = None,
    ):
        """Initialize validation error.

        Args:
            message: Human-readable error message
            parameter: The parameter that failed validation
            value: The invalid value (truncated if too long)

        """
        details: dict[str, str] = {}
        if parameter:
            details["parameter"] = parameter
        if value is not None:
            details["value"] = str(value)[:100]
        super().__init__(
            message=message,
            error_code="VALIDATION_ERROR",
            details=details,
        )


class ShapeError(SecrecyRegionError):
    """Allocation does not match the channel it is evaluated on."""

    def __init__(self, expected: int, got: int):
        """Initialize shape error.

        Args:
            expected: Number of subchannels in the channel
            got: Number of entries in the allocation

        """
        super().__init__(
            message=f"Allocation has {got} entries, channel has {expected} subchannels",
            error_code="SHAPE_ERROR",
            details={"expected": str(expected), "got": str(got)},
        )


class ConvergenceError(SecrecyRegionError):
    """Power-budget bisection did not converge.

    Raised when the multiplier search exceeds its iteration cap. The best
    bracket found so far is kept in the details so the caller can retry
    with a looser tolerance or a larger cap.
    """

    def __init__(
        self,
        message: str,
        bracket: tuple[float, float],
        iterations: int,
        case: str | None = None,
    ):
        """Initialize convergence error.

        Args:
            message: Human-readable error message
            bracket: Best (lambda_lo, lambda_hi) bracket
            iterations: Iterations spent
            case: Case tag being solved

        """
        details = {
            "lambda_lo": repr(bracket[0]),
            "lambda_hi": repr(bracket[1]),
            "iterations": str(iterations),
        }
        if case:
            details["case"] = case
        super().__init__(
            message=message,
            error_code="CONVERGENCE_ERROR",
            details=details,
        )
        self.bracket = bracket
        self.iterations = iterations


class NoRootError(SecrecyRegionError):
    """No alpha with equal common-rate branches was found."""

    def __init__(self, message: str, scanned: list[tuple[float, float]]):
        """Initialize no-root error.

        Args:
            message: Human-readable error message
            scanned: (alpha, R01 - R02) pairs evaluated during the scan

        """
        super().__init__(
            message=message,
            error_code="NO_ROOT_ERROR",
            details={
                "scanned": ", ".join(f"({a:.6g}, {g:.3e})" for a, g in scanned),
            },
        )
        self.scanned = scanned


class OracleRefusalError(SecrecyRegionError):
    """Grid search refused an instance above its dimension cap."""

    def __init__(self, dims: int, max_dims: int):
        """Initialize oracle refusal.

        Args:
            dims: Power dimensions the instance needs
            max_dims: Configured cap

        """
        super().__init__(
            message=(
                f"Grid oracle needs {dims} power dimensions, above the cap "
                f"max_dims={max_dims}"
            ),
            error_code="ORACLE_REFUSAL",
            details={"dims": str(dims), "max_dims": str(max_dims)},
        )


class ConfigError(SecrecyRegionError):
    """Malformed run configuration.

    Raised while parsing a config file; the dotted field path points at the
    offending entry (e.g. ``channel.subchannels[1].nu_sq``).
    """

    def __init__(self, message: str, field: str | None = None):
        """Initialize config error.

        Args:
            message: Human-readable error message
            field: Dotted path of the offending field

        """
        details: dict[str, str] = {}
        if field:
            details["field"] = field
        super().__init__(
            message=message,
            error_code="CONFIG_ERROR",
            details=details,
        )
        self.field = field


class SolverError(SecrecyRegionError):
    """A solver error annotated with the boundary point it came from."""

    def __init__(self, cause: SecrecyRegionError, ratio: float):
        """Wrap a solver error.

        Args:
            cause: The original error (its code is kept)
            ratio: The gamma1/gamma0 ratio being solved

        """
        details = dict(cause.details)
        details["ratio"] = repr(ratio)
        super().__init__(
            message=f"{cause.message} (at gamma ratio {ratio!r})",
            error_code=cause.error_code,
            details=details,
        )
        self.cause = cause
        self.ratio = ratio


class VerificationGapError(SecrecyRegionError):
    """Allocator objective fell short of the oracle by more than the tolerance."""

    def __init__(self, failed: int, total: int, worst_gap: float, tolerance: float):
        """Initialize verification gap error.

        Args:
            failed: Number of failing instances
            total: Number of instances checked
            worst_gap: Largest oracle-minus-allocator gap in bits
            tolerance: Configured tolerance in bits

        """
        super().__init__(
            message=(
                f"{failed}/{total} instances exceed the gap tolerance "
                f"{tolerance:g} bits (worst {worst_gap:.3e})"
            ),
            error_code="VERIFICATION_GAP",
            details={
                "failed": str(failed),
                "total": str(total),
                "worst_gap": repr(worst_gap),
                "tolerance": repr(tolerance),
            },
        )


# Exit codes of the CLI, keyed by error code
EXIT_CODES = {
    "CONFIG_ERROR": 1,
    "VALIDATION_ERROR": 1,
    "SHAPE_ERROR": 1,
    "CONVERGENCE_ERROR": 2,
    "NO_ROOT_ERROR": 2,
    "ORACLE_REFUSAL": 2,
    "VERIFICATION_GAP": 3,
}


def exit_code_for(error: Exception) -> int:
    """Map an error to the CLI exit code.

    Args:
        error: The exception that ended the run

    Returns:
        1 for configuration problems, 2 for solver failures, 3 for a failed
        verification gate

    """
    if isinstance(error, SecrecyRegionError):
        return EXIT_CODES.get(error.error_code, 2)
    return 2


def format_error_response(error: Exception) -> str:
    """Format an error as JSON.

    Args:
        error: The exception to format

    Returns:
        JSON string with error details

    """
    if isinstance(error, SecrecyRegionError):
        return json.dumps(error.to_dict(), indent=2)

    # For foreign exceptions, create a generic error response
    return json.dumps(
        {
            "error": "INTERNAL_ERROR",
            "message": str(error),
            "details": {"type": error.__class__.__name__},
        },
        indent=2,
    )
