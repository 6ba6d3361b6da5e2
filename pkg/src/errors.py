"""
Error Types
===========

Exception hierarchy for the citation metrics engine. Every error carries the
process exit code the CLI reports for it.
"""

from typing import Optional


class CitationMetricsError(Exception):
    """Base class for all engine errors."""

    exit_code: int = 1


class ConfigurationError(CitationMetricsError):
    """Invalid run configuration (all problems are listed together)."""

    exit_code = 2

    def __init__(self, problems: list[str]):
        self.problems = problems
        super().__init__("; ".join(problems))


class ParameterError(CitationMetricsError):
    """A numerical parameter is outside its allowed range."""

    exit_code = 2


class IngestError(CitationMetricsError):
    """Fatal ingest problem (strict mode)."""

    exit_code = 3

    def __init__(self, message: str, line_number: Optional[int] = None, reason: str = "malformed"):
        self.line_number = line_number
        self.reason = reason
        prefix = f"line {line_number}: " if line_number is not None else ""
        super().__init__(f"{prefix}{message}")


class DateResolutionError(CitationMetricsError):
    """No usable date among the candidate date fields."""

    exit_code = 3


class DataInconsistencyError(CitationMetricsError):
    """Dataset content violates an assumption of a metric."""

    exit_code = 4

    def __init__(self, message: str, paper_id: Optional[int] = None):
        self.paper_id = paper_id
        super().__init__(message)


class ConvergenceError(CitationMetricsError):
    """Power iteration did not reach the requested tolerance."""

    exit_code = 5

    def __init__(self, iterations: int, residual: float):
        self.iterations = iterations
        self.residual = residual
        super().__init__(
            f"power iteration failed to converge in {iterations} iterations "
            f"(residual {residual:.3e})"
        )


class UndefinedMetricError(CitationMetricsError):
    """The metric is undefined for the given input."""

    exit_code = 6


class GraphCacheError(CitationMetricsError):
    """Graph cache file is unreadable or stale."""

    exit_code = 7
