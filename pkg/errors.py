# ==============================================================================
# FILE: errors.py
# ROLE: The Rulebook of Failures
# DESCRIPTION:
# Every error the analysis modules can raise lives here. Each family carries
# the process exit code the CLI should use:
#   2 = usage error (bad parameter, bad config, missing stage)
#   3 = data error (too little data, degenerate samples, bad input file)
#   4 = numerical error (quadrature, generator, rejected fits)
# Library code only raises. main.py is the single place that turns these into
# exit codes and a structured diagnostic.
# ==============================================================================

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERICAL = 4


class ScaleKitError(Exception):
    """Base class. `stage` is filled in by the pipeline when the error escapes a stage."""
    exit_code = EXIT_DATA

    def __init__(self, message, stage=None):
        super().__init__(message)
        self.message = message
        self.stage = stage

    def as_diagnostic(self):
        return {
            "stage": self.stage or "unknown",
            "error": type(self).__name__,
            "message": self.message,
        }


# --- Usage Errors (exit 2) ---
class DomainError(ScaleKitError):
    """A parameter is outside its valid interval."""
    exit_code = EXIT_USAGE


class ConfigError(ScaleKitError):
    exit_code = EXIT_USAGE


class NotComputedError(ScaleKitError):
    """An export asked for a stage the document does not contain."""
    exit_code = EXIT_USAGE


# --- Data Errors (exit 3) ---
class InsufficientDataError(ScaleKitError):
    exit_code = EXIT_DATA


class DegenerateDistributionError(ScaleKitError):
    """Zero variance where a spread is required."""
    exit_code = EXIT_DATA


class DegenerateSegmentError(ScaleKitError):
    exit_code = EXIT_DATA

    def __init__(self, message, segment=None, stage=None):
        super().__init__(message, stage)
        self.segment = segment


class FitRangeError(ScaleKitError):
    """Fewer than three points fall inside a fit range."""
    exit_code = EXIT_DATA


class NoOverlapError(ScaleKitError):
    exit_code = EXIT_DATA


class IngestError(ScaleKitError):
    exit_code = EXIT_DATA

    def __init__(self, message, line=None, stage=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message, stage)
        self.line = line


# --- Numerical Errors (exit 4) ---
class NumericalError(ScaleKitError):
    exit_code = EXIT_NUMERICAL


class QuadratureError(NumericalError):
    def __init__(self, message, achieved_tolerance=None, stage=None):
        super().__init__(message, stage)
        self.achieved_tolerance = achieved_tolerance


class GeneratorError(NumericalError):
    pass


class StabilityViolationError(NumericalError):
    """A fitted stability index fell outside (0, 2]."""

    def __init__(self, message, raw_slope=None, mu_hat=None, stage=None):
        super().__init__(message, stage)
        self.raw_slope = raw_slope
        self.mu_hat = mu_hat


class NonDecayingPeakError(NumericalError):
    def __init__(self, message, raw_slope=None, stage=None):
        super().__init__(message, stage)
        self.raw_slope = raw_slope


class ComputationError(NumericalError):
    """A numpy/scipy failure with no more specific meaning."""


# --- Foreign exceptions ---
class StorageError(ScaleKitError):
    """Reading or writing a file failed at the operating-system level."""
    exit_code = EXIT_DATA


def from_foreign(exc, stage=None):
    """Wraps an exception raised outside this package so it gets an exit code and a stage."""
    if isinstance(exc, ScaleKitError):
        if exc.stage is None:
            exc.stage = stage
        return exc
    message = f"{type(exc).__name__}: {exc}"
    if isinstance(exc, OSError):
        return StorageError(message, stage=stage)
    return ComputationError(message, stage=stage)
