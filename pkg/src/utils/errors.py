"""
Exception hierarchy for the data-assimilation toolkit.

Every error raised on purpose derives from ``HdaError`` so the CLI can map
families of failures onto exit codes.
"""


class HdaError(Exception):
    """Base class of all toolkit errors."""


class UsageError(HdaError):
    """Bad command-line usage (unknown method, missing reference, ...)."""


class ConfigError(HdaError):
    """Invalid experiment configuration; the message starts with the key path."""

    def __init__(self, path: str, message: str):
        self.path = path
        self.message = message
        super().__init__(f"{path}: {message}")


class ShapeMismatch(HdaError):
    """Two vectors that must align do not (length, channel tags or times)."""


class ZeroSigma(HdaError):
    """A noise standard deviation is zero for a channel present in the data."""


class IndexOutOfRange(HdaError):
    """An observation index falls outside the report-time range."""


class CellCapExceeded(HdaError):
    """Grid too large for dense covariance factorization."""


class EdgeMismatch(HdaError):
    """Two marginal densities are defined on different bin edges."""


class EmptySampleSet(HdaError):
    """No samples (or zero total weight) were supplied to a density estimator."""


class EmptyEnsemble(HdaError):
    """An ensemble statistic was requested for zero members."""


class InsufficientMembers(HdaError):
    """Fewer members than a statistic needs."""


class InsufficientDistinctPoints(HdaError):
    """Fewer distinct points than requested representatives."""


class BudgetExhausted(HdaError):
    """A sampler ran out of forward runs before reaching its stopping rule."""


class TruthMismatch(HdaError):
    """Run directories being compared were produced from different truth bundles."""


class NumericalError(HdaError):
    """
    Base class of numerical failures (exit code 4).

    Samplers that abort mid-run attach what they had completed:
    ``partial_state`` (last good ensemble), ``completed_steps``, ``n_runs``
    and ``mismatch``.
    """

    partial_state = None
    completed_steps = 0
    n_runs = 0
    mismatch = ()


class FactorizationFailure(NumericalError):
    """Covariance matrix is not positive definite even after jitter."""


class SolverDiverged(NumericalError):
    """Linear pressure solve missed its tolerance within the iteration cap."""


class CflViolation(NumericalError):
    """Tracer step exceeds the CFL limit while sub-stepping is disabled."""


class DegenerateKernel(NumericalError):
    """SMC-ABC perturbation kernel covariance is singular after jitter."""


class SingularInnovationMatrix(NumericalError):
    """ESMDA innovation matrix C_dd + alpha R could not be factorized."""


class DegenerateRange(NumericalError):
    """Pressure range is zero at a report time, so the relative error is undefined."""


class DivergenceOutOfBounds(NumericalError):
    """JS divergence fell outside [0, ln 2] by more than rounding."""
