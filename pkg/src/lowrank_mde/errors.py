"""Exception types shared across the package."""

from __future__ import annotations


class LowRankMdeError(Exception):
    """Base class for all package errors."""


class IllConditionedSamples(LowRankMdeError):
    """Sampled basis block is numerically singular.

    Carries an estimate of the condition number of the offending block.
    """

    def __init__(self, condition: float, detail: str = ""):
        self.condition = float(condition)
        msg = f"sampled block is ill-conditioned (cond ~ {condition:.3e})"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class DegenerateBasis(LowRankMdeError):
    """Greedy selection hit an exactly-zero residual column."""


class TooManySamples(LowRankMdeError):
    """Requested more sample indices than the dimension allows."""


class InvalidTruncation(LowRankMdeError):
    """Requested truncation rank is not strictly smaller than the current rank."""


class ZeroState(LowRankMdeError):
    """Operation undefined for an identically-zero factorization."""


class SingularCore(LowRankMdeError):
    """The sampled core block of an explicit CUR product is singular."""


class ModelBlowup(LowRankMdeError):
    """Non-finite values appeared during time integration."""

    def __init__(self, t: float, where: str = ""):
        self.t = float(t)
        self.where = where
        msg = f"non-finite values at t = {t:.6g}"
        if where:
            msg += f" ({where})"
        super().__init__(msg)


class BaselineSingular(LowRankMdeError):
    """A baseline integrator requires inverting a numerically singular matrix.

    This is the documented failure mode of the time-continuous factor
    evolutions when small singular values are present; it is recorded
    rather than silently ignored.
    """

    def __init__(self, condition: float, what: str):
        self.condition = float(condition)
        self.what = what
        super().__init__(f"{what} is singular to working precision (cond ~ {condition:.3e})")


class ZeroReference(LowRankMdeError):
    """Relative error against a zero reference matrix is undefined."""


class ConfigError(LowRankMdeError):
    """Experiment configuration failed validation."""
