"""Exception hierarchy shared by every module."""


class PerturbedTDError(Exception):
    """Base class for all package errors."""


class ShapeError(PerturbedTDError, ValueError):
    """Array dimensions do not agree."""


class ConvergenceError(PerturbedTDError):
    """An iterative solver hit its iteration cap (or the chain is periodic)."""


class ReducibilityError(PerturbedTDError):
    """The Markov chain is reducible, so some state would carry zero mass."""


class NumericError(PerturbedTDError, ArithmeticError):
    """A linear solve or eigenvalue computation failed or left a large residual."""


class RankError(NumericError):
    """A matrix that must be invertible is singular or badly conditioned."""


class CoverageError(PerturbedTDError, ValueError):
    """The behavior policy gives zero probability to an action the target uses."""


class ConfigError(PerturbedTDError, ValueError):
    """An experiment configuration could not be parsed or validated."""
