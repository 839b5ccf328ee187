"""Exception types shared across the mfmd package.

The CLI maps these onto process exit codes: configuration problems exit
with 1, numerical failures with 2, and domain/validation failures with 3.
"""


class MfmdError(Exception):
    """Base class for all mfmd errors."""


class ConfigError(MfmdError):
    """Invalid configuration file, flag value, or flag combination."""


class SingularGradient(MfmdError):
    """Eigenvalue gradient requested at a conical intersection (delta = 0, x = 0)."""


class DomainTooSmall(MfmdError):
    """Gibbs weight has not decayed below tolerance at the quadrature boundary."""


class GridMismatch(MfmdError):
    """Two series/profiles that must share a grid were built on different grids."""


class TooFewSamples(MfmdError):
    """Not enough samples for the requested fit."""


class HorizonExceedsSeries(MfmdError):
    """Requested integration horizon extends past the sampled series."""


class NonConvergence(MfmdError):
    """The symmetric eigensolver failed to converge."""


class ImaginaryResidueTooLarge(MfmdError):
    """Trace formula produced an imaginary part above tolerance (broken symmetrization)."""
