"""Exception hierarchy shared by all modules."""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class SingularOperatingPointError(DomainError):
    """Baseline modulator output is (numerically) zero, so a gain ratio is undefined."""


class DegenerateRegressorError(DomainError):
    """Alice's quadratures carry no variance; the channel slope cannot be fitted."""


class ZeroTransmissivityError(DomainError):
    """The fitted slope is zero, so excess noise cannot be referred to the input."""


class BoundCollapseError(DomainError):
    """The worst-case slope t_hat - delta_t is not positive."""


class NonphysicalParameterError(DomainError):
    """Parameters produce a covariance matrix with no valid symplectic spectrum."""


class ConfigError(DomainError):
    """A sweep configuration document is malformed or fails validation."""
