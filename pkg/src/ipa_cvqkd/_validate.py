import math

from .errors import DomainError


def finite(name, value):
    value = float(value)
    if not math.isfinite(value):
        raise DomainError(f"{name} must be finite, got {value!r}")
    return value


def positive(name, value):
    value = finite(name, value)
    if value <= 0:
        raise DomainError(f"{name} must be > 0, got {value!r}")
    return value


def non_negative(name, value):
    value = finite(name, value)
    if value < 0:
        raise DomainError(f"{name} must be >= 0, got {value!r}")
    return value


def unit_interval(name, value, *, closed_top=True):
    """Check value in (0, 1] (or (0, 1) when ``closed_top`` is False)."""
    value = finite(name, value)
    if closed_top:
        if not 0 < value <= 1:
            raise DomainError(f"{name} must be in (0, 1], got {value!r}")
    elif not 0 < value < 1:
        raise DomainError(f"{name} must be in (0, 1), got {value!r}")
    return value
