"""Numerical tolerances shared by the package.

Defaults can be overridden at runtime with :func:`set_tolerances`, which the
CLI calls when a config file or ``--tol-*`` flag is given.
"""
from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Tolerances:
    algebra: float = 1e-12      # exact algebraic identities
    exponential: float = 1e-10  # matrix exponentials / unitarity
    unit_norm: float = 1e-9     # |d| == 1 check on unit directions
    positivity: float = 1e-12   # entry counts as non-negative if >= -positivity
    physical: float = 1e-10     # min eigenvalue of a physical density matrix


_current = Tolerances()


def get_tolerances() -> Tolerances:
    return _current


def set_tolerances(**overrides) -> Tolerances:
    """Replace selected tolerances; returns the new set."""
    global _current
    _current = replace(_current, **overrides)
    return _current


def reset_tolerances() -> Tolerances:
    global _current
    _current = Tolerances()
    return _current
