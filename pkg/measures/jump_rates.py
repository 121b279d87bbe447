"""
Jump-rate functions g: a vertex holding k particles emits one along each
outgoing edge at rate g(k).
"""
import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np

from core import constants
from core.exceptions import InvalidParameterError

logger = logging.getLogger(__name__)


def _const1(k):
    return np.where(np.asarray(k) >= 1, 1.0, 0.0)


def _linear(k):
    return np.asarray(k, dtype=float)


@dataclass(frozen=True)
class JumpRate:
    """
    ``func`` is vectorised over integer occupations. ``phi_star`` is the
    radius of convergence of Z; ``slg`` marks g(k)/k -> 0.
    """
    name: str
    func: Callable
    slg: bool
    phi_star: float

    def __call__(self, k):
        value = self.func(k)
        return float(value) if np.ndim(value) == 0 else value

    def values(self, k_max):
        """g(0), ..., g(k_max) as a float array."""
        return np.asarray(self.func(np.arange(k_max + 1)), dtype=float)

    def log_factorials(self, k_max):
        """log g(k)! = sum_{i<=k} log g(i) for k = 0..k_max, with g(0)! = 1."""
        with np.errstate(divide='ignore'):
            logs = np.log(self.values(k_max)[1:])
        return np.concatenate(([0.0], np.cumsum(logs)))

    def growth_ratio(self, k_from, k_to):
        """max g(k)/k over k in [k_from, k_to]; tends to 0 under the sublinear growth condition."""
        ks = np.arange(max(k_from, 1), k_to + 1)
        return float(np.max(self.func(ks) / ks))


def validate_jump_rate(rate, k_max=1000):
    """Check g(0) = 0 and that g is nondecreasing on [0, k_max]."""
    values = rate.values(k_max)
    if values[0] != 0.0 or np.any(np.diff(values) < 0) or np.any(values < 0):
        raise InvalidParameterError(constants.JUMP_RATE_INVALID.format(name=rate.name))
    logger.debug("jump rate %s checked on [0, %d]", rate.name, k_max)
    return rate


JUMP_RATES = {}


def register_jump_rate(rate):
    """Add a rate to the registry; rates that fail validation never get in."""
    JUMP_RATES[rate.name] = validate_jump_rate(rate)
    return rate


CONST1 = register_jump_rate(JumpRate(name='const1', func=_const1, slg=True, phi_star=1.0))
LINEAR = register_jump_rate(JumpRate(name='linear', func=_linear, slg=False, phi_star=float('inf')))


def get_jump_rate(name):
    if isinstance(name, JumpRate):
        return name
    try:
        return JUMP_RATES[name]
    except KeyError:
        raise InvalidParameterError(
            constants.UNKNOWN_JUMP_RATE.format(name=name, choices=sorted(JUMP_RATES))
        ) from None


