"""
Initial density profiles on the unit torus.

Two families are supported, written as short expressions on the command
line and in experiment files:

    const:c      rho0(x) = c
    sine:a,b     rho0(x) = a + b sin(2 pi x)
"""
from dataclasses import dataclass

import numpy as np

from core import constants
from core.exceptions import ConfigurationError


@dataclass(frozen=True)
class InitialProfile:
    kind: str
    mean: float
    amplitude: float = 0.0

    @classmethod
    def parse(cls, expr):
        if isinstance(expr, InitialProfile):
            return expr
        try:
            kind, _, args = str(expr).strip().partition(':')
            values = [float(v) for v in args.split(',')]
        except ValueError:
            raise ConfigurationError(constants.UNKNOWN_PROFILE.format(expr=expr)) from None
        if kind == 'const' and len(values) == 1:
            return cls(kind='const', mean=values[0])
        if kind == 'sine' and len(values) == 2:
            return cls(kind='sine', mean=values[0], amplitude=values[1])
        raise ConfigurationError(constants.UNKNOWN_PROFILE.format(expr=expr))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == 'const':
            return np.full_like(x, self.mean)
        return self.mean + self.amplitude * np.sin(2 * np.pi * x)

    def bounds(self):
        """(K1, K2) with K1 <= rho0 <= K2."""
        return self.mean - abs(self.amplitude), self.mean + abs(self.amplitude)

    def check_bounds(self, rho_max):
        k1, k2 = self.bounds()
        if not 0 < k1 <= k2 <= rho_max:
            raise ConfigurationError(
                constants.PROFILE_BOUNDS_INVALID.format(rho_max=rho_max, k1=k1, k2=k2)
            )
        return k1, k2

    def to_expr(self):
        if self.kind == 'const':
            return f'const:{self.mean!r}'
        return f'sine:{self.mean!r},{self.amplitude!r}'

    def __str__(self):
        return self.to_expr()
