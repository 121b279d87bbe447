"""
Particle configurations and the simulation clock.
"""
from dataclasses import dataclass

import numpy as np

from core import constants
from core.exceptions import ConservationError, DomainError, InvalidSizeError


class Configuration:
    """
    Occupation numbers indexed by flat vertex (2 * site + (row == -1)).
    ``total`` is kept in step with the array by every mutating method.
    """
    __slots__ = ('occupancy', 'total')

    def __init__(self, occupancy):
        occupancy = np.array(occupancy, dtype=np.int64)
        if occupancy.ndim != 1 or len(occupancy) % 2:
            raise InvalidSizeError('Occupancy must be a flat array over both rows of every site')
        if np.any(occupancy < 0):
            raise DomainError('Occupation numbers must be nonnegative')
        self.occupancy = occupancy
        self.total = int(occupancy.sum())

    @classmethod
    def empty(cls, n_sites):
        return cls(np.zeros(2 * n_sites, dtype=np.int64))

    @property
    def n_vertices(self):
        return len(self.occupancy)

    @property
    def n_sites(self):
        return len(self.occupancy) // 2

    def __len__(self):
        return len(self.occupancy)

    def __eq__(self, other):
        return isinstance(other, Configuration) and np.array_equal(self.occupancy, other.occupancy)

    def __repr__(self):
        return f"Configuration(n_sites={self.n_sites}, total={self.total})"

    def copy(self):
        return Configuration(self.occupancy.copy())

    def move(self, source, target):
        """Move one particle along an edge."""
        self.occupancy[source] -= 1
        self.occupancy[target] += 1

    def site_totals(self):
        """omega_{j,1} + omega_{j,-1} for every site j."""
        return self.occupancy.reshape(-1, 2).sum(axis=1)

    def shifted(self, s):
        """Configuration seen from site s: new site j holds old site j + s."""
        return Configuration(np.roll(self.occupancy, -2 * s))

    def check_total(self, expected=None):
        actual = int(self.occupancy.sum())
        expected = self.total if expected is None else expected
        if actual != expected:
            raise ConservationError(constants.PARTICLES_NOT_CONSERVED.format(before=expected, after=actual))
        return actual

    def require_size(self, env):
        if self.n_vertices != env.vertex_count:
            raise InvalidSizeError(
                constants.CONFIGURATION_SIZE_MISMATCH.format(got=self.n_vertices, expected=env.vertex_count)
            )
        return self


@dataclass
class SimClock:
    """
    Microscopic time in generator units. Macroscopic time is derived as
    micro_time / N^2 (diffusive scaling), never stored.
    """
    n: int
    micro_time: float = 0.0
    event_count: int = 0

    @property
    def macro_time(self):
        return self.micro_time / self.n ** 2

    def micro_horizon(self, t_macro):
        return t_macro * self.n ** 2
