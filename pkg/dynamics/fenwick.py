"""
Binary indexed tree over per-vertex jump rates.

Supports point updates and "smallest index whose prefix sum exceeds u"
in O(log n), which is what event selection needs once the ladder has
more than a few thousand vertices.
"""
import numpy as np


class FenwickTree:
    """
    Cumulative rate table over indices 0..size-1. Internally 1-based;
    ``values`` mirrors the individual rates so set_value is a single
    increment.
    """

    def __init__(self, size):
        if size <= 0:
            raise ValueError('FenwickTree needs at least one index')
        self.size = size
        self._tree = np.zeros(size + 1)
        self.values = np.zeros(size)
        # highest power of two not above size
        self._top = 1 << (size.bit_length() - 1)

    @classmethod
    def from_values(cls, values):
        """Build in O(n) from an array of rates."""
        values = np.asarray(values, dtype=float)
        tree = cls(len(values))
        tree.values[:] = values
        tree._tree[1:] = values
        for i in range(1, tree.size + 1):
            parent = i + (i & -i)
            if parent <= tree.size:
                tree._tree[parent] += tree._tree[i]
        return tree

    def increment(self, index, delta):
        self.values[index] += delta
        j = index + 1
        tree = self._tree
        while j <= self.size:
            tree[j] += delta
            j += j & -j

    def set_value(self, index, value):
        delta = value - self.values[index]
        if delta:
            self.increment(index, delta)

    def prefix_sum(self, index):
        """Sum of values[0..index]."""
        j = index + 1
        total = 0.0
        while j > 0:
            total += self._tree[j]
            j -= j & -j
        return total

    def total(self):
        return self.prefix_sum(self.size - 1)

    def find(self, u):
        """
        Smallest index i with prefix_sum(i) > u. For u in [0, total) this
        selects i with probability values[i] / total when u is uniform.
        """
        j = 0
        remaining = u
        half = self._top
        tree = self._tree
        while half > 0:
            k = j + half
            if k <= self.size and remaining >= tree[k]:
                j = k
                remaining -= tree[k]
            half >>= 1
        return min(j, self.size - 1)
