"""
Event-driven simulation of the zero range process on a quenched ladder.

Every vertex has exactly two outgoing edges, so the total jump rate out of
vertex x is 2 g(omega_x) and an event is "pick x proportionally to that
rate, then one of its two targets uniformly". Time is diffusively scaled:
macroscopic time t is microscopic time t N^2.
"""
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import django
import numpy as np

from core import constants
from core.exceptions import InvalidParameterError
from environment.ladder import build_edges
from measures.jump_rates import get_jump_rate

from .configuration import SimClock
from .fenwick import FenwickTree

logger = logging.getLogger(__name__)

TREE_THRESHOLD = 1024
CHECK_INTERVAL = 10**6
_BATCH = 4096


def gillespie_step(config, edges, g, rng):
    """
    One event of the jump chain, in place on ``config``. Returns the waiting
    time and the fired edge ``(source, target)`` as flat vertex indices, or
    None when every vertex is empty (absorbing: no step is taken).
    """
    rate = get_jump_rate(g)
    vertex_rates = 2.0 * rate(config.occupancy)
    total = float(vertex_rates.sum())
    if total <= 0:
        return None
    dt = rng.exponential(1.0 / total)
    source = int(np.searchsorted(np.cumsum(vertex_rates), rng.random() * total, side='right'))
    source = min(source, len(vertex_rates) - 1)
    target = int(edges.out_adjacency[source, rng.integers(2)])
    config.move(source, target)
    return dt, (source, target)


class ZeroRangeSimulator:
    """
    The optimised engine behind ``simulate``. Works on its own copy of the
    configuration; ``config`` always reflects the state at ``clock``.

    Vertex rates live in a flat array with a running sum. Above
    TREE_THRESHOLD sites selection goes through a Fenwick tree, below it a
    cumulative-sum scan is cheaper.
    """

    def __init__(self, config, env, g, rng, reverse=False, edges=None, use_tree=None):
        config.require_size(env)
        self.env = env
        self.rate = get_jump_rate(g)
        self.edges = edges if edges is not None else build_edges(env, reverse=reverse)
        self.config = config.copy()
        self.rng = rng
        self.clock = SimClock(n=env.n)
        self.absorbed = False
        self._initial_total = self.config.total
        self._targets = self.edges.out_adjacency.tolist()
        # 2 g(k) for every reachable occupancy
        self._out_rate = (2.0 * self.rate.values(max(self.config.total, 1))).tolist()
        self._occupancy = self.config.occupancy.tolist()
        self._use_tree = env.n > TREE_THRESHOLD if use_tree is None else use_tree
        self._since_check = 0
        self._exp = self._uniform = None
        self._cursor = _BATCH
        self._rebuild()

    # ------------------------------------------------------------------
    # rate bookkeeping
    # ------------------------------------------------------------------

    def _rebuild(self):
        rates = np.array([self._out_rate[k] for k in self._occupancy])
        self._rates = rates
        self._total_rate = float(rates.sum())
        if self._use_tree:
            self._tree = FenwickTree.from_values(rates)
        logger.debug("rate sum rebuilt: %.6g after %d events", self._total_rate, self.clock.event_count)

    def _set_rate(self, vertex, value):
        self._total_rate += value - self._rates[vertex]
        self._rates[vertex] = value
        if self._use_tree:
            self._tree.set_value(vertex, value)

    @property
    def total_rate(self):
        return self._total_rate

    def _draws(self):
        if self._cursor == _BATCH:
            self._exp = self.rng.standard_exponential(_BATCH).tolist()
            self._uniform = self.rng.random(_BATCH).tolist()
            self._cursor = 0
        i = self._cursor
        self._cursor += 1
        return self._exp[i], self._uniform[i]

    def _select(self, u):
        """Vertex and target for a uniform u, reusing u's residual for the edge."""
        point = u * self._total_rate
        if self._use_tree:
            source = self._tree.find(point)
            below = self._tree.prefix_sum(source) - self._rates[source]
        else:
            cumulative = np.cumsum(self._rates)
            source = min(int(np.searchsorted(cumulative, point, side='right')), len(self._rates) - 1)
            below = cumulative[source] - self._rates[source]
        if self._rates[source] <= 0:
            # rounding landed on an empty vertex; take the last occupied one
            source = int(np.flatnonzero(self._rates > 0)[-1])
            return source, self._targets[source][1]
        side = (point - below) / self._rates[source] >= 0.5
        return source, self._targets[source][int(side)]

    # ------------------------------------------------------------------
    # stepping
    # ------------------------------------------------------------------

    def _fire(self, source, target):
        occ = self._occupancy
        occ[source] -= 1
        occ[target] += 1
        self._set_rate(source, self._out_rate[occ[source]])
        self._set_rate(target, self._out_rate[occ[target]])
        self.clock.event_count += 1
        self._since_check += 1
        if self._since_check >= CHECK_INTERVAL:
            self._since_check = 0
            self._sync()
            self.config.check_total(self._initial_total)
            self._rebuild()

    def _sync(self):
        self.config.occupancy[:] = self._occupancy

    def advance_to(self, micro_horizon):
        """
        Run events until the clock reaches ``micro_horizon``. A drawn waiting
        time overshooting the horizon is discarded (memoryless clocks).
        Returns False when the configuration is absorbing.
        """
        clock = self.clock
        while clock.micro_time < micro_horizon:
            if self._total_rate <= 1e-300 or self.absorbed:
                self.absorbed = True
                clock.micro_time = micro_horizon
                break
            e, u = self._draws()
            dt = e / self._total_rate
            if clock.micro_time + dt >= micro_horizon:
                clock.micro_time = micro_horizon
                break
            clock.micro_time += dt
            self._fire(*self._select(u))
        self._sync()
        return not self.absorbed

    def step(self):
        """A single event; returns (dt, (source, target)) or None when absorbing."""
        if self._total_rate <= 1e-300:
            self.absorbed = True
            return None
        e, u = self._draws()
        dt = e / self._total_rate
        self.clock.micro_time += dt
        edge = self._select(u)
        self._fire(*edge)
        self._sync()
        return dt, edge


# ============================================================================
# TRAJECTORIES
# ============================================================================

class SnapshotRecorder:
    """Observer keeping a copy of the configuration at every requested time."""

    def __init__(self):
        self.snapshots = {}

    def __call__(self, t_macro, config):
        self.snapshots[t_macro] = config.copy()
        return self.snapshots[t_macro]


@dataclass
class SimulationResult:
    config: object
    clock: SimClock
    absorbed: bool
    outputs: dict = field(default_factory=dict)

    @property
    def event_count(self):
        return self.clock.event_count


def simulate(config, env, g, t_macro, rng, snapshot_times=(), observers=None, reverse=False, use_tree=None):
    """
    Run the process for macroscopic time ``t_macro``.

    ``observers`` maps a name to a callable ``(t, config) -> value``; each
    is called once per requested snapshot time (times beyond ``t_macro``
    are dropped) and ``outputs[name][t]`` holds the value. An absorbing
    configuration stops the dynamics; later snapshots see the frozen state.
    """
    if t_macro < 0:
        raise InvalidParameterError(constants.NEGATIVE_HORIZON.format(t=t_macro))
    observers = dict(observers or {})
    if snapshot_times and 'snapshot' not in observers:
        observers['snapshot'] = SnapshotRecorder()
    times = sorted({float(t) for t in snapshot_times if 0 <= t <= t_macro})
    outputs = {name: {} for name in observers}

    sim = ZeroRangeSimulator(config, env, g, rng, reverse=reverse, use_tree=use_tree)
    for t in times:
        sim.advance_to(sim.clock.micro_horizon(t))
        for name, observer in observers.items():
            outputs[name][t] = observer(t, sim.config)
    sim.advance_to(sim.clock.micro_horizon(t_macro))
    sim.config.check_total(config.total)

    if sim.absorbed:
        logger.info("absorbing configuration reached before t=%s", t_macro)
    logger.debug("simulated n=%d to t=%s with %d events", env.n, t_macro, sim.clock.event_count)
    return SimulationResult(config=sim.config, clock=sim.clock, absorbed=sim.absorbed, outputs=outputs)


# ============================================================================
# REPLICAS
# ============================================================================

def replica_rng(master_seed, index):
    """The stream of replica ``index``; independent of the worker count."""
    return np.random.default_rng(np.random.SeedSequence([int(master_seed), int(index)]))


def _start_worker():
    # spawn and forkserver workers import the task module afresh
    if os.environ.get('DJANGO_SETTINGS_MODULE'):
        django.setup()


@dataclass(frozen=True)
class ReplicaCall:
    task: object
    master_seed: int

    def __call__(self, index):
        return self.task(index, replica_rng(self.master_seed, index))


def run_replicas(task, n_replicas, master_seed, workers=1):
    """
    Call ``task(index, rng)`` for every replica and return the results in
    replica order. With more than one worker the replicas go to a process
    pool, so ``task`` must be picklable (a module-level function or a
    task object, not a closure). Workers only change wall time, never the
    results.
    """
    if n_replicas < 1:
        raise InvalidParameterError(constants.REPLICAS_INVALID.format(replicas=n_replicas))

    call = ReplicaCall(task=task, master_seed=int(master_seed))
    workers = max(1, min(int(workers or 1), n_replicas))
    if workers == 1:
        results = [call(i) for i in range(n_replicas)]
    else:
        with ProcessPoolExecutor(max_workers=workers, initializer=_start_worker) as executor:
            results = list(executor.map(call, range(n_replicas)))
    logger.info("finished %d replicas on %d worker(s)", n_replicas, workers)
    return results
