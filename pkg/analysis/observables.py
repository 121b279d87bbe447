"""
Tile-level observables: window averages over tiles, the one-block
statistics and the environment constant C(l).

Windows run over the 2l+1 tiles centred at tile j, cyclically.
"""
import logging
from dataclasses import dataclass

import numpy as np

from environment.tiles import cyclic_window_sum
from measures.jump_rates import get_jump_rate

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TileAverages:
    """
    omega_hat[j]    particles in tile j
    omega_l[j]      particles per vertex over the window around j
    omega_bar_l[j]  particles per tile over the window
    g_l[j]          centre jump rates summed over both rows, divided by 4l+2
    """
    l: int
    omega_hat: np.ndarray
    omega_l: np.ndarray
    omega_bar_l: np.ndarray
    g_l: np.ndarray


def _centre_rates(config, decomp, rate):
    up, down = decomp.centre_vertex_indices()
    occupancy = config.occupancy
    return rate(occupancy[up]) + rate(occupancy[down])


def tile_averages(config, decomp, g, l):
    rate = get_jump_rate(g)
    omega_hat = np.bincount(decomp.tile_of, weights=config.occupancy, minlength=decomp.t_n)
    particles = cyclic_window_sum(omega_hat, l)
    return TileAverages(
        l=l,
        omega_hat=omega_hat,
        omega_l=particles / cyclic_window_sum(decomp.sizes, l),
        omega_bar_l=particles / (2 * l + 1),
        g_l=cyclic_window_sum(_centre_rates(config, decomp, rate), l) / (4 * l + 2),
    )


def one_block_statistic(config, decomp, table, l):
    """(1/T_N) sum_j |g_j^l - Phi(omega_j^l)|."""
    averages = tile_averages(config, decomp, table.rate, l)
    return float(np.mean(np.abs(averages.g_l - table.flux_of_rho(averages.omega_l))))


def section5_statistic(config, decomp, table, l):
    """
    (1/T_N) sum_j |g^l(omega_j) - 2 Phi(omega_j^l)| with g^l the window sum
    of both centre rates over 2l+1 tiles, i.e. twice g_j^l.
    """
    rate = table.rate
    g_window = cyclic_window_sum(_centre_rates(config, decomp, rate), l) / (2 * l + 1)
    omega_l = (
        cyclic_window_sum(np.bincount(decomp.tile_of, weights=config.occupancy, minlength=decomp.t_n), l)
        / cyclic_window_sum(decomp.sizes, l)
    )
    return float(np.mean(np.abs(g_window - 2.0 * table.flux_of_rho(omega_l))))


def c_of_l(decomp, l):
    """(1/T_N) sum_j |1/kappa_N - (4l+2) / (vertices in the window around j)|."""
    masses = cyclic_window_sum(decomp.sizes, l)
    value = float(np.mean(np.abs(1.0 / decomp.kappa_n - (4 * l + 2) / masses)))
    logger.debug("C(%d) = %.6g over %d tiles", l, value, decomp.t_n)
    return value
