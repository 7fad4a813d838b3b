"""Bounded solution of the scalar affine equation ``x' = -delta x + f(t)``.

The bounded solution is the exponential convolution
``x(t) = int_{-inf}^t e^{-delta (t - s)} f(s) ds``, truncated here to the
memory ``[t - memory_t, t]``.  Per grid cell the weighted integral is
computed by an adaptive composite trapezoid rule, and the cells are
chained with the exact exponential recursion, so that forcings with sharp
features (such as the derivative of the Levitan function near the deep
minima of ``2 + cos t + cos(sqrt(2) t)``) are resolved without refining the
output grid.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np
from scipy.signal import lfilter

from .errors import NonFinite
from .functions import FunctionSpec
from .grid import GridWindow, SampledPath


def cell_integrals(
    f: Callable[[np.ndarray], np.ndarray],
    starts: np.ndarray,
    width: float,
    delta: float,
    *,
    tol: float = 1e-7,
    max_level: int = 14,
) -> np.ndarray:
    """``int_a^{a+w} e^{-delta (a + w - s)} f(s) ds`` for every start ``a``.

    Each cell is refined by doubling its number of trapezoid panels until
    two consecutive refinements change the value by at most ``tol * width``;
    cells that never settle stop at ``2**max_level`` panels.  Work is
    vectorised over the cells still being refined.

    Parameters
    ----------
    f : callable
        Vectorised integrand.
    starts : ndarray
        Left ends of the cells.
    width : float
        Common cell width.
    delta : float
        Decay rate of the exponential weight.
    tol : float
        Per-unit-length tolerance on successive refinements.
    max_level : int
        Maximal number of doublings.
    """
    starts = np.asarray(starts, dtype=float)

    def trap(a, n):
        s = a[:, None] + width * np.arange(n + 1)[None, :] / n
        v = np.exp(-delta * (a[:, None] + width - s)) * f(s)
        return width / n * (v.sum(axis=1) - 0.5 * (v[:, 0] + v[:, -1]))

    def refine(a, prev, n):
        # nested trapezoid: T(2n) = T(n)/2 + (w/2n) * sum of the new midpoints
        s = a[:, None] + width * (2 * np.arange(n)[None, :] + 1) / (2 * n)
        v = np.exp(-delta * (a[:, None] + width - s)) * f(s)
        return 0.5 * prev + width / (2 * n) * v.sum(axis=1)

    result = np.empty(len(starts))
    active = np.arange(len(starts))
    current = trap(starts, 1)
    settled_before = np.zeros(len(starts), dtype=bool)
    n = 1
    while active.size:
        new = refine(starts[active], current, n)
        n *= 2
        settled = np.abs(new - current) <= tol * width
        done = settled & settled_before
        result[active[done]] = new[done]
        if n >= 2**max_level:
            result[active[~done]] = new[~done]
            break
        keep = ~done
        active, current, settled_before = active[keep], new[keep], settled[keep]
    return result


def exponential_convolution(
    cells: np.ndarray, decay: float, dt: float, memory_steps: int
) -> np.ndarray:
    """Chain per-cell integrals into ``x_k = sum_{j>k-L} a^{k-j} c_j``.

    ``cells[j-1]`` is the weighted integral over ``[t_{j-1}, t_j]`` and
    ``a = e^{-decay dt}``; ``x_0 = 0``.  Works along axis 0 and broadcasts
    over trailing axes.
    """
    a = math.exp(-decay * dt)
    u = np.concatenate([np.zeros((1,) + cells.shape[1:]), cells], axis=0)
    run = lfilter([1.0], [1.0, -a], u, axis=0)
    L = memory_steps
    if 0 < L < len(run):
        run[L:] = run[L:] - a**L * run[:-L]
    return run


def default_memory(delta: float, bound: float, tol: float) -> float:
    """Memory ``T`` with ``e^{-delta T} bound / delta <= tol``."""
    if bound <= 0:
        return 1.0 / delta
    return max(1.0 / delta, math.log(bound / (delta * tol)) / delta)


def deterministic_mild_solve(
    delta: float,
    forcing: FunctionSpec | Callable,
    window: GridWindow,
    memory_t: float | None = None,
    *,
    tol: float = 1e-7,
    forcing_bound: float = 1.0,
) -> SampledPath:
    """Bounded solution of ``x' = -delta x + forcing(t)`` on ``window``.

    ``x(t) = int_{t - memory_t}^t e^{-delta (t - s)} forcing(s) ds``; the
    neglected tail is at most ``e^{-delta memory_t} sup|forcing| / delta``.
    When ``memory_t`` is omitted it is chosen so that this tail is below
    ``tol`` for ``sup|forcing| <= forcing_bound``.

    Raises
    ------
    NonFinite
        If the forcing overflows on ``[t0 - memory_t, t1]``.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    if memory_t is None:
        memory_t = default_memory(delta, forcing_bound, tol)
    ext = window.extended(memory_t)
    pre = ext.n - window.n
    L = int(round(memory_t / window.dt))
    nodes = ext.times
    cells = cell_integrals(forcing, nodes[:-1], window.dt, delta, tol=tol)
    x = exponential_convolution(cells, delta, window.dt, L)[pre:]
    if not np.all(np.isfinite(x)):
        raise NonFinite("mild solution overflowed")
    return SampledPath(window, x)
