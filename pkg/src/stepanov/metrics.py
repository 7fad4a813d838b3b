"""Uniform, Stepanov and Stepanov-in-measure distances on sampled paths,
Bochner slices, almost-period scanning and the small-set mass defect."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    EmptyComparisonWindow,
    GridMismatch,
    OutOfRange,
    WindowTooShort,
)
from .functions import FunctionSpec
from .grid import GridWindow, SampledPath, trapezoid_cumulative


@dataclass(frozen=True)
class MetricKind:
    """One of ``uniform``, ``stepanov`` (order ``p``) or ``smeasure``.

    ``smeasure`` is the Stepanov-1 distance computed with the capped
    pointwise metric ``min(|f - g|, 1)``.
    """

    name: str
    p: float = 1.0
    window_len: float = 1.0

    def __post_init__(self):
        if self.name not in ("uniform", "stepanov", "smeasure"):
            raise ValueError(f"unknown metric {self.name!r}")
        if self.p < 1:
            raise ValueError("p must be >= 1")
        if not self.window_len > 0:
            raise ValueError("window length must be positive")
        if self.name == "smeasure" and self.p != 1.0:
            raise ValueError("smeasure is a Stepanov-1 distance")

    @classmethod
    def uniform(cls) -> "MetricKind":
        return cls("uniform")

    @classmethod
    def stepanov(cls, p: float = 1.0, window_len: float = 1.0) -> "MetricKind":
        return cls("stepanov", float(p), float(window_len))

    @classmethod
    def smeasure(cls, window_len: float = 1.0) -> "MetricKind":
        return cls("smeasure", 1.0, float(window_len))

    @classmethod
    def parse(cls, text: str) -> "MetricKind":
        """Parse the CLI form ``uniform | sp:<p> | smeasure``."""
        text = text.strip().lower()
        if text == "uniform":
            return cls.uniform()
        if text == "smeasure":
            return cls.smeasure()
        if text.startswith("sp:"):
            return cls.stepanov(float(text[3:]))
        raise ValueError(f"cannot parse metric {text!r}")

    @property
    def label(self) -> str:
        if self.name == "stepanov":
            return f"sp:{self.p:g}"
        return self.name


def _pointwise_gap(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    d = a - b
    if d.ndim == 2 and d.shape[1] > 1:
        return np.linalg.norm(d, axis=1)
    return np.abs(d.reshape(len(d)))


def _window_nodes(window_len: float, dt: float) -> int:
    return max(1, int(round(window_len / dt)))


def gap_distance(gap: np.ndarray, dt: float, metric: MetricKind) -> float:
    """Distance from the nodewise gap ``|f(t_k) - g(t_k)|``."""
    if metric.name == "uniform":
        return float(np.max(gap))
    L = _window_nodes(metric.window_len, dt)
    if L > len(gap) - 1:
        raise WindowTooShort(
            f"comparison window of {len(gap)} nodes is shorter than the "
            f"Stepanov window ({L} steps)"
        )
    if metric.name == "smeasure":
        integrand = np.minimum(gap, 1.0)
    else:
        integrand = gap**metric.p
    c = trapezoid_cumulative(integrand, dt)
    best = float(np.max(c[L:] - c[:-L]))
    return max(best, 0.0) ** (1.0 / metric.p)


def distance(f: SampledPath, g: SampledPath, metric: MetricKind) -> float:
    """Uniform / Stepanov / Stepanov-in-measure distance of two paths.

    The supremum over window starts runs over grid nodes ``xi`` with
    ``xi + window_len`` inside the sampled window; integrals are composite
    trapezoid rules and are not normalised by ``window_len``.
    """
    if not f.window.same_as(g.window):
        raise GridMismatch("paths must share the grid")
    if f.dim != g.dim:
        raise GridMismatch("paths must share the state dimension")
    return gap_distance(_pointwise_gap(f.values, g.values), f.window.dt, metric)


def bochner_slice(f: SampledPath, t: float, window_len: float = 1.0) -> SampledPath:
    """Restriction ``s -> f(t + s)`` for ``s`` in ``[0, window_len]``."""
    w = f.window
    k = w.index_of(t)
    L = _window_nodes(window_len, w.dt)
    if k + L > w.n - 1:
        raise OutOfRange(f"[{t}, {t + window_len}] leaves the sampled window")
    return SampledPath(GridWindow(0.0, L * w.dt, w.dt), f.values[k : k + L + 1])


def lp_slice_distance(a: SampledPath, b: SampledPath, p: float) -> float:
    """Trapezoid ``L^p`` distance of two slices on a shared grid."""
    gap = _pointwise_gap(a.values, b.values) ** p
    return float(trapezoid_cumulative(gap, a.window.dt)[-1]) ** (1.0 / p)


# ----------------------------------------------------------- almost periods


@dataclass(frozen=True)
class AlmostPeriodSet:
    """Result of an epsilon-almost-period scan.

    ``taus``, ``distances`` and ``overlaps`` cover every scanned shift;
    ``periods`` are the accepted ones.  ``max_gap`` is the inclusion length
    on the scan range (``inf`` when nothing is accepted).
    """

    metric: MetricKind
    epsilon: float
    scan_range: tuple[float, float]
    step_tau: float
    periods: tuple[float, ...]
    max_gap: float
    taus: np.ndarray = field(repr=False)
    distances: np.ndarray = field(repr=False)
    overlaps: np.ndarray = field(repr=False)

    @property
    def accepted(self) -> np.ndarray:
        return self.distances <= self.epsilon

    def __len__(self) -> int:
        return len(self.periods)


def max_gap(periods, scan_range: tuple[float, float], step_tau: float = 0.0) -> float:
    """Inclusion length of ``periods`` on ``scan_range``.

    Gaps between consecutive accepted shifts and from the range ends are
    compared; the result is never below the scan resolution ``step_tau``.
    Empty input gives ``inf``.
    """
    if isinstance(periods, AlmostPeriodSet):
        return periods.max_gap
    p = np.sort(np.asarray(periods, dtype=float))
    if p.size == 0:
        return math.inf
    lo, hi = scan_range
    gaps = np.concatenate([[p[0] - lo], np.diff(p), [hi - p[-1]]])
    return float(max(np.max(gaps), step_tau))


def _tau_grid(tau_range, step_tau):
    lo, hi = tau_range
    if not step_tau > 0 or hi < lo:
        raise ValueError("need step_tau > 0 and tau_max >= tau_min")
    k0 = math.ceil(lo / step_tau - 1e-9)
    k1 = math.floor(hi / step_tau + 1e-9)
    ks = np.arange(k0, k1 + 1)
    # tau = 0 is trivially an almost period
    ks = ks[ks != 0]
    return ks * step_tau


def scan_almost_periods(
    f: SampledPath | FunctionSpec,
    epsilon: float,
    metric: MetricKind,
    tau_range: tuple[float, float],
    step_tau: float,
    *,
    window: GridWindow | None = None,
) -> AlmostPeriodSet:
    """Scan ``tau = k * step_tau`` in ``tau_range`` for epsilon-almost periods.

    For a sampled path the shifted copy is read off the grid when ``tau`` is
    a node multiple and linearly interpolated otherwise; the comparison runs
    over the nodes ``t`` with ``t + tau`` inside the sampled window, so the
    window shrinks with ``|tau|`` (reported in ``overlaps``).  A
    ``FunctionSpec`` is evaluated exactly at ``t + tau`` over all of
    ``window``.
    """
    taus = _tau_grid(tau_range, step_tau)
    if isinstance(f, FunctionSpec):
        if window is None:
            raise ValueError("a FunctionSpec needs an evaluation window")
        t = window.times
        dt = window.dt
        ratio = step_tau / dt
        if taus.size and abs(ratio - round(ratio)) < 1e-9 * max(1.0, ratio):
            # node-multiple shifts: evaluate once on the union of shifted grids
            k_lo = min(0, int(round(taus[0] / dt)))
            k_hi = max(0, int(round(taus[-1] / dt)))
            ext = window.t0 + dt * np.arange(k_lo, window.n + k_hi)
            vals_ext = np.asarray(f(ext), dtype=float).reshape(len(ext))
            n = window.n
            base = vals_ext[-k_lo : -k_lo + n]

            def shifted(tau):
                k = int(round(tau / dt)) - k_lo
                return vals_ext[k : k + n], base

        else:
            base = np.asarray(f(t), dtype=float).reshape(len(t))

            def shifted(tau):
                return np.asarray(f(t + tau), dtype=float).reshape(len(t)), base

    else:
        w = f.window
        t, dt = w.times, w.dt
        vals = f.values

        def shifted(tau):
            k = tau / dt
            ki = int(round(k))
            if abs(k - ki) < 1e-6:
                if ki >= 0:
                    return vals[ki:], vals[: w.n - ki]
                return vals[: w.n + ki], vals[-ki:]
            keep = (t + tau >= t[0]) & (t + tau <= t[-1])
            cols = [np.interp(t[keep] + tau, t, vals[:, j]) for j in range(f.dim)]
            return np.stack(cols, axis=1), vals[keep]

    need = 1 if metric.name == "uniform" else _window_nodes(metric.window_len, dt) + 1
    if taus.size:
        a, _ = shifted(taus[np.argmax(np.abs(taus))])
        if len(a) < need:
            raise EmptyComparisonWindow(
                f"|tau| up to {np.max(np.abs(taus))} leaves {len(a)} comparison nodes"
            )
    dists = np.empty(taus.size)
    overlaps = np.empty(taus.size)
    for i, tau in enumerate(taus):
        a, b = shifted(tau)
        dists[i] = gap_distance(_pointwise_gap(a, b), dt, metric)
        overlaps[i] = (len(a) - 1) * dt
    periods = tuple(float(x) for x in taus[dists <= epsilon])
    return AlmostPeriodSet(
        metric=metric,
        epsilon=float(epsilon),
        scan_range=(float(tau_range[0]), float(tau_range[1])),
        step_tau=float(step_tau),
        periods=periods,
        max_gap=max_gap(periods, tau_range, step_tau),
        taus=taus,
        distances=dists,
        overlaps=overlaps,
    )


# ------------------------------------------------------------ small-set mass


def mp_prime_defect(
    f: SampledPath,
    p: float,
    delta_mass: float,
    *,
    window_len: float = 1.0,
    xi_step: float | None = None,
) -> float:
    """Largest ``int_T |f|^p`` over sets ``T`` of measure ``delta_mass`` inside
    a window ``[xi, xi + window_len]``.

    Each node carries mass ``dt``; per window the contributions
    ``|f(t_k)|^p dt`` are taken in decreasing order until the accumulated
    mass reaches ``delta_mass`` (the last node counted fractionally).
    Window starts run over multiples of ``xi_step`` (default
    ``window_len / 100``), which under-approximates the supremum over all
    real ``xi`` by at most the mass entering one step.
    """
    if not 0 < delta_mass <= window_len:
        raise ValueError("need 0 < delta_mass <= window_len")
    w = f.window
    dt = w.dt
    L = _window_nodes(window_len, dt)
    if L > w.n - 1:
        raise WindowTooShort("path is shorter than one window")
    contrib = f.norms() ** p * dt
    m_float = delta_mass / dt
    m_full = int(math.floor(m_float + 1e-9))
    frac = max(0.0, m_float - m_full)
    take = m_full + (1 if frac > 1e-12 else 0)

    step = _window_nodes(xi_step if xi_step is not None else window_len / 100, dt)
    step = min(step, L)
    # blocks of `step` nodes; keep only each block's `take` largest entries
    n_blocks = int(math.ceil(w.n / step))
    padded = np.zeros(n_blocks * step)
    padded[: w.n] = contrib
    blocks = padded.reshape(n_blocks, step)
    if take < step:
        blocks = -np.partition(-blocks, take - 1, axis=1)[:, :take]
    best = 0.0
    for b0 in range(0, n_blocks):
        # window [b0*step, b0*step + L] must lie inside the path
        if b0 * step + L > w.n - 1:
            break
        last = (b0 * step + L) // step
        cand = blocks[b0 : last + 1].ravel()
        if (last + 1) * step - 1 > b0 * step + L:
            # trim nodes of the last block beyond the window
            lo = last * step
            tail = contrib[lo : b0 * step + L + 1]
            cand = np.concatenate([blocks[b0:last].ravel(), tail])
        if cand.size > take:
            top = -np.partition(-cand, take - 1)[:take]
        else:
            top = cand
        top = np.sort(top)[::-1]
        val = float(np.sum(top[:m_full]))
        if frac > 1e-12 and top.size > m_full:
            val += frac * float(top[m_full])
        best = max(best, val)
    return best


@dataclass(frozen=True)
class OscillationWitness:
    """Two nodes ``t_a, t_b`` with ``|t_a - t_b| <= max_sep`` and their value gap."""

    t_a: float
    t_b: float
    gap: float


def oscillation_witness(
    f: FunctionSpec,
    t_range: tuple[float, float],
    max_sep: float,
    *,
    dt: float | None = None,
    chunk: int = 1_000_000,
) -> OscillationWitness:
    """Largest oscillation of ``f`` over windows of length ``max_sep``.

    ``f`` is evaluated on a grid of spacing ``dt`` (default ``max_sep/20``)
    in overlapping chunks; within each chunk running maxima and minima over
    ``floor(max_sep/dt) + 1`` consecutive nodes locate the widest pair.  A
    large gap at a small separation witnesses the failure of uniform
    continuity; grid sampling can only under-estimate the true oscillation.
    """
    from scipy.ndimage import maximum_filter1d, minimum_filter1d

    t0, t1 = map(float, t_range)
    if not t1 > t0 or not max_sep > 0:
        raise ValueError("need t1 > t0 and max_sep > 0")
    dt = max_sep / 20 if dt is None else float(dt)
    w = int(math.floor(max_sep / dt * (1 + 1e-12))) + 1  # nodes per window
    n_total = int(math.floor((t1 - t0) / dt)) + 1
    best = OscillationWitness(t0, t0, 0.0)
    start = 0
    while start < n_total - 1:
        stop = min(n_total, start + chunk + w)
        t = t0 + dt * np.arange(start, stop)
        v = np.asarray(f(t), dtype=float)
        # window [i, i + w - 1] via forward-looking filters
        hi = maximum_filter1d(v, w, origin=-(w // 2), mode="nearest")
        lo = minimum_filter1d(v, w, origin=-(w // 2), mode="nearest")
        m = len(v) - w + 1
        if m > 0:
            spread = hi[:m] - lo[:m]
            i = int(np.argmax(spread))
            if spread[i] > best.gap:
                seg = v[i : i + w]
                a, b = i + int(np.argmax(seg)), i + int(np.argmin(seg))
                best = OscillationWitness(float(t[a]), float(t[b]), float(v[a] - v[b]))
        start += chunk
    return best
