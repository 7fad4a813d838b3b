"""Empirical laws of ensembles: Wasserstein and bounded-Lipschitz distances,
uniform-integrability defect, and almost-periodicity-in-distribution tests.

Distances computed here between marginals at finitely many grid times only
lower-bound the corresponding path-space quantities; ``apd_test`` reports
marginal evidence, not a certificate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment, linprog
from scipy.spatial.distance import cdist

from .errors import (
    DimensionMismatch,
    EmptyOverlap,
    OffGrid,
    OutOfRange,
    TooManySamples,
    TooManySamplesForExact,
)
from .sde import Ensemble

MAX_EXACT_ASSIGNMENT = 512
MAX_DBL_POOLED = 2000


@dataclass(frozen=True)
class EmpiricalLaw:
    """``N >= 2`` finite state vectors observed at ``timestamp``."""

    samples: np.ndarray = field(repr=False)
    timestamp: float = float("nan")

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if s.ndim == 1:
            s = s[:, None]
        if s.ndim != 2 or s.shape[0] < 2:
            raise ValueError("an empirical law needs at least two samples")
        if not np.all(np.isfinite(s)):
            raise ValueError("samples must be finite")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @property
    def dim(self) -> int:
        return self.samples.shape[1]

    @property
    def size(self) -> int:
        return self.samples.shape[0]

    def shifted(self, c) -> "EmpiricalLaw":
        return EmpiricalLaw(self.samples + np.asarray(c, dtype=float), self.timestamp)

    def scaled(self, a: float) -> "EmpiricalLaw":
        return EmpiricalLaw(self.samples * a, self.timestamp)


@dataclass(frozen=True)
class LawDistanceReport:
    """``metric`` is ``wasserstein:<p>`` or ``bounded_lipschitz``; ``method``
    is ``quantile1d``, ``exact_assignment`` or ``dual_lp``."""

    metric: str
    value: float
    method: str


def law_at(ensemble: Ensemble, t: float) -> EmpiricalLaw:
    """Member states at grid time ``t``."""
    try:
        k = ensemble.window.index_of(t)
    except OutOfRange as exc:
        raise OffGrid(str(exc)) from None
    return EmpiricalLaw(ensemble.paths[:, k, :], float(ensemble.times[k]))


# ------------------------------------------------------------ Wasserstein


def _quantile_step_integral(xs: np.ndarray, ys: np.ndarray, p: float) -> float:
    """``int_0^1 |F^-1(u) - G^-1(u)|^p du`` for sorted samples of any sizes.

    Both empirical quantile functions are step functions, constant on
    ``[i/n, (i+1)/n)`` and ``[j/m, (j+1)/m)``; the integral is summed exactly
    over the merged breakpoints.
    """
    n, m = len(xs), len(ys)
    u = np.union1d(np.arange(n + 1) / n, np.arange(m + 1) / m)
    mid = 0.5 * (u[:-1] + u[1:])
    i = np.minimum((mid * n).astype(int), n - 1)
    j = np.minimum((mid * m).astype(int), m - 1)
    return float(np.sum(np.diff(u) * np.abs(xs[i] - ys[j]) ** p))


def wasserstein_sorted_1d(xs: np.ndarray, ys: np.ndarray, p: float) -> float:
    """``W_p`` of equal-size sorted 1-d samples (monotone coupling)."""
    return float(np.mean(np.abs(xs - ys) ** p) ** (1.0 / p))


def wasserstein(a: EmpiricalLaw, b: EmpiricalLaw, p: float = 2.0) -> LawDistanceReport:
    """Empirical ``W_p`` distance.

    In one dimension the monotone (quantile) coupling is optimal: order
    statistics are paired for equal sizes, and for unequal sizes the two
    step quantile functions are integrated exactly.  In higher dimension
    equal sizes ``N <= 512`` are required and the optimal assignment is
    computed exactly.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    if a.dim != b.dim:
        raise DimensionMismatch(f"laws of dimension {a.dim} and {b.dim}")
    label = f"wasserstein:{p:g}"
    if a.dim == 1:
        xs = np.sort(a.samples[:, 0])
        ys = np.sort(b.samples[:, 0])
        if len(xs) != len(ys):
            value = _quantile_step_integral(xs, ys, p) ** (1.0 / p)
            return LawDistanceReport(label, value, "quantile1d")
        return LawDistanceReport(label, wasserstein_sorted_1d(xs, ys, p), "quantile1d")
    return LawDistanceReport(label, wasserstein_assignment(a, b, p), "exact_assignment")


def wasserstein_assignment(a: EmpiricalLaw, b: EmpiricalLaw, p: float) -> float:
    """Exact ``W_p`` between equal-size empirical laws via optimal assignment."""
    if a.size != b.size:
        raise DimensionMismatch("exact assignment needs equal sample counts")
    if a.size > MAX_EXACT_ASSIGNMENT:
        raise TooManySamplesForExact(
            f"{a.size} samples exceed the exact-assignment cap {MAX_EXACT_ASSIGNMENT}"
        )
    cost = cdist(a.samples, b.samples) ** p
    r, c = linear_sum_assignment(cost)
    return float(np.mean(cost[r, c]) ** (1.0 / p))


# ------------------------------------------------------- bounded Lipschitz


def dbl(a: EmpiricalLaw, b: EmpiricalLaw) -> LawDistanceReport:
    """Bounded-Lipschitz distance by its exact dual linear program.

    Maximises ``mean_a phi - mean_b phi`` over values ``phi`` on the pooled
    points subject to ``|phi| <= 1`` and ``|phi(z_i) - phi(z_j)| <= |z_i - z_j|``.
    Any such ``phi`` extends to a bounded 1-Lipschitz function on the whole
    space, so the optimum is the distance itself.  In one dimension only
    neighbouring constraints on the sorted points are needed.
    """
    if a.dim != b.dim:
        raise DimensionMismatch(f"laws of dimension {a.dim} and {b.dim}")
    z = np.concatenate([a.samples, b.samples])
    n = len(z)
    if n > MAX_DBL_POOLED:
        raise TooManySamples(f"{n} pooled points exceed the LP cap {MAX_DBL_POOLED}")
    w = np.concatenate([np.full(a.size, 1.0 / a.size), np.full(b.size, -1.0 / b.size)])
    if a.dim == 1:
        order = np.argsort(z[:, 0], kind="stable")
        zs = z[order, 0]
        ws = w[order]
        # merge coincident points
        uniq, inv = np.unique(zs, return_inverse=True)
        wu = np.bincount(inv, weights=ws)
        m = len(uniq)
        gaps = np.diff(uniq)
        rows = np.arange(m - 1)
        A = np.zeros((2 * (m - 1), m))
        A[rows, rows + 1] = 1.0
        A[rows, rows] = -1.0
        A[m - 1 + rows, rows + 1] = -1.0
        A[m - 1 + rows, rows] = 1.0
        b_ub = np.concatenate([gaps, gaps])
        res = linprog(-wu, A_ub=A if m > 1 else None, b_ub=b_ub if m > 1 else None,
                      bounds=[(-1.0, 1.0)] * m, method="highs")
    else:
        D = cdist(z, z)
        i, j = np.triu_indices(n, 1)
        k = len(i)
        A = np.zeros((2 * k, n))
        r = np.arange(k)
        A[r, i] = 1.0
        A[r, j] = -1.0
        A[k + r, i] = -1.0
        A[k + r, j] = 1.0
        b_ub = np.concatenate([D[i, j], D[i, j]])
        res = linprog(-w, A_ub=A, b_ub=b_ub, bounds=[(-1.0, 1.0)] * n, method="highs")
    if not res.success:  # pragma: no cover - HiGHS solves these bounded LPs
        raise RuntimeError(f"bounded-Lipschitz LP failed: {res.message}")
    value = float(min(max(-res.fun, 0.0), 2.0))
    return LawDistanceReport("bounded_lipschitz", value, "dual_lp")


# ---------------------------------------------------- UI and APD tests


def ui_defect(ensemble: Ensemble, p: float, c: float) -> float:
    """``max_t mean(|X(t)|^p 1{|X(t)|^p > c})``."""
    if not c > 0:
        raise ValueError("c must be positive")
    v = np.sum(ensemble.paths**2, axis=2) ** (p / 2)
    return float(np.max(np.mean(np.where(v > c, v, 0.0), axis=0)))


@dataclass(frozen=True)
class ApdRow:
    """Per-shift outcome of an almost-periodicity-in-distribution test.

    ``tau`` is the grid-snapped shift actually used (``tau_requested`` is the
    caller's value).  ``sup_dbl`` is evaluated on a member subsample.
    """

    tau: float
    tau_requested: float
    sup_distance: float
    sup_dbl: float
    argmax_t: float
    accepted: bool

    def to_dict(self) -> dict:
        return {
            "tau": self.tau,
            "tau_requested": self.tau_requested,
            "supDistance": self.sup_distance,
            "supDBL": self.sup_dbl,
            "argmax_t": self.argmax_t,
            "accepted": self.accepted,
        }


def apd_test(
    ensemble: Ensemble,
    taus,
    epsilon: float,
    p: float = 2.0,
    *,
    dbl_subsample: int = 200,
    dbl_stride: int | None = None,
) -> list[ApdRow]:
    """``sup_t W_p(law(t), law(t + tau))`` over overlapping grid times.

    Each ``tau`` is snapped to the nearest grid multiple.  ``d_BL`` is also
    reported, computed on the first ``dbl_subsample`` members at every
    ``dbl_stride``-th time (default: about 50 times).

    Raises
    ------
    EmptyOverlap
        If ``|tau|`` leaves no time with both ``t`` and ``t + tau`` on the grid.
    """
    w = ensemble.window
    dt, n = w.dt, w.n
    d = ensemble.dim
    sorted_cols = np.sort(ensemble.paths[:, :, 0], axis=0) if d == 1 else None
    m = min(dbl_subsample, ensemble.size)
    rows = []
    for tau in taus:
        k = int(round(tau / dt))
        if abs(k) >= n:
            raise EmptyOverlap(f"tau={tau} leaves no overlap on a window of {w.length}")
        lo, hi = (0, n - k) if k >= 0 else (-k, n)
        idx = np.arange(lo, hi)
        if d == 1:
            diffs = np.abs(sorted_cols[:, idx] - sorted_cols[:, idx + k]) ** p
            dists = np.mean(diffs, axis=0) ** (1.0 / p)
        else:
            dists = np.array(
                [
                    wasserstein(
                        EmpiricalLaw(ensemble.paths[:, i]), EmpiricalLaw(ensemble.paths[:, i + k]), p
                    ).value
                    for i in idx
                ]
            )
        j = int(np.argmax(dists))
        stride = dbl_stride or max(1, len(idx) // 50)
        sub = idx[::stride]
        sup_bl = max(
            dbl(
                EmpiricalLaw(ensemble.paths[:m, i]), EmpiricalLaw(ensemble.paths[:m, i + k])
            ).value
            for i in sub
        )
        rows.append(
            ApdRow(
                tau=k * dt,
                tau_requested=float(tau),
                sup_distance=float(dists[j]),
                sup_dbl=float(sup_bl),
                argmax_t=float(w.t0 + idx[j] * dt),
                accepted=bool(dists[j] <= epsilon),
            )
        )
    return rows
