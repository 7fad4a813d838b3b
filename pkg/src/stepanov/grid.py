"""Uniform time grids and sampled trajectories."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GridMismatch, OutOfRange


@dataclass(frozen=True)
class GridWindow:
    """Uniform grid ``t0 + k*dt`` for ``k = 0 .. n-1``.

    The node count is ``round((t1 - t0)/dt) + 1``; the last node may differ
    from ``t1`` by less than ``dt/2`` when ``dt`` does not divide the span.
    """

    t0: float
    t1: float
    dt: float

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not self.t1 > self.t0:
            raise ValueError(f"need t1 > t0, got [{self.t0}, {self.t1}]")

    @property
    def n(self) -> int:
        return int(round((self.t1 - self.t0) / self.dt)) + 1

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.n)

    @property
    def length(self) -> float:
        return (self.n - 1) * self.dt

    def index_of(self, t: float, tol: float = 1e-6) -> int:
        """Node index of ``t``; raises ``OutOfRange`` if ``t`` is off-grid."""
        k = (t - self.t0) / self.dt
        ki = int(round(k))
        if abs(k - ki) > tol or ki < 0 or ki >= self.n:
            raise OutOfRange(f"t={t} is not a node of {self}")
        return ki

    def extended(self, before: float) -> "GridWindow":
        """Same spacing, prepended with ``ceil(before/dt)`` nodes."""
        m = int(np.ceil(before / self.dt - 1e-9))
        return GridWindow(self.t0 - m * self.dt, self.t0 + (self.n - 1) * self.dt, self.dt)

    def same_as(self, other: "GridWindow") -> bool:
        return (
            self.n == other.n
            and np.isclose(self.t0, other.t0, rtol=0, atol=1e-9 * max(1.0, abs(self.t0)))
            and np.isclose(self.dt, other.dt, rtol=1e-12, atol=0)
        )


@dataclass(frozen=True)
class SampledPath:
    """Values of a (possibly vector-valued) trajectory on a ``GridWindow``.

    ``values`` is always stored with shape ``(n, d)``; 1-d input is promoted.
    """

    window: GridWindow
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2 or v.shape[0] != self.window.n:
            raise GridMismatch(
                f"values of shape {v.shape} do not match {self.window.n} grid nodes"
            )
        if not np.all(np.isfinite(v)):
            raise ValueError("SampledPath values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    @property
    def times(self) -> np.ndarray:
        return self.window.times

    @property
    def scalar(self) -> np.ndarray:
        """The single component of a 1-d path."""
        if self.dim != 1:
            raise ValueError("path is vector-valued")
        return self.values[:, 0]

    def norms(self) -> np.ndarray:
        """Euclidean norm of the state at every node."""
        if self.dim == 1:
            return np.abs(self.values[:, 0])
        return np.linalg.norm(self.values, axis=1)

    def restrict(self, t_a: float, t_b: float) -> "SampledPath":
        """Sub-path on the nodes lying in ``[t_a, t_b]``."""
        w = self.window
        i = self._ceil_index(t_a)
        j = int(np.floor((t_b - w.t0) / w.dt + 1e-9))
        j = min(j, w.n - 1)
        if j - i < 1:
            raise OutOfRange(f"[{t_a}, {t_b}] holds fewer than two nodes of {w}")
        sub = GridWindow(w.t0 + i * w.dt, w.t0 + j * w.dt, w.dt)
        return SampledPath(sub, self.values[i : j + 1])

    def decimate(self, k: int) -> "SampledPath":
        """Keep every ``k``-th node."""
        if k == 1:
            return self
        v = self.values[::k]
        w = self.window
        sub = GridWindow(w.t0, w.t0 + (len(v) - 1) * k * w.dt, k * w.dt)
        return SampledPath(sub, v)

    def _ceil_index(self, t: float) -> int:
        w = self.window
        return max(0, int(np.ceil((t - w.t0) / w.dt - 1e-9)))


def trapezoid_cumulative(y: np.ndarray, dt: float) -> np.ndarray:
    """Running composite-trapezoid integral, ``C[0] = 0``, along axis 0."""
    out = np.zeros_like(y, dtype=float)
    np.cumsum(0.5 * dt * (y[1:] + y[:-1]), axis=0, out=out[1:])
    return out
