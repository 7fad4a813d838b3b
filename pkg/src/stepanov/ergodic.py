"""Weighted ergodic means over symmetric windows ``[-r, r]``.

The weight measures offered here (Lebesgue and ``|t|**alpha``) are the
standard examples for which the translation-invariance condition used by
the pseudo-almost-periodic theory is known to hold.  That condition is
assumed for custom densities; it cannot be certified from samples.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import OutOfRange, ZeroMass
from .functions import FunctionSpec
from .grid import SampledPath, trapezoid_cumulative
from .metrics import _window_nodes


@dataclass(frozen=True)
class WeightMeasure:
    """Absolutely continuous weight ``rho(t) dt`` on the real line.

    ``kind`` is ``lebesgue``, ``power`` (``rho = |t|**alpha``) or ``custom``
    (``rho`` given by a nonnegative ``FunctionSpec``).  ``r_min`` is the
    radius above which ``mu([-r, r]) > 0`` is guaranteed (0 for the
    presets).
    """

    kind: str = "lebesgue"
    alpha: float = 0.0
    density_spec: FunctionSpec | None = None
    r_min: float = 0.0

    def __post_init__(self):
        if self.kind not in ("lebesgue", "power", "custom"):
            raise ValueError(f"unknown weight measure {self.kind!r}")
        if self.kind == "power" and self.alpha < 0:
            raise ValueError("power weight needs alpha >= 0")
        if self.kind == "custom" and self.density_spec is None:
            raise ValueError("custom weight needs a density spec")

    @classmethod
    def lebesgue(cls) -> "WeightMeasure":
        return cls("lebesgue")

    @classmethod
    def power(cls, alpha: float) -> "WeightMeasure":
        return cls("power", alpha=float(alpha))

    def density(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.kind == "lebesgue":
            return np.ones_like(t)
        if self.kind == "power":
            return np.abs(t) ** self.alpha
        rho = np.asarray(self.density_spec(t), dtype=float)
        if np.any(rho < 0):
            raise ValueError("weight density must be nonnegative")
        return rho


def _symmetric_slice(times: np.ndarray, r: float, dt: float) -> slice:
    i = int(np.searchsorted(times, -r - 1e-9 * dt, side="left"))
    j = int(np.searchsorted(times, r + 1e-9 * dt, side="right"))
    if i == 0 and times[0] > -r + 1e-6 * dt or j == len(times) and times[-1] < r - 1e-6 * dt:
        raise OutOfRange(f"radius {r} exceeds the sampled window")
    return slice(i, j)


def _weighted_mean(values: np.ndarray, rho: np.ndarray, dt: float) -> float:
    num = trapezoid_cumulative(values * rho, dt)[-1]
    den = trapezoid_cumulative(rho, dt)[-1]
    if not den > 0:
        raise ZeroMass("weight measure gives zero mass to the window")
    return float(num / den)


def ergodic_profile(
    f: SampledPath, mu: WeightMeasure, radii
) -> list[tuple[float, float]]:
    """``[(r, mean(r))]`` with ``mean(r) = int |f| rho / int rho`` over ``[-r, r]``.

    Radii are matched to the grid nodes inside ``[-r, r]``.
    """
    t = f.times
    dt = f.window.dt
    mag = f.norms()
    rho_all = mu.density(t)
    out = []
    for r in radii:
        s = _symmetric_slice(t, float(r), dt)
        out.append((float(r), _weighted_mean(mag[s], rho_all[s], dt)))
    return out


def stepanov_window_profile(
    f: SampledPath,
    mu: WeightMeasure,
    radii,
    p: float,
    window_len: float = 1.0,
) -> list[tuple[float, float, float]]:
    """Weighted means of the windowed norms ``a(t) = (int_t^{t+1} |f|^p)^{1/p}``.

    Returns ``[(r, mean of a, mean of a**p)]``.  Window starts ``t`` range
    over ``[-r, r]``, so ``f`` must be sampled on ``[-r, r + window_len]``.
    """
    dt = f.window.dt
    L = _window_nodes(window_len, dt)
    c = trapezoid_cumulative(f.norms() ** p, dt)
    mass = np.maximum(c[L:] - c[:-L], 0.0)
    starts = f.times[: len(mass)]
    a = mass ** (1.0 / p)
    rho_all = mu.density(starts)
    out = []
    for r in radii:
        s = _symmetric_slice(starts, float(r), dt)
        out.append(
            (
                float(r),
                _weighted_mean(a[s], rho_all[s], dt),
                _weighted_mean(mass[s], rho_all[s], dt),
            )
        )
    return out
