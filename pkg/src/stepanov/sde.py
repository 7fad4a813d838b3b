"""Mild solutions of ``dX = (A X + F(t, X)) dt + G(t, X) dW`` with a diagonal
dissipative ``A = diag(-delta_i)`` and diagonal noise.

Two solvers share one counter-based Brownian driver:

* ``picard_solve`` iterates the variation-of-constants map starting from
  ``X = 0``; the drift integral uses the trapezoid rule, the stochastic
  integral left-point (Ito) sums, both truncated to ``[t - memory_t, t]``;
* ``exponential_euler_solve`` steps ``X_{k+1} = S(dt)(X_k + F dt + G dW_k)``
  from ``X = 0`` at ``t0 - memory_t``.

Both evaluate the time-dependent coefficients once on the grid and process
ensemble members in chunks, so memory stays bounded by the chunk size.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter

from .constants import stepanov_norm, theta_st
from .errors import DimensionMismatch, NegativeTime, NoConvergence, NonFinite
from .functions import Compose, Const, FunctionSpec, Parametric, Sum
from .grid import GridWindow, SampledPath
from .noise import BrownianDriver

log = logging.getLogger(__name__)


def semigroup_apply(decay, t: float, x) -> np.ndarray:
    """``S(t) x = (e^{-delta_i t} x_i)_i``."""
    if t < 0:
        raise NegativeTime(f"semigroup needs t >= 0, got {t}")
    decay = np.asarray(decay, dtype=float)
    return np.exp(-decay * t) * np.asarray(x, dtype=float)


# ---------------------------------------------------------------- problem


def _state_map(form: str):
    if form == "affine":
        return lambda x: x
    if form == "sine":
        return np.sin
    return np.tanh


@dataclass(frozen=True)
class SdeProblem:
    """Semilinear SDE with diagonal generator and diagonal noise.

    Each state component ``i`` obeys
    ``dX_i = (-delta_i X_i + F(t, X_i)) dt + G(t, X_i) dW_i`` with the same
    scalar ``Parametric`` coefficients ``F`` and ``G`` in every component and
    ``W`` a Wiener process with covariance ``diag(q_diag)``.

    Parameters
    ----------
    decay : tuple of float
        ``delta_i > 0``; its length is the state dimension.
    drift, diffusion : Parametric
        Coefficients ``(t, x) -> coef(t) s(x) + forcing(t)``.
    q_diag : tuple of float
        Noise covariance diagonal (one entry per component).
    lipschitz : FunctionSpec, optional
        Lipschitz modulus ``K(t)``; defaults to ``|coef_F| + |coef_G|``.
    growth_m : float, optional
        Sublinear-growth constant; defaults to a bound sampled from the
        coefficients on ``[-100, 100]``.
    """

    decay: tuple[float, ...]
    drift: Parametric
    diffusion: Parametric
    q_diag: tuple[float, ...] = (1.0,)
    lipschitz: FunctionSpec | None = None
    growth_m: float | None = None

    def __post_init__(self):
        decay = tuple(float(d) for d in np.atleast_1d(self.decay))
        q = tuple(float(v) for v in np.atleast_1d(self.q_diag))
        if min(decay) <= 0:
            raise ValueError("every decay rate must be positive")
        if len(q) != len(decay):
            raise DimensionMismatch("diagonal noise needs one covariance entry per component")
        if any(v < 0 for v in q):
            raise ValueError("noise covariance must be nonnegative")
        object.__setattr__(self, "decay", decay)
        object.__setattr__(self, "q_diag", q)
        if self.lipschitz is None:
            K = Sum((Compose("abs", self.drift.coef), Compose("abs", self.diffusion.coef)))
            object.__setattr__(self, "lipschitz", K)
        if self.growth_m is None:
            object.__setattr__(self, "growth_m", self._sampled_growth())

    @property
    def dim(self) -> int:
        return len(self.decay)

    @property
    def trace_q(self) -> float:
        return float(sum(self.q_diag))

    @property
    def min_decay(self) -> float:
        return min(self.decay)

    def _sampled_growth(self) -> float:
        t = np.linspace(-100.0, 100.0, 20001)
        parts = [self.drift.coef, self.drift.forcing, self.diffusion.coef, self.diffusion.forcing]
        return float(sum(np.max(np.abs(np.asarray(p(t), dtype=float))) for p in parts))

    def theta_st(self, scan_range: tuple[float, float], dt: float = 1e-2) -> float:
        """Contraction constant with ``|K|_{S^2}`` taken over ``scan_range``."""
        k = stepanov_norm(self.lipschitz, 2.0, scan_range, dt=dt)
        return theta_st(k, self.min_decay, self.trace_q)

    def verify_conditions(self, n_samples: int = 2000, seed: int = 0) -> dict[str, bool]:
        """Check the growth and Lipschitz conditions on random ``(t, x, y)``."""
        rng = np.random.default_rng(seed)
        t = rng.uniform(-100, 100, n_samples)
        x = rng.normal(0, 10, (n_samples, self.dim))
        y = rng.normal(0, 10, (n_samples, self.dim))
        tt = t[:, None]

        def size(fx, gx):
            return np.linalg.norm(fx, axis=1) + np.linalg.norm(gx, axis=1)

        grow = size(self.drift(tt, x), self.diffusion(tt, x))
        growth_ok = bool(np.all(grow <= self.growth_m * (1 + np.linalg.norm(x, axis=1)) + 1e-9))
        diff = size(self.drift(tt, x) - self.drift(tt, y), self.diffusion(tt, x) - self.diffusion(tt, y))
        K = np.asarray(self.lipschitz(t), dtype=float)
        lip_ok = bool(np.all(diff <= K * np.linalg.norm(x - y, axis=1) * (1 + 1e-12) + 1e-12))
        return {"contraction_semigroup": self.min_decay > 0, "growth": growth_ok, "lipschitz": lip_ok}


def required_memory(problem: SdeProblem, tol: float) -> float:
    """Memory ``T`` with ``e^{-delta T} M (1 + M/delta) < tol / 10``."""
    d = problem.min_decay
    bound = problem.growth_m * (1 + problem.growth_m / d)
    if bound <= 0:
        return 1.0 / d
    return max(1.0 / d, math.log(10 * bound / tol) / d)


@dataclass(frozen=True)
class SolverConfig:
    """Grid, ensemble size, seed and Picard controls.

    ``memory_t = None`` lets the solvers derive the truncation from
    ``picard_tol`` and the problem (see ``required_memory``).
    """

    window: GridWindow
    ensemble_n: int = 1000
    seed: int = 0
    memory_t: float | None = None
    picard_tol: float = 1e-8
    picard_max_iter: int = 50
    chunk: int = 1000

    def __post_init__(self):
        if self.ensemble_n < 1:
            raise ValueError("ensemble_n must be >= 1")
        if not self.picard_tol > 0:
            raise ValueError("picard_tol must be positive")
        if self.memory_t is not None and not self.memory_t > 0:
            raise ValueError("memory_t must be positive")

    @property
    def dt(self) -> float:
        return self.window.dt

    def resolve_memory(self, problem: SdeProblem) -> float:
        need = required_memory(problem, self.picard_tol)
        if self.memory_t is None:
            return need
        if self.memory_t < need:
            warnings.warn(
                f"memory_t={self.memory_t} is below the {need:.3g} needed for "
                f"tail < picard_tol/10",
                RuntimeWarning,
                stacklevel=3,
            )
        return self.memory_t


@dataclass(frozen=True)
class Ensemble:
    """``N`` sample paths on a common grid.

    ``paths`` has shape ``(N, n, d)``.  ``diagnostics`` lists the Picard
    increments ``sup_t mean |X_{k+1} - X_k|^2`` (empty for time stepping).
    """

    config: SolverConfig
    paths: np.ndarray = field(repr=False)
    driver_seed: int = 0
    diagnostics: tuple[float, ...] = ()
    method: str = "picard"
    theta_st: float = math.nan
    memory_t: float = math.nan

    @property
    def window(self) -> GridWindow:
        return self.config.window

    @property
    def times(self) -> np.ndarray:
        return self.window.times

    @property
    def size(self) -> int:
        return self.paths.shape[0]

    @property
    def dim(self) -> int:
        return self.paths.shape[2]

    def path(self, i: int) -> SampledPath:
        return SampledPath(self.window, self.paths[i])

    def mean_square(self) -> np.ndarray:
        """``E|X(t)|^2`` per node."""
        return np.mean(np.sum(self.paths**2, axis=2), axis=0)


# ---------------------------------------------------------------- solvers


class _Coefficients:
    """``coef(t)`` and ``forcing(t)`` tabulated on the extended grid."""

    def __init__(self, spec: Parametric, times: np.ndarray):
        self.c = np.asarray(spec.coef(times), dtype=float)[:, None]
        self.b = np.asarray(spec.forcing(times), dtype=float)[:, None]
        self.s = _state_map(spec.form)
        self.state_free = spec.is_state_free()

    def at(self, x: np.ndarray, k=slice(None)) -> np.ndarray:
        """Evaluate on states ``x`` of shape ``(C, n, d)`` or ``(C, d)`` at step ``k``."""
        return self.c[k] * self.s(x) + self.b[k]


def _setup(problem: SdeProblem, config: SolverConfig):
    memory_t = config.resolve_memory(problem)
    ext = config.window.extended(memory_t)
    pre = ext.n - config.window.n
    driver = BrownianDriver(config.seed, ext.n - 1, ext.dt, problem.q_diag, first_step=-pre)
    k_dt = min(ext.dt, 1e-2)
    theta = problem.theta_st((ext.t0, config.window.t1), dt=k_dt)
    return memory_t, ext, driver, theta


def _chunks(n: int, size: int):
    for a in range(0, n, size):
        yield range(a, min(n, a + size))


def _mild_map(
    x: np.ndarray,
    dw: np.ndarray,
    F: _Coefficients,
    G: _Coefficients,
    a: np.ndarray,
    dt: float,
    L: int,
) -> np.ndarray:
    """One application of the truncated variation-of-constants map.

    ``x`` and the result have shape ``(C, n, d)``; ``dw`` has shape
    ``(C, n - 1, d)``.
    """
    fv = F.at(x)
    gv = G.at(x)
    w = np.zeros_like(x)
    w[:, 1:] = 0.5 * dt * (a * fv[:, :-1] + fv[:, 1:]) + a * gv[:, :-1] * dw
    out = np.empty_like(x)
    for i, ai in enumerate(a):
        run = lfilter([1.0], [1.0, -ai], w[:, :, i], axis=1)
        if 0 < L < run.shape[1]:
            run[:, L:] -= ai**L * run[:, :-L]
        out[:, :, i] = run
    return out


def picard_solve(problem: SdeProblem, config: SolverConfig) -> Ensemble:
    """Picard iteration of the mild-solution map, started at ``X = 0``.

    Stops when ``sup_t mean |X_{k+1} - X_k|^2 < picard_tol``.  If the
    iteration budget runs out, ``NoConvergence`` is raised when the
    contraction constant is ``>= 1``; otherwise a warning is issued and the
    last iterate is returned.
    """
    memory_t, ext, driver, theta = _setup(problem, config)
    if theta >= 1:
        warnings.warn(
            f"contraction constant {theta:.3g} >= 1; Picard convergence is not guaranteed",
            RuntimeWarning,
            stacklevel=2,
        )
    d, N, n = problem.dim, config.ensemble_n, ext.n
    times = ext.times
    F = _Coefficients(problem.drift, times)
    G = _Coefficients(problem.diffusion, times)
    a = np.exp(-np.asarray(problem.decay) * ext.dt)
    L = int(round(memory_t / ext.dt))
    pre = ext.n - config.window.n

    X = np.zeros((N, n, d))
    diagnostics: list[float] = []
    converged = False
    for it in range(config.picard_max_iter):
        sq = np.zeros(n)
        for members in _chunks(N, config.chunk):
            sl = slice(members.start, members.stop)
            dw = driver.increments(members)
            new = _mild_map(X[sl], dw, F, G, a, ext.dt, L)
            sq += np.sum((new - X[sl]) ** 2, axis=(0, 2))
            X[sl] = new
        if not np.all(np.isfinite(X)):
            raise NonFinite(f"Picard iterate {it + 1} overflowed")
        diagnostics.append(float(np.max(sq) / N))
        log.debug("picard iteration %d: %.3e", it + 1, diagnostics[-1])
        if diagnostics[-1] < config.picard_tol:
            converged = True
            break
    if not converged:
        msg = f"Picard did not reach {config.picard_tol} in {config.picard_max_iter} iterations"
        if theta >= 1:
            raise NoConvergence(msg)
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    return Ensemble(
        config=config,
        paths=np.ascontiguousarray(X[:, pre:]),
        driver_seed=config.seed,
        diagnostics=tuple(diagnostics),
        method="picard",
        theta_st=theta,
        memory_t=memory_t,
    )


def exponential_euler_solve(problem: SdeProblem, config: SolverConfig) -> Ensemble:
    """Exponential Euler from ``X = 0`` at ``t0 - memory_t``.

    ``X_{k+1} = S(dt) (X_k + F(t_k, X_k) dt + G(t_k, X_k) dW_k)`` on the same
    Brownian increments as ``picard_solve``.
    """
    memory_t, ext, driver, theta = _setup(problem, config)
    d, N, n = problem.dim, config.ensemble_n, ext.n
    F = _Coefficients(problem.drift, ext.times)
    G = _Coefficients(problem.diffusion, ext.times)
    a = np.exp(-np.asarray(problem.decay) * ext.dt)
    pre = ext.n - config.window.n
    out = np.empty((N, config.window.n, d))
    for members in _chunks(N, config.chunk):
        dw = driver.increments(members)
        x = np.zeros((len(members), d))
        if pre == 0:
            out[members.start : members.stop, 0] = x
        for k in range(n - 1):
            x = a * (x + F.at(x, k) * ext.dt + G.at(x, k) * dw[:, k])
            if k + 1 >= pre:
                out[members.start : members.stop, k + 1 - pre] = x
    if not np.all(np.isfinite(out)):
        raise NonFinite("exponential Euler overflowed")
    return Ensemble(
        config=config,
        paths=out,
        driver_seed=config.seed,
        method="exponential_euler",
        theta_st=theta,
        memory_t=memory_t,
    )


def solution_distance(a: Ensemble, b: Ensemble) -> float:
    """``sup_t (E|X_a(t) - X_b(t)|^2)^{1/2}`` for ensembles on a shared driver."""
    if a.paths.shape != b.paths.shape:
        raise DimensionMismatch("ensembles must have the same shape")
    return float(np.sqrt(np.max(np.mean(np.sum((a.paths - b.paths) ** 2, axis=2), axis=0))))


# ------------------------------------------------------------------ oracles


def ou_stationary_variance(delta: float, sigma: float, trace_q: float) -> float:
    return sigma * sigma * trace_q / (2 * delta)


def ou_exact_ensemble(
    delta: float,
    sigma: float,
    trace_q: float,
    window: GridWindow,
    seed: int,
    n_members: int,
) -> np.ndarray:
    """Stationary Ornstein-Uhlenbeck paths by exact Gaussian transitions.

    ``X(t0) ~ N(0, v)`` and ``X_{k+1} = e^{-delta dt} X_k + sqrt(v (1 - e^{-2 delta dt})) Z_k``
    with ``v = sigma^2 trQ / (2 delta)``.  Returns shape ``(n_members, n)``.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    v = ou_stationary_variance(delta, sigma, trace_q)
    a = math.exp(-delta * window.dt)
    s = math.sqrt(v * -math.expm1(-2 * delta * window.dt))
    normals = BrownianDriver(seed, window.n, 1.0, (1.0,))
    out = np.empty((n_members, window.n))
    for i in range(n_members):
        z = normals.member_increments(i)[:, 0]
        u = z * s
        u[0] = z[0] * math.sqrt(v)
        out[i] = lfilter([1.0], [1.0, -a], u)
    return out


def ou_exact(
    delta: float, sigma: float, trace_q: float, window: GridWindow, seed: int
) -> tuple[SampledPath, float]:
    """One exact stationary OU path and the stationary variance."""
    path = ou_exact_ensemble(delta, sigma, trace_q, window, seed, 1)[0]
    return SampledPath(window, path), ou_stationary_variance(delta, sigma, trace_q)


def additive_problem(delta: float, sigma: float, trace_q: float = 1.0) -> SdeProblem:
    """``dX = -delta X dt + sigma dW`` with ``E W(1)^2 = trace_q``."""
    zero = Const(0.0)
    return SdeProblem(
        decay=(delta,),
        drift=Parametric("affine", (zero, zero)),
        diffusion=Parametric("affine", (zero, Const(sigma))),
        q_diag=(trace_q,),
    )
