"""Stepanov norms of Lipschitz moduli and the contraction constants of the
mild-solution map for ``dX = (A X + F(t, X)) dt + G(t, X) dW``."""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .deterministic import cell_integrals, exponential_convolution
from .errors import InvalidExponent, NonFinite
from .functions import FunctionSpec
from .grid import GridWindow, trapezoid_cumulative
from .metrics import _window_nodes


def stepanov_norm(
    K: FunctionSpec,
    p: float,
    scan_range: tuple[float, float],
    *,
    dt: float = 1e-3,
    window_len: float = 1.0,
) -> float:
    """``max_xi (int_xi^{xi+1} |K|^p)^{1/p}`` over grid starts ``xi`` in ``scan_range``.

    Window starts are the grid nodes ``t0 + k dt`` with ``xi <= t1``; ``K``
    is sampled on ``[t0, t1 + window_len]``.
    """
    if p < 1:
        raise InvalidExponent("Stepanov norms need p >= 1")
    t0, t1 = scan_range
    w = GridWindow(t0, t1 + window_len, dt)
    vals = np.abs(np.asarray(K(w.times), dtype=float)) ** p
    if not np.all(np.isfinite(vals)):
        raise NonFinite("Lipschitz modulus overflowed")
    L = _window_nodes(window_len, dt)
    c = trapezoid_cumulative(vals, dt)
    return float(max(np.max(c[L:] - c[:-L]), 0.0) ** (1.0 / p))


def theta_st(k_norm_s2: float, delta: float, trace_q: float) -> float:
    """Contraction constant of the mild-solution map in ``sup_t E|X|^2``.

    ``2 K^2 / (delta (1 - e^{-delta})) + 2 K^2 trQ / (1 - e^{-2 delta})`` with
    ``K`` the Stepanov-2 norm of the Lipschitz modulus.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    k2 = k_norm_s2 * k_norm_s2
    return 2 * k2 / (delta * -math.expm1(-delta)) + 2 * k2 * trace_q / -math.expm1(-2 * delta)


class ThetaPrime(NamedTuple):
    beta1: float
    beta2: float
    theta_prime: float


def theta_prime_st(k_norm_sp: float, delta: float, p: float, trace_q: float) -> ThetaPrime:
    """Constants ``(beta1, beta2, theta')`` controlling almost periodicity in
    2-UI distribution, for a Stepanov-``p`` Lipschitz modulus with ``p > 2``.

    With ``1/2 = 1/q + 1/p``::

        beta1 = (4 / delta) (K^p / (1 - e^{-p delta / 4}))^{2/p}
        beta2 = 4 trQ (K^p / (1 - e^{-p delta / 2}))^{2/p}
        theta' = 4 / (3 q delta) ((3 beta1)^{q/2} + (3 beta2)^{q/2})
    """
    if not p > 2:
        raise InvalidExponent(f"need p > 2, got {p}")
    if not delta > 0:
        raise ValueError("delta must be positive")
    q = 2 * p / (p - 2)
    kp = k_norm_sp**p
    beta1 = (4 / delta) * (kp / -math.expm1(-p * delta / 4)) ** (2 / p)
    beta2 = 4 * trace_q * (kp / -math.expm1(-p * delta / 2)) ** (2 / p)
    theta = 4 / (3 * q * delta) * ((3 * beta1) ** (q / 2) + (3 * beta2) ** (q / 2))
    return ThetaPrime(beta1, beta2, theta)


class KappaProfile(NamedTuple):
    max_kappa: float
    bound_ok: bool
    bound: float
    kappa: np.ndarray


def kappa_profile(
    K: FunctionSpec,
    delta: float,
    p: float,
    window: GridWindow,
    *,
    memory_t: float | None = None,
    slack: float = 0.01,
    tol: float = 1e-8,
) -> KappaProfile:
    """Exponentially weighted memory ``kappa(t) = int e^{-delta(t-s)} K(s)^p ds``
    of the Lipschitz modulus, against its Stepanov bound
    ``|K|_{S^p}^p / (1 - e^{-delta})``.

    ``bound_ok`` allows a relative ``slack`` for quadrature error.  The
    Stepanov norm is taken over ``[t0 - memory_t, t1]``.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    dt = window.dt
    kp_fun = lambda s: np.abs(np.asarray(K(s), dtype=float)) ** p  # noqa: E731
    sup_kp = float(np.max(kp_fun(window.times)))
    if memory_t is None:
        memory_t = max(1.0, math.log(max(sup_kp, 1e-300) / (delta * tol)) / delta)
    ext = window.extended(memory_t)
    pre = ext.n - window.n
    cells = cell_integrals(kp_fun, ext.times[:-1], dt, delta, tol=tol)
    kappa = exponential_convolution(cells, delta, dt, int(round(memory_t / dt)))[pre:]
    if not np.all(np.isfinite(kappa)):
        raise NonFinite("kappa overflowed")
    norm = stepanov_norm(K, p, (ext.t0, window.t1), dt=dt)
    bound = norm**p / -math.expm1(-delta)
    mk = float(np.max(kappa))
    return KappaProfile(mk, bool(mk <= bound * (1 + slack) + 1e-12), bound, kappa)
